//! Constant-price planner for unweighted revenue.
//!
//! Absent revenue floors, the revenue-optimal policy for each group is the
//! single constant price that absorbs its remaining commitment evenly over
//! the time left; the planner holds that price to the horizon (or to the next
//! binding sales deadline, which just re-anchors the same even pace). When an
//! upcoming revenue floor is burdensome — unreachable at those prices — the
//! planner finds the most stringent floor, splits the gap across groups, and
//! re-prices each group so its revenue rate covers its share over the window
//! ending at that floor's checkpoint.

use crate::constraints::{check_feasibility_against, ConstraintSchedule};
use crate::demand::DemandModel;
use crate::distribution::{allocate, AllocationInput, DistributionMethod};
use crate::error::PricingError;
use crate::policy::{PolicySegment, PriceCurve, PricingPolicy};
use crate::timevalue::TimeValueSpec;

use super::{
    prediction_grid, step_error, validate_inputs, AllocationRecord, PlanResult, PlanStep,
    StartState, StepTrigger,
};

/// Even-paced prices for every group from the current state.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenAbsorption {
    /// Constant normalized price per group.
    pub prices: Vec<f64>,
    /// The sales rate each price induces.
    pub rates: Vec<f64>,
    /// Checkpoint whose sales floor dictates the pace, `None` when the final
    /// sales total does.
    pub binding: Vec<Option<usize>>,
}

/// Computes, per group, the slowest constant sales rate that still meets
/// every remaining sales floor and lands exactly on the final total, and the
/// price that induces it.
pub fn even_absorption(
    schedule: &ConstraintSchedule,
    models: &[DemandModel],
    state: &StartState,
) -> Result<EvenAbsorption, PricingError> {
    let t = state.time;
    let horizon = schedule.horizon();
    let times = schedule.times();
    let k = schedule.num_groups();
    let mut prices = Vec::with_capacity(k);
    let mut rates = Vec::with_capacity(k);
    let mut binding = Vec::with_capacity(k);
    for i in 0..k {
        let remaining = (schedule.final_sales(i) - state.sold[i]).max(0.0);
        let mut rate = remaining / (horizon - t);
        let mut bound: Option<usize> = None;
        for (j, &tau) in times.iter().enumerate() {
            if tau <= t || j + 1 == times.len() {
                continue;
            }
            let Some(floor) = schedule.sales_floor(i, j) else {
                continue;
            };
            let need = floor - state.sold[i];
            if need <= 0.0 {
                continue;
            }
            let rate_j = need / (tau - t);
            if rate_j > rate {
                rate = rate_j;
                bound = Some(j);
            }
        }
        let params = models[i].params_at(t);
        let price = params.invert_rate(rate).map_err(|e| match e {
            PricingError::InfeasibleRate { rate, max_rate } => PricingError::InfeasibleScenario {
                group: i,
                floor_time: bound.map_or(horizon, |j| times[j]),
                required_rate: rate,
                max_rate,
            },
            other => other,
        })?;
        prices.push(price);
        rates.push(rate);
        binding.push(bound);
    }
    Ok(EvenAbsorption {
        prices,
        rates,
        binding,
    })
}

/// Revenue floors that the given constant prices, held from the current
/// state onward, would fail to reach. Returned in checkpoint order.
pub fn detect_burdensome(
    schedule: &ConstraintSchedule,
    models: &[DemandModel],
    state: &StartState,
    prices: &[f64],
) -> Vec<usize> {
    let t = state.time;
    let revenue_rate = aggregate_revenue_rate(models, state, prices);
    let total = state.total_revenue();
    schedule
        .pending_revenue_floors(t)
        .into_iter()
        .filter(|&j| {
            let tau = schedule.times()[j];
            let floor = schedule.revenue_floor(j).unwrap();
            total + revenue_rate * (tau - t) < floor
        })
        .collect()
}

/// Picks, among burdensome floors, the one demanding the largest revenue-rate
/// increase per unit time (earliest checkpoint on a tie), and returns it with
/// the aggregate revenue rate needed to reach it from the current state.
pub fn most_stringent(
    schedule: &ConstraintSchedule,
    models: &[DemandModel],
    state: &StartState,
    prices: &[f64],
    burdensome: &[usize],
) -> (usize, f64) {
    assert!(!burdensome.is_empty(), "no burdensome floors to rank");
    let t = state.time;
    let revenue_rate = aggregate_revenue_rate(models, state, prices);
    let total = state.total_revenue();
    let mut best_j = burdensome[0];
    let mut best_measure = f64::NEG_INFINITY;
    for &j in burdensome {
        let tau = schedule.times()[j];
        let floor = schedule.revenue_floor(j).unwrap();
        let measure = (floor - total - revenue_rate * (tau - t)) / (tau - t);
        if measure > best_measure {
            best_measure = measure;
            best_j = j;
        }
    }
    let tau = schedule.times()[best_j];
    let floor = schedule.revenue_floor(best_j).unwrap();
    (best_j, (floor - total) / (tau - t))
}

fn aggregate_revenue_rate(models: &[DemandModel], state: &StartState, prices: &[f64]) -> f64 {
    prices
        .iter()
        .enumerate()
        .map(|(i, p)| models[i].params_at(state.time).revenue_rate(*p))
        .sum()
}

/// Plans from the start of the horizon.
pub fn plan(
    schedule: &ConstraintSchedule,
    models: &[DemandModel],
    method: DistributionMethod,
) -> Result<PlanResult, PricingError> {
    plan_from(schedule, models, method, StartState::origin(schedule.num_groups()))
}

/// Plans from an arbitrary mid-horizon state (used when replanning after a
/// demand change).
pub fn plan_from(
    schedule: &ConstraintSchedule,
    models: &[DemandModel],
    method: DistributionMethod,
    start: StartState,
) -> Result<PlanResult, PricingError> {
    validate_inputs(schedule, models, &start)?;
    let horizon = schedule.horizon();
    let times = schedule.times();
    let k = schedule.num_groups();
    let last = times.len() - 1;

    let mut state = start.clone();
    let mut segments: Vec<Vec<PolicySegment>> = vec![Vec::new(); k];
    let mut steps: Vec<PlanStep> = Vec::new();
    let step_cap = 4 * times.len().max(2);

    loop {
        let index = steps.len();
        if index > step_cap {
            return Err(PricingError::NonConvergence { passes: index });
        }
        let even = even_absorption(schedule, models, &state)
            .map_err(|e| step_error(e, index, None))?;
        let burdensome = detect_burdensome(schedule, models, &state, &even.prices);

        if !burdensome.is_empty() {
            let (j_star, required_rate) =
                most_stringent(schedule, models, &state, &even.prices, &burdensome);
            let t_end = times[j_star];
            let dt = t_end - state.time;
            let mut expected = Vec::with_capacity(k);
            let mut max_possible = Vec::with_capacity(k);
            for i in 0..k {
                let params = models[i].params_at(state.time);
                expected.push(params.revenue_rate(even.prices[i]) * dt);
                let best = params.revenue_max_price();
                max_possible.push(params.revenue_rate(best) * dt);
            }
            let floor = schedule.revenue_floor(j_star).unwrap();
            let shortfall =
                floor - state.total_revenue() - expected.iter().sum::<f64>();
            let input = AllocationInput {
                expected: expected.clone(),
                max_possible,
                cumulative: state.revenue.clone(),
                shortfall,
            };
            let alloc = allocate(method, &input).map_err(|e| step_error(e, index, None))?;

            let mut prices = Vec::with_capacity(k);
            for i in 0..k {
                let params = models[i].params_at(state.time);
                let target_rate = (expected[i] + alloc.shares[i]) / dt;
                let p = params
                    .solve_price_for_revenue_rate(target_rate, even.prices[i])
                    .map_err(|e| step_error(e, index, Some(i)))?;
                prices.push(p);
            }
            for i in 0..k {
                let params = models[i].params_at(state.time);
                let v = params.rate(prices[i]);
                segments[i].push(PolicySegment {
                    start: state.time,
                    end: t_end,
                    curve: PriceCurve::Constant(prices[i]),
                });
                state.sold[i] += v * dt;
                state.revenue[i] += prices[i] * v * dt;
            }
            steps.push(PlanStep {
                index,
                start: state.time,
                end: t_end,
                trigger: StepTrigger::RevenueFloor {
                    checkpoint: j_star,
                    required_rate,
                },
                prices,
                allocations: vec![AllocationRecord {
                    time: state.time,
                    target_time: t_end,
                    method,
                    shortfall,
                    weights: alloc.weights,
                    shares: alloc.shares,
                    equal_split: alloc.equal_split,
                }],
            });
            state.time = t_end;
            if j_star == last {
                break;
            }
        } else {
            // No floor in the way: hold the even prices to the next binding
            // sales deadline, or to the horizon when none binds.
            let next_deadline = even.binding.iter().flatten().copied().min();
            let (t_end, trigger) = match next_deadline {
                Some(j) => (times[j], StepTrigger::SalesDeadline { checkpoint: j }),
                None => (horizon, StepTrigger::Horizon),
            };
            let dt = t_end - state.time;
            for i in 0..k {
                let params = models[i].params_at(state.time);
                let v = params.rate(even.prices[i]);
                segments[i].push(PolicySegment {
                    start: state.time,
                    end: t_end,
                    curve: PriceCurve::Constant(even.prices[i]),
                });
                state.sold[i] += v * dt;
                state.revenue[i] += even.prices[i] * v * dt;
            }
            let done = matches!(trigger, StepTrigger::Horizon);
            steps.push(PlanStep {
                index,
                start: state.time,
                end: t_end,
                trigger,
                prices: even.prices,
                allocations: Vec::new(),
            });
            state.time = t_end;
            if done {
                break;
            }
        }
    }

    let policy = PricingPolicy::new(horizon, TimeValueSpec::flat(), segments);
    let grid = prediction_grid(schedule, models, start.time);
    let predicted = policy.integrate_from(models, &grid, &start.sold, &start.revenue)?;
    if let Some(violation) =
        check_feasibility_against(schedule, &predicted, schedule.default_tolerance())
    {
        return Err(PricingError::PlanInfeasible { violation });
    }
    Ok(PlanResult {
        policy,
        predicted,
        steps,
    })
}
