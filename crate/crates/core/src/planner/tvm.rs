//! Smooth-price planner for time-value-weighted revenue.
//!
//! When revenue is weighted by `zeta(t)` (discounting and/or posted-price
//! uplift), the revenue-stationary path for a group with linear demand is no
//! longer constant. Writing `A = scale * intercept`, `B = scale * slope` and
//! `choke = intercept / slope`, the path that sells `remaining` units over
//! `[t_a, t_b]` while staying stationary is
//!
//! ```text
//! p(t) = (choke - q / zeta(t)) / 2
//! q    = (2 * remaining - A * (t_b - t_a)) / (B * I)
//! I    = ∫ dt / zeta(t)  over [t_a, t_b]
//! ```
//!
//! with one multiplier `q` per group per window. Along such a path the
//! window's sales and weighted revenue reduce to closed forms in `q`, which
//! is what makes floor repairs cheap: raising a group's revenue over a window
//! means shrinking `|q|` toward zero, and the required value is a
//! one-dimensional root find.
//!
//! With a flat weight everything collapses to the constant-price planner.

use crate::constraints::{check_feasibility_against, ConstraintSchedule};
use crate::demand::{DemandModel, LinearDemandParams};
use crate::distribution::{allocate, AllocationInput, DistributionMethod};
use crate::error::PricingError;
use crate::numerics::bisect;
use crate::policy::{PolicySegment, PriceCurve, PricingPolicy};
use crate::timevalue::TimeValueSpec;

use super::{
    prediction_grid, step_error, validate_inputs, AllocationRecord, PlanResult, PlanStep,
    StartState, StepTrigger,
};

/// Multiplier of the stationary price path selling `remaining` units over
/// `[t_a, t_b]`.
pub fn closed_form_multiplier(
    tv: &TimeValueSpec,
    params: &LinearDemandParams,
    remaining: f64,
    t_a: f64,
    t_b: f64,
) -> f64 {
    let big_a = params.scale * params.intercept;
    let big_b = params.scale * params.slope;
    let inv = tv.inv_zeta_integral(t_a, t_b);
    (2.0 * remaining - big_a * (t_b - t_a)) / (big_b * inv)
}

/// Sales delivered over `[t_a, t_b]` by the stationary path with the given
/// multiplier (valid on the unclamped demand branch).
pub fn segment_sales(
    tv: &TimeValueSpec,
    params: &LinearDemandParams,
    multiplier: f64,
    t_a: f64,
    t_b: f64,
) -> f64 {
    let big_a = params.scale * params.intercept;
    let big_b = params.scale * params.slope;
    0.5 * big_a * (t_b - t_a) + 0.5 * big_b * multiplier * tv.inv_zeta_integral(t_a, t_b)
}

/// Weighted revenue over `[t_a, t_b]` along the stationary path. Quadratic in
/// the multiplier: `K1 - K2 * q^2` with both constants positive.
pub fn segment_revenue(
    tv: &TimeValueSpec,
    params: &LinearDemandParams,
    multiplier: f64,
    t_a: f64,
    t_b: f64,
) -> f64 {
    let (k1, k2) = revenue_coefficients(tv, params, t_a, t_b);
    k1 - k2 * multiplier * multiplier
}

fn revenue_coefficients(
    tv: &TimeValueSpec,
    params: &LinearDemandParams,
    t_a: f64,
    t_b: f64,
) -> (f64, f64) {
    let big_a = params.scale * params.intercept;
    let big_b = params.scale * params.slope;
    let k1 = 0.25 * big_a * params.choke_price() * tv.zeta_integral(t_a, t_b);
    let k2 = 0.25 * big_b * tv.inv_zeta_integral(t_a, t_b);
    (k1, k2)
}

/// Builds the stationary curve selling `remaining` over `[t_a, t_b]`,
/// verifying that it stays on the valid demand branch throughout.
pub fn closed_form_policy(
    tv: &TimeValueSpec,
    params: &LinearDemandParams,
    remaining: f64,
    t_a: f64,
    t_b: f64,
) -> Result<PriceCurve, PricingError> {
    let multiplier = closed_form_multiplier(tv, params, remaining, t_a, t_b);
    let curve = PriceCurve::Stationary {
        choke: params.choke_price(),
        multiplier,
    };
    check_branch(tv, params, &curve, t_a, t_b)?;
    Ok(curve)
}

/// Samples the curve over `[t_a, t_b]` and fails on the first price outside
/// the valid demand branch.
fn check_branch(
    tv: &TimeValueSpec,
    params: &LinearDemandParams,
    curve: &PriceCurve,
    t_a: f64,
    t_b: f64,
) -> Result<(), PricingError> {
    const SAMPLES: usize = 64;
    let (lo, hi) = params.valid_branch();
    let tol = 1e-9 * (hi - lo).max(1.0);
    for i in 0..=SAMPLES {
        let t = t_a + (t_b - t_a) * (i as f64) / (SAMPLES as f64);
        let price = curve_price(curve, tv, t);
        if price < lo - tol || price > hi + tol {
            return Err(PricingError::BranchViolation {
                time: t,
                price,
                lo,
                hi,
            });
        }
    }
    Ok(())
}

fn curve_price(curve: &PriceCurve, tv: &TimeValueSpec, t: f64) -> f64 {
    match curve {
        PriceCurve::Constant(p) => *p,
        PriceCurve::Stationary { choke, multiplier } => {
            0.5 * (choke - multiplier / tv.zeta(t))
        }
    }
}

/// Largest normalized stationarity residual of a curve over `[t_a, t_b]`,
/// sampled on a uniform grid.
///
/// For the stationary shape the residual is zero by construction; for a
/// constant price it measures how far the weight drifts from flat. Either
/// way a value near zero certifies that no profitable local price
/// perturbation exists on the unclamped branch.
pub fn verify_stationarity(
    tv: &TimeValueSpec,
    params: &LinearDemandParams,
    curve: &PriceCurve,
    t_a: f64,
    t_b: f64,
    samples: usize,
) -> f64 {
    let big_a = params.scale * params.intercept;
    let big_b = params.scale * params.slope;
    let q_ref = match curve {
        PriceCurve::Stationary { multiplier, .. } => *multiplier,
        PriceCurve::Constant(p) => {
            // The multiplier a constant price implies at the window start.
            tv.zeta(t_a) * (big_a - 2.0 * big_b * p) / big_b
        }
    };
    let norm = (tv.zeta(t_a) * big_a).abs().max(1.0);
    let mut worst = 0.0f64;
    for i in 0..=samples {
        let t = t_a + (t_b - t_a) * (i as f64) / (samples as f64);
        let z = tv.zeta(t);
        let p = curve_price(curve, tv, t);
        // d/dp of weighted revenue plus the sales-pace multiplier, on the
        // unclamped branch: zeta*v + zeta*p*v' + q*v' with v' = -B.
        let residual = z * (big_a - big_b * p) - (z * p + q_ref) * big_b;
        worst = worst.max((residual / norm).abs());
    }
    worst
}

/// Even-paced multipliers for every group from the current state.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenPace {
    pub multipliers: Vec<f64>,
    /// Checkpoint whose sales floor dictates the pace, `None` when the final
    /// total does.
    pub binding: Vec<Option<usize>>,
}

/// Per group, the multiplier of the slowest stationary path meeting every
/// remaining sales floor and the final total.
///
/// A larger multiplier sells more over every window, so the maximum across
/// deadlines satisfies all of them and lands exactly on the tightest.
pub fn even_pace(
    schedule: &ConstraintSchedule,
    models: &[DemandModel],
    tv: &TimeValueSpec,
    state: &StartState,
) -> EvenPace {
    let t = state.time;
    let horizon = schedule.horizon();
    let times = schedule.times();
    let k = schedule.num_groups();
    let mut multipliers = Vec::with_capacity(k);
    let mut binding = Vec::with_capacity(k);
    for i in 0..k {
        let params = models[i].params_at(t);
        let remaining = (schedule.final_sales(i) - state.sold[i]).max(0.0);
        let mut q = closed_form_multiplier(tv, params, remaining, t, horizon);
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
            let q_j = closed_form_multiplier(tv, params, need, t, tau);
            if q_j > q {
                q = q_j;
                bound = Some(j);
            }
        }
        multipliers.push(q);
        binding.push(bound);
    }
    EvenPace {
        multipliers,
        binding,
    }
}

/// Raises multipliers so aggregate weighted revenue reaches the floor at the
/// given checkpoint, splitting the gap with the chosen rule.
///
/// Returns the updated multipliers plus the allocation record, or the inputs
/// unchanged (and no record) when the floor is already covered. Each group's
/// new multiplier is the root of its window-revenue expression on
/// `[current, 0]`, found by bisection.
pub fn recalc_multipliers(
    schedule: &ConstraintSchedule,
    models: &[DemandModel],
    tv: &TimeValueSpec,
    state: &StartState,
    current: &[f64],
    checkpoint: usize,
    method: DistributionMethod,
) -> Result<(Vec<f64>, Option<AllocationRecord>), PricingError> {
    let t = state.time;
    let tau = schedule.times()[checkpoint];
    let floor = schedule
        .revenue_floor(checkpoint)
        .expect("checkpoint carries a revenue floor");
    let k = schedule.num_groups();
    let mut expected = Vec::with_capacity(k);
    let mut max_possible = Vec::with_capacity(k);
    let mut coeffs = Vec::with_capacity(k);
    for i in 0..k {
        let params = models[i].params_at(t);
        let (k1, k2) = revenue_coefficients(tv, params, t, tau);
        expected.push(k1 - k2 * current[i] * current[i]);
        max_possible.push(k1);
        coeffs.push((k1, k2));
    }
    let shortfall = floor - state.total_revenue() - expected.iter().sum::<f64>();
    if shortfall <= 0.0 {
        return Ok((current.to_vec(), None));
    }
    let input = AllocationInput {
        expected: expected.clone(),
        max_possible: max_possible.clone(),
        cumulative: state.revenue.clone(),
        shortfall,
    };
    let alloc = allocate(method, &input)?;

    let mut updated = Vec::with_capacity(k);
    for i in 0..k {
        let target = expected[i] + alloc.shares[i];
        if alloc.shares[i] <= 1e-12 * target.abs().max(1.0) {
            updated.push(current[i]);
            continue;
        }
        let (k1, k2) = coeffs[i];
        if target > k1 * (1.0 + 1e-12) + 1e-9 {
            return Err(PricingError::InfeasibleTarget {
                target,
                max: k1,
                shortfall: target - k1,
            });
        }
        let residual = |q: f64| k1 - k2 * q * q - target.min(k1);
        let q = bisect(&residual, current[i], 0.0, 1e-10).map_err(|_| {
            PricingError::InfeasibleTarget {
                target,
                max: k1,
                shortfall: (target - k1).max(0.0),
            }
        })?;
        updated.push(q);
    }
    let record = AllocationRecord {
        time: t,
        target_time: tau,
        method,
        shortfall,
        weights: alloc.weights,
        shares: alloc.shares,
        equal_split: alloc.equal_split,
    };
    Ok((updated, Some(record)))
}

/// Aggregate weighted revenue over `[state.time, tau]` with the given
/// multipliers held.
fn window_revenue(
    models: &[DemandModel],
    tv: &TimeValueSpec,
    state: &StartState,
    multipliers: &[f64],
    tau: f64,
) -> f64 {
    multipliers
        .iter()
        .enumerate()
        .map(|(i, q)| {
            segment_revenue(tv, models[i].params_at(state.time), *q, state.time, tau)
        })
        .sum()
}

/// Plans from the start of the horizon.
pub fn plan(
    schedule: &ConstraintSchedule,
    models: &[DemandModel],
    tv: &TimeValueSpec,
    method: DistributionMethod,
) -> Result<PlanResult, PricingError> {
    plan_from(
        schedule,
        models,
        tv,
        method,
        StartState::origin(schedule.num_groups()),
    )
}

/// Plans from an arbitrary mid-horizon state.
pub fn plan_from(
    schedule: &ConstraintSchedule,
    models: &[DemandModel],
    tv: &TimeValueSpec,
    method: DistributionMethod,
    start: StartState,
) -> Result<PlanResult, PricingError> {
    validate_inputs(schedule, models, &start)?;
    tv.validate(schedule.horizon())?;
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
        let pace = even_pace(schedule, models, tv, &state);
        let total = state.total_revenue();
        let pending = schedule.pending_revenue_floors(state.time);
        let burdensome: Vec<usize> = pending
            .iter()
            .copied()
            .filter(|&j| {
                let floor = schedule.revenue_floor(j).unwrap();
                total + window_revenue(models, tv, &state, &pace.multipliers, times[j]) < floor
            })
            .collect();

        if !burdensome.is_empty() {
            let mut multipliers = pace.multipliers.clone();
            let mut allocations = Vec::new();
            let mut target: Option<usize> = None;
            let pass_cap = pending.len();
            let mut passes = 0usize;
            loop {
                // First still-unmet floor in checkpoint order. Repairs only
                // ever raise window revenue, so floors stay satisfied once
                // covered and this settles within one pass per floor.
                let unmet = pending.iter().copied().find(|&j| {
                    let floor = schedule.revenue_floor(j).unwrap();
                    let slack = 1e-9 * floor.abs().max(1.0);
                    total + window_revenue(models, tv, &state, &multipliers, times[j])
                        < floor - slack
                });
                let Some(j) = unmet else { break };
                if passes >= pass_cap {
                    return Err(PricingError::NonConvergence { passes });
                }
                let (updated, record) = recalc_multipliers(
                    schedule,
                    models,
                    tv,
                    &state,
                    &multipliers,
                    j,
                    method,
                )
                .map_err(|e| step_error(e, index, None))?;
                multipliers = updated;
                if let Some(rec) = record {
                    allocations.push(rec);
                }
                target = Some(j);
                passes += 1;
            }
            let j_star = target.expect("burdensome floor forces at least one repair");
            let t_end = times[j_star];
            let floor = schedule.revenue_floor(j_star).unwrap();
            let required_rate = (floor - total) / (t_end - state.time);
            let (prices, window_start) = emit_segments(
                &mut segments,
                &mut state,
                models,
                tv,
                &multipliers,
                t_end,
            )
            .map_err(|(g, e)| step_error(e, index, Some(g)))?;
            steps.push(PlanStep {
                index,
                start: window_start,
                end: t_end,
                trigger: StepTrigger::RevenueFloor {
                    checkpoint: j_star,
                    required_rate,
                },
                prices,
                allocations,
            });
            if j_star == last {
                break;
            }
        } else {
            let next_deadline = pace.binding.iter().flatten().copied().min();
            let (t_end, trigger) = match next_deadline {
                Some(j) => (times[j], StepTrigger::SalesDeadline { checkpoint: j }),
                None => (horizon, StepTrigger::Horizon),
            };
            let (prices, window_start) = emit_segments(
                &mut segments,
                &mut state,
                models,
                tv,
                &pace.multipliers,
                t_end,
            )
            .map_err(|(g, e)| step_error(e, index, Some(g)))?;
            let done = matches!(trigger, StepTrigger::Horizon);
            steps.push(PlanStep {
                index,
                start: window_start,
                end: t_end,
                trigger,
                prices,
                allocations: Vec::new(),
            });
            if done {
                break;
            }
        }
    }

    let policy = PricingPolicy::new(horizon, tv.clone(), segments);
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

/// Pushes one stationary segment per group over `[state.time, t_end]`,
/// advancing the state by the closed-form window totals. Returns the prices
/// at the window start and the window start itself.
#[allow(clippy::type_complexity)]
fn emit_segments(
    segments: &mut [Vec<PolicySegment>],
    state: &mut StartState,
    models: &[DemandModel],
    tv: &TimeValueSpec,
    multipliers: &[f64],
    t_end: f64,
) -> Result<(Vec<f64>, f64), (usize, PricingError)> {
    let t_start = state.time;
    let mut prices = Vec::with_capacity(multipliers.len());
    for (i, &q) in multipliers.iter().enumerate() {
        let params = models[i].params_at(t_start);
        let curve = PriceCurve::Stationary {
            choke: params.choke_price(),
            multiplier: q,
        };
        check_branch(tv, params, &curve, t_start, t_end).map_err(|e| (i, e))?;
        prices.push(curve_price(&curve, tv, t_start));
        segments[i].push(PolicySegment {
            start: t_start,
            end: t_end,
            curve,
        });
        state.sold[i] += segment_sales(tv, params, q, t_start, t_end);
        state.revenue[i] += segment_revenue(tv, params, q, t_start, t_end);
    }
    state.time = t_end;
    Ok((prices, t_start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::base;
    use crate::timevalue::TimeFunction;

    fn group_params() -> LinearDemandParams {
        LinearDemandParams::new(300.0, 2.0).with_price_bounds(0.0, 150.0)
    }

    fn single_group(horizon: f64) -> Vec<DemandModel> {
        vec![DemandModel::constant(group_params(), horizon)]
    }

    fn discount(rate: f64) -> TimeValueSpec {
        TimeValueSpec::new(
            TimeFunction::Exponential { rate },
            TimeFunction::Constant(1.0),
        )
    }

    #[test]
    fn flat_weight_gives_constant_even_price() {
        let tv = TimeValueSpec::flat();
        let params = group_params();
        // 1000 units over 10 time units: q = (2000 - 3000) / (2 * 10) = -50.
        let q = closed_form_multiplier(&tv, &params, 1000.0, 0.0, 10.0);
        assert!((q + 50.0).abs() < 1e-12);
        let curve = closed_form_policy(&tv, &params, 1000.0, 0.0, 10.0).unwrap();
        let policy = PricingPolicy::new(
            10.0,
            tv.clone(),
            vec![vec![PolicySegment {
                start: 0.0,
                end: 10.0,
                curve,
            }]],
        );
        for t in [0.0, 3.3, 10.0] {
            assert!((policy.price(0, t) - 100.0).abs() < 1e-12);
        }
    }

    #[test]
    fn discounted_path_fronts_sales_and_hits_the_total() {
        let tv = discount(0.05);
        let params = group_params();
        let q = closed_form_multiplier(&tv, &params, 550.0, 0.0, 10.0);
        let sold = segment_sales(&tv, &params, q, 0.0, 10.0);
        assert!((sold - 550.0).abs() < 1e-9);
        let curve = closed_form_policy(&tv, &params, 550.0, 0.0, 10.0).unwrap();
        let policy = PricingPolicy::new(
            10.0,
            tv.clone(),
            vec![vec![PolicySegment {
                start: 0.0,
                end: 10.0,
                curve,
            }]],
        );
        // Later revenue is worth less, so the price starts low (sell early)
        // and rises.
        assert!(policy.price(0, 0.0) < policy.price(0, 10.0));
        // Trajectory integration agrees with the closed-form window totals.
        let traj = policy.integrate(&single_group(10.0), &[0.0, 10.0]).unwrap();
        assert!((traj.final_sales(0) - 550.0).abs() < 1e-8);
        let want_rev = segment_revenue(&tv, &params, q, 0.0, 10.0);
        assert!((traj.final_aggregate_revenue() - want_rev).abs() < 1e-6);
    }

    #[test]
    fn steep_discount_pushes_curve_off_branch() {
        let tv = discount(0.1);
        let params = group_params();
        let err = closed_form_policy(&tv, &params, 550.0, 0.0, 10.0).unwrap_err();
        match err {
            PricingError::BranchViolation { time, price, hi, .. } => {
                assert!(time > 9.0);
                assert!(price > hi);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn stationary_residual_vanishes_on_closed_form() {
        let tv = discount(0.05);
        let params = group_params();
        let curve = closed_form_policy(&tv, &params, 550.0, 0.0, 10.0).unwrap();
        let r = verify_stationarity(&tv, &params, &curve, 0.0, 10.0, 1000);
        assert!(r < 1e-10, "residual {r}");
    }

    #[test]
    fn stationary_residual_vanishes_for_constant_under_flat_weight() {
        let tv = TimeValueSpec::flat();
        let params = group_params();
        let r = verify_stationarity(
            &tv,
            &params,
            &PriceCurve::Constant(100.0),
            0.0,
            10.0,
            1000,
        );
        assert!(r < 1e-12, "residual {r}");
    }

    #[test]
    fn stationary_residual_flags_constant_under_discounting() {
        let tv = discount(0.1);
        let params = group_params();
        let r = verify_stationarity(
            &tv,
            &params,
            &PriceCurve::Constant(100.0),
            0.0,
            10.0,
            1000,
        );
        assert!(r > 0.01, "residual {r} should be clearly nonzero");
    }

    #[test]
    fn even_pace_tracks_tighter_interior_floor() {
        let schedule = ConstraintSchedule::builder(10.0)
            .interior_times(&[4.0])
            .final_sales(&[550.0])
            .sales_floor(0, 4.0, 250.0)
            .build()
            .unwrap();
        let tv = TimeValueSpec::flat();
        let pace = even_pace(&schedule, &single_group(10.0), &tv, &StartState::origin(1));
        // Flat weight: q over [0,4] for 250 units is (500-1200)/(2*4).
        assert!((pace.multipliers[0] + 87.5).abs() < 1e-12);
        assert_eq!(pace.binding[0], Some(1));
    }

    #[test]
    fn recalc_leaves_covered_floor_alone() {
        let schedule = ConstraintSchedule::builder(10.0)
            .interior_times(&[4.0])
            .final_sales(&[550.0])
            .revenue_floor(4.0, 26950.0) // exactly the even-pace window revenue
            .build()
            .unwrap();
        let tv = TimeValueSpec::flat();
        let models = single_group(10.0);
        let state = StartState::origin(1);
        let pace = even_pace(&schedule, &models, &tv, &state);
        let (updated, record) = recalc_multipliers(
            &schedule,
            &models,
            &tv,
            &state,
            &pace.multipliers,
            1,
            DistributionMethod::Headroom,
        )
        .unwrap();
        assert_eq!(updated, pace.multipliers);
        assert!(record.is_none());
    }

    #[test]
    fn recalc_shrinks_multiplier_to_cover_floor() {
        let schedule = ConstraintSchedule::builder(10.0)
            .interior_times(&[4.0])
            .final_sales(&[550.0])
            .revenue_floor(4.0, 30000.0)
            .build()
            .unwrap();
        let tv = TimeValueSpec::flat();
        let models = single_group(10.0);
        let state = StartState::origin(1);
        let pace = even_pace(&schedule, &models, &tv, &state);
        let (updated, record) = recalc_multipliers(
            &schedule,
            &models,
            &tv,
            &state,
            &pace.multipliers,
            1,
            DistributionMethod::Headroom,
        )
        .unwrap();
        // K1 = 45000, K2 = 2 over [0,4]: q = -sqrt((45000-30000)/2).
        assert!((updated[0] + 7500.0f64.sqrt()).abs() < 1e-6);
        let rec = record.unwrap();
        assert!((rec.shortfall - 3050.0).abs() < 1e-9);
        let achieved = segment_revenue(&tv, models[0].params_at(0.0), updated[0], 0.0, 4.0);
        assert!((achieved - 30000.0).abs() < 1e-6 * 30000.0);
    }

    #[test]
    fn flat_tvm_plan_matches_base_plan() {
        let schedule = ConstraintSchedule::builder(10.0)
            .interior_times(&[4.0])
            .final_sales(&[550.0])
            .revenue_floor(4.0, 30000.0)
            .build()
            .unwrap();
        let models = single_group(10.0);
        let tv = TimeValueSpec::flat();
        let from_base = base::plan(&schedule, &models, DistributionMethod::Headroom).unwrap();
        let from_tvm = plan(&schedule, &models, &tv, DistributionMethod::Headroom).unwrap();
        for t in [0.0, 1.0, 3.9, 4.0, 7.0, 10.0] {
            assert!(
                (from_base.policy.price(0, t) - from_tvm.policy.price(0, t)).abs() < 1e-6,
                "prices diverge at t={t}"
            );
        }
        assert!(
            (from_base.final_revenue() - from_tvm.final_revenue()).abs()
                < 1e-6 * from_base.final_revenue()
        );
    }

    #[test]
    fn plan_repairs_successive_burdensome_floors() {
        let schedule = ConstraintSchedule::builder(10.0)
            .interior_times(&[2.0, 4.0])
            .final_sales(&[550.0])
            .revenue_floor(2.0, 15000.0)
            .revenue_floor(4.0, 29000.0)
            .build()
            .unwrap();
        let models = single_group(10.0);
        let tv = TimeValueSpec::flat();
        let result = plan(&schedule, &models, &tv, DistributionMethod::Headroom).unwrap();
        assert_eq!(result.steps.len(), 3);
        assert!(matches!(
            result.steps[0].trigger,
            StepTrigger::RevenueFloor { checkpoint: 1, .. }
        ));
        assert!(matches!(
            result.steps[1].trigger,
            StepTrigger::RevenueFloor { checkpoint: 2, .. }
        ));
        assert_eq!(result.steps[2].trigger, StepTrigger::Horizon);
        let tol = 1e-6 * 29000.0;
        assert!(result.predicted.aggregate_revenue_at(2.0) >= 15000.0 - tol);
        assert!(result.predicted.aggregate_revenue_at(4.0) >= 29000.0 - tol);
        assert!((result.predicted.final_sales(0) - 550.0).abs() < 1e-8);
        // Breakpoints only at checkpoint times.
        for b in result.policy.group_breakpoints(0) {
            assert!(
                schedule.times().iter().any(|t| (t - b).abs() < 1e-9),
                "breakpoint {b} off the checkpoint grid"
            );
        }
    }

    #[test]
    fn discounted_plan_meets_floor_and_final_total() {
        let schedule = ConstraintSchedule::builder(10.0)
            .interior_times(&[4.0])
            .final_sales(&[550.0])
            .revenue_floor(4.0, 25000.0)
            .build()
            .unwrap();
        let models = single_group(10.0);
        let tv = discount(0.05);
        let result = plan(&schedule, &models, &tv, DistributionMethod::Headroom).unwrap();
        assert!(result.predicted.aggregate_revenue_at(4.0) >= 25000.0 - 0.025);
        assert!((result.predicted.final_sales(0) - 550.0).abs() < 1e-7);
    }

    #[test]
    fn uplift_raises_posted_prices_over_time() {
        let schedule = ConstraintSchedule::builder(10.0)
            .final_sales(&[550.0])
            .build()
            .unwrap();
        let models = single_group(10.0);
        let tv = TimeValueSpec::new(
            TimeFunction::Constant(1.0),
            TimeFunction::Exponential { rate: -0.03 },
        );
        let result = plan(&schedule, &models, &tv, DistributionMethod::Headroom).unwrap();
        // Normalized price drifts down while the posted price climbs.
        assert!(result.policy.price(0, 10.0) < result.policy.price(0, 0.0));
        assert!(result.policy.posted_price(0, 10.0) > result.policy.posted_price(0, 0.0));
        assert!((result.predicted.final_sales(0) - 550.0).abs() < 1e-8);
    }

    #[test]
    fn plan_from_resumes_mid_horizon() {
        let schedule = ConstraintSchedule::builder(10.0)
            .final_sales(&[550.0])
            .build()
            .unwrap();
        let models = single_group(10.0);
        let tv = discount(0.02);
        let start = StartState {
            time: 3.0,
            sold: vec![200.0],
            revenue: vec![25000.0],
        };
        let result = plan_from(
            &schedule,
            &models,
            &tv,
            DistributionMethod::Headroom,
            start,
        )
        .unwrap();
        assert!((result.predicted.final_sales(0) - 550.0).abs() < 1e-8);
        assert!(result.policy.start_time() >= 3.0 - 1e-12);
    }
}
