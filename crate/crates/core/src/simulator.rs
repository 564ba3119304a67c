//! Scenario runner: plans, executes, and replans around demand changes.
//!
//! A [`Scenario`] bundles everything a run needs — demand per group, the
//! commitment schedule, time weighting, planner choice, and a list of demand
//! change events. [`run`] plans at the start, executes the plan until the
//! first event, recomputes the realized state under the revised demand law,
//! replans from there, and repeats. The output keeps the executed policy, the
//! realized trajectory, one [`ReplanRecord`] per planner invocation, and a
//! constraint report.
//!
//! Planning failures mid-run are not hard errors: the result carries
//! [`SimulationStatus::InfeasibleAt`] along with everything executed up to
//! that point, so callers can inspect how far the run got.

use crate::constraints::{
    constraint_report, ConstraintSchedule, ConstraintStatus, Trajectory,
};
use crate::demand::{DemandModel, LinearDemandParams};
use crate::distribution::DistributionMethod;
use crate::error::PricingError;
use crate::planner::{base, tvm, PlanResult, PlanStep, StartState};
use crate::policy::{build_grid, PolicySegment, PricingPolicy};
use crate::timevalue::TimeValueSpec;

/// Which planning algorithm a scenario runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlannerKind {
    /// Unweighted revenue; requires a flat time-value specification.
    Base,
    /// Time-weighted revenue with stationary price curves.
    TimeValue,
}

/// One product group's demand law and the price posted before the first plan.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    pub params: LinearDemandParams,
    /// Price in force at the start, reported as the "old" price of the
    /// initial replan record.
    pub initial_price: f64,
}

/// A revision of one group's demand law taking effect at `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandChangeEvent {
    pub time: f64,
    pub group: usize,
    pub params: LinearDemandParams,
}

/// Full description of a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub horizon: f64,
    pub groups: Vec<GroupSpec>,
    pub schedule: ConstraintSchedule,
    pub timevalue: TimeValueSpec,
    /// Demand revisions, strictly increasing in time, strictly inside the
    /// horizon.
    pub events: Vec<DemandChangeEvent>,
    pub planner: PlannerKind,
    pub distribution: DistributionMethod,
    /// Spacing of the reporting grid; defaults to `horizon / 1000`.
    pub output_grid_step: Option<f64>,
}

impl Scenario {
    pub fn grid_step(&self) -> f64 {
        self.output_grid_step.unwrap_or(self.horizon / 1000.0)
    }

    pub fn validate(&self) -> Result<(), PricingError> {
        let bad = |msg: String| Err(PricingError::InvalidScenario(msg));
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.groups.is_empty() {
            return bad("at least one product group is required".to_string());
        }
        self.schedule.ensure_valid()?;
        if (self.schedule.horizon() - self.horizon).abs()
            > 1e-9 * self.horizon.abs().max(1.0)
        {
            return bad(format!(
                "schedule ends at {} but the horizon is {}",
                self.schedule.horizon(),
                self.horizon
            ));
        }
        if self.schedule.num_groups() != self.groups.len() {
            return bad(format!(
                "schedule covers {} groups but {} are configured",
                self.schedule.num_groups(),
                self.groups.len()
            ));
        }
        for (i, g) in self.groups.iter().enumerate() {
            g.params
                .validate()
                .map_err(|m| PricingError::InvalidScenario(format!("group {i}: {m}")))?;
            if !(g.initial_price.is_finite()
                && g.initial_price >= g.params.price_min
                && g.initial_price <= g.params.price_max)
            {
                return bad(format!(
                    "group {i}: initial price {} outside [{}, {}]",
                    g.initial_price, g.params.price_min, g.params.price_max
                ));
            }
        }
        self.timevalue.validate(self.horizon)?;
        if self.planner == PlannerKind::Base && !self.timevalue.is_flat() {
            return bad(
                "the base planner ignores time weighting; use the time-value \
                 planner or a flat specification"
                    .to_string(),
            );
        }
        let mut prev = 0.0;
        for (idx, ev) in self.events.iter().enumerate() {
            if !(ev.time.is_finite() && ev.time > 0.0 && ev.time < self.horizon) {
                return bad(format!(
                    "event {idx}: time {} must lie strictly inside (0, {})",
                    ev.time, self.horizon
                ));
            }
            if ev.time <= prev {
                return bad(format!(
                    "event {idx}: times must be strictly increasing"
                ));
            }
            prev = ev.time;
            if ev.group >= self.groups.len() {
                return bad(format!(
                    "event {idx}: group {} does not exist",
                    ev.group
                ));
            }
            ev.params
                .validate()
                .map_err(|m| PricingError::InvalidScenario(format!("event {idx}: {m}")))?;
        }
        if let Some(step) = self.output_grid_step {
            if !(step.is_finite() && step > 0.0) {
                return bad(format!("output grid step must be positive, got {step}"));
            }
        }
        Ok(())
    }
}

/// Why the planner ran.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplanTrigger {
    Initial,
    DemandChange { group: usize },
}

/// One planner invocation: when, why, and how prices moved.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplanRecord {
    pub time: f64,
    pub trigger: ReplanTrigger,
    /// Per-group normalized prices in force just before this plan.
    pub old_prices: Vec<f64>,
    /// Per-group normalized prices the new plan opens with.
    pub new_prices: Vec<f64>,
    /// Planner diagnostics for this invocation.
    pub steps: Vec<PlanStep>,
}

/// Terminal state of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum SimulationStatus {
    Completed,
    /// Replanning at `time` failed; fields before that time are still filled.
    InfeasibleAt { time: f64, error: PricingError },
}

/// Everything a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub status: SimulationStatus,
    /// Policy actually executed (clipped at the failure time on infeasible
    /// runs; absent when the initial plan already failed).
    pub policy: Option<PricingPolicy>,
    /// Realized sales and revenue on the reporting grid.
    pub trajectory: Option<Trajectory>,
    pub replans: Vec<ReplanRecord>,
    /// Aggregate weighted revenue at the end of the executed span.
    pub final_revenue: Option<f64>,
    /// Commitment-by-commitment outcome, empty when nothing was executed.
    pub report: Vec<ConstraintStatus>,
}

impl SimulationResult {
    pub fn is_complete(&self) -> bool {
        self.status == SimulationStatus::Completed
    }
}

/// Results of running the same scenario under both distribution methods.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareResult {
    pub headroom: SimulationResult,
    pub revshare: SimulationResult,
}

impl CompareResult {
    /// Headroom revenue minus revenue-share revenue, when both runs finished.
    pub fn delta(&self) -> Option<f64> {
        match (self.headroom.final_revenue, self.revshare.final_revenue) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        }
    }

    /// [`Self::delta`] as a percentage of the revenue-share result.
    pub fn delta_pct(&self) -> Option<f64> {
        let d = self.delta()?;
        let base = self.revshare.final_revenue?;
        if base.abs() <= f64::EPSILON {
            return None;
        }
        Some(100.0 * d / base)
    }
}

/// One distribution decision, flattened for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionRow {
    /// When the surrounding plan was computed.
    pub plan_time: f64,
    /// When the repaired window starts.
    pub decision_time: f64,
    /// Checkpoint the repair targets.
    pub target_time: f64,
    pub method: DistributionMethod,
    pub shortfall: f64,
    pub group: usize,
    pub weight: f64,
    pub share: f64,
    pub equal_split: bool,
}

/// Flattens every allocation made across a run, one row per group.
pub fn distribution_report(result: &SimulationResult) -> Vec<DistributionRow> {
    let mut rows = Vec::new();
    for replan in &result.replans {
        for step in &replan.steps {
            for alloc in &step.allocations {
                for (group, (&weight, &share)) in
                    alloc.weights.iter().zip(&alloc.shares).enumerate()
                {
                    rows.push(DistributionRow {
                        plan_time: replan.time,
                        decision_time: alloc.time,
                        target_time: alloc.target_time,
                        method: alloc.method,
                        shortfall: alloc.shortfall,
                        group,
                        weight,
                        share,
                        equal_split: alloc.equal_split,
                    });
                }
            }
        }
    }
    rows
}

/// Runs the scenario. `Err` means the scenario itself is malformed; planning
/// failures surface through [`SimulationStatus`] instead.
pub fn run(scenario: &Scenario) -> Result<SimulationResult, PricingError> {
    scenario.validate()?;
    let k = scenario.groups.len();
    let horizon = scenario.horizon;
    let schedule = &scenario.schedule;
    let policy_tv = match scenario.planner {
        PlannerKind::Base => TimeValueSpec::flat(),
        PlannerKind::TimeValue => scenario.timevalue.clone(),
    };

    let mut models: Vec<DemandModel> = scenario
        .groups
        .iter()
        .map(|g| DemandModel::constant(g.params, horizon))
        .collect();
    let mut executed: Vec<Vec<PolicySegment>> = vec![Vec::new(); k];
    let mut replans: Vec<ReplanRecord> = Vec::new();

    let initial_prices: Vec<f64> =
        scenario.groups.iter().map(|g| g.initial_price).collect();
    let mut current = match plan_with(scenario, &models, StartState::origin(k)) {
        Ok(r) => r,
        Err(error) => {
            return Ok(SimulationResult {
                status: SimulationStatus::InfeasibleAt { time: 0.0, error },
                policy: None,
                trajectory: None,
                replans,
                final_revenue: None,
                report: Vec::new(),
            });
        }
    };
    replans.push(ReplanRecord {
        time: 0.0,
        trigger: ReplanTrigger::Initial,
        old_prices: initial_prices,
        new_prices: prices_at(&current.policy, k, 0.0),
        steps: current.steps.clone(),
    });

    let mut cursor = 0.0;
    for ev in &scenario.events {
        clip_append(&mut executed, &current.policy, cursor, ev.time);
        let old_prices = prices_at(&current.policy, k, ev.time);
        models[ev.group] = models[ev.group].clone().with_change(ev.time, ev.params);

        // Realized state at the event: everything executed so far, measured
        // under the demand laws as revised up to and including this event
        // (revisions only affect later times, so history is unchanged).
        let partial =
            PricingPolicy::new(horizon, policy_tv.clone(), executed.clone());
        let state = realized_state(&partial, &models, schedule, ev.time)?;
        match plan_with(scenario, &models, state) {
            Ok(r) => {
                replans.push(ReplanRecord {
                    time: ev.time,
                    trigger: ReplanTrigger::DemandChange { group: ev.group },
                    old_prices,
                    new_prices: prices_at(&r.policy, k, ev.time),
                    steps: r.steps.clone(),
                });
                current = r;
            }
            Err(error) => {
                return finish(
                    scenario,
                    &models,
                    executed,
                    replans,
                    SimulationStatus::InfeasibleAt {
                        time: ev.time,
                        error,
                    },
                    ev.time,
                );
            }
        }
        cursor = ev.time;
    }
    clip_append(&mut executed, &current.policy, cursor, horizon);
    finish(
        scenario,
        &models,
        executed,
        replans,
        SimulationStatus::Completed,
        horizon,
    )
}

/// Runs the scenario under both distribution methods.
pub fn compare(scenario: &Scenario) -> Result<CompareResult, PricingError> {
    let mut with_headroom = scenario.clone();
    with_headroom.distribution = DistributionMethod::Headroom;
    let mut with_revshare = scenario.clone();
    with_revshare.distribution = DistributionMethod::RevenueShare;
    Ok(CompareResult {
        headroom: run(&with_headroom)?,
        revshare: run(&with_revshare)?,
    })
}

fn plan_with(
    scenario: &Scenario,
    models: &[DemandModel],
    start: StartState,
) -> Result<PlanResult, PricingError> {
    match scenario.planner {
        PlannerKind::Base => {
            base::plan_from(&scenario.schedule, models, scenario.distribution, start)
        }
        PlannerKind::TimeValue => tvm::plan_from(
            &scenario.schedule,
            models,
            &scenario.timevalue,
            scenario.distribution,
            start,
        ),
    }
}

fn prices_at(policy: &PricingPolicy, k: usize, t: f64) -> Vec<f64> {
    (0..k).map(|g| policy.price(g, t)).collect()
}

/// Copies the part of `policy` lying in `[from, to)` onto the executed tape.
fn clip_append(
    executed: &mut [Vec<PolicySegment>],
    policy: &PricingPolicy,
    from: f64,
    to: f64,
) {
    let eps = 1e-12 * to.abs().max(1.0);
    for (group, tape) in executed.iter_mut().enumerate() {
        for seg in policy.segments(group) {
            let start = seg.start.max(from);
            let end = seg.end.min(to);
            if end - start > eps {
                tape.push(PolicySegment {
                    start,
                    end,
                    curve: seg.curve.clone(),
                });
            }
        }
    }
}

/// Integrates the executed prefix against the (revised) demand laws to find
/// cumulative sales and weighted revenue at `t`.
fn realized_state(
    partial: &PricingPolicy,
    models: &[DemandModel],
    schedule: &ConstraintSchedule,
    t: f64,
) -> Result<StartState, PricingError> {
    let mut grid: Vec<f64> = vec![0.0, t];
    grid.extend(schedule.times().iter().copied().filter(|&x| x < t));
    for (g, m) in models.iter().enumerate() {
        grid.extend(m.change_times().into_iter().filter(|&x| x < t));
        grid.extend(partial.group_breakpoints(g).into_iter().filter(|&x| x < t));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * t.abs().max(1.0));
    let traj = partial.integrate(models, &grid)?;
    Ok(StartState {
        time: t,
        sold: (0..models.len()).map(|g| traj.sales_at(g, t)).collect(),
        revenue: (0..models.len()).map(|g| traj.revenue_at(g, t)).collect(),
    })
}

/// Builds the reporting trajectory over `[0, end]` and assembles the result.
fn finish(
    scenario: &Scenario,
    models: &[DemandModel],
    executed: Vec<Vec<PolicySegment>>,
    replans: Vec<ReplanRecord>,
    status: SimulationStatus,
    end: f64,
) -> Result<SimulationResult, PricingError> {
    let policy_tv = match scenario.planner {
        PlannerKind::Base => TimeValueSpec::flat(),
        PlannerKind::TimeValue => scenario.timevalue.clone(),
    };
    if executed.iter().all(|tape| tape.is_empty()) {
        return Ok(SimulationResult {
            status,
            policy: None,
            trajectory: None,
            replans,
            final_revenue: None,
            report: Vec::new(),
        });
    }
    let policy = PricingPolicy::new(scenario.horizon, policy_tv, executed);
    let mut extra: Vec<f64> = scenario
        .schedule
        .times()
        .iter()
        .copied()
        .filter(|&t| t <= end)
        .collect();
    extra.extend(scenario.events.iter().map(|e| e.time).filter(|&t| t <= end));
    extra.extend(policy.breakpoints().into_iter().filter(|&t| t <= end));
    let grid: Vec<f64> = build_grid(end, scenario.grid_step(), &extra);
    let trajectory = policy.integrate(models, &grid)?;
    let final_revenue = trajectory.final_aggregate_revenue();
    let report = constraint_report(
        &scenario.schedule,
        &trajectory,
        scenario.schedule.default_tolerance(),
    );
    Ok(SimulationResult {
        status,
        policy: Some(policy),
        trajectory: Some(trajectory),
        replans,
        final_revenue: Some(final_revenue),
        report,
    })
}
