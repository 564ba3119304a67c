//! Planning algorithms that turn a constraint schedule into a price policy.
//!
//! Both planners share the same skeleton. Starting from the current state
//! they compute the cheapest prices that absorb each group's remaining sales
//! commitments evenly over the time left. If aggregate revenue under those
//! prices would undershoot an upcoming revenue floor, the gap is split across
//! groups (see [`crate::distribution`]) and prices are raised to close it
//! over the window ending at the floor's checkpoint. The plan then advances
//! to that checkpoint and repeats. Price changes therefore only ever occur at
//! checkpoints whose constraint binds.
//!
//! [`base`] prices with plain revenue; [`tvm`] weights revenue by the
//! discount/uplift pair and emits smooth price curves instead of constants.

pub mod base;
pub mod tvm;

use crate::constraints::{ConstraintSchedule, Trajectory};
use crate::demand::DemandModel;
use crate::distribution::DistributionMethod;
use crate::error::PricingError;
use crate::policy::PricingPolicy;

/// Where a plan starts: the current time plus cumulative sales and weighted
/// revenue per group. A fresh plan starts at [`StartState::origin`].
#[derive(Debug, Clone, PartialEq)]
pub struct StartState {
    pub time: f64,
    pub sold: Vec<f64>,
    pub revenue: Vec<f64>,
}

impl StartState {
    pub fn origin(num_groups: usize) -> Self {
        StartState {
            time: 0.0,
            sold: vec![0.0; num_groups],
            revenue: vec![0.0; num_groups],
        }
    }

    pub fn total_revenue(&self) -> f64 {
        self.revenue.iter().sum()
    }

    fn validate(&self, num_groups: usize, horizon: f64) -> Result<(), PricingError> {
        if self.sold.len() != num_groups || self.revenue.len() != num_groups {
            return Err(PricingError::InvalidScenario(format!(
                "start state covers {} groups, schedule has {num_groups}",
                self.sold.len()
            )));
        }
        if !(self.time >= 0.0 && self.time < horizon) {
            return Err(PricingError::InvalidScenario(format!(
                "start time {} must lie in [0, {horizon})",
                self.time
            )));
        }
        for v in self.sold.iter().chain(&self.revenue) {
            if !v.is_finite() || *v < 0.0 {
                return Err(PricingError::InvalidScenario(
                    "start state totals must be finite and non-negative".to_string(),
                ));
            }
        }
        Ok(())
    }
}

/// Why a planning window ended where it did.
#[derive(Debug, Clone, PartialEq)]
pub enum StepTrigger {
    /// No constraint bound before the end; prices held to the horizon.
    Horizon,
    /// A group's sales floor at this checkpoint forced the pace.
    SalesDeadline { checkpoint: usize },
    /// The revenue floor at this checkpoint was burdensome; prices were
    /// raised to hit it at the stated aggregate revenue rate.
    RevenueFloor {
        checkpoint: usize,
        required_rate: f64,
    },
}

/// One invocation of the shortfall split, kept for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationRecord {
    /// Time the split was decided (start of the planning window).
    pub time: f64,
    /// Checkpoint time of the floor being repaired.
    pub target_time: f64,
    pub method: DistributionMethod,
    pub shortfall: f64,
    pub weights: Vec<f64>,
    pub shares: Vec<f64>,
    pub equal_split: bool,
}

/// One planning window in the emitted policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanStep {
    pub index: usize,
    pub start: f64,
    pub end: f64,
    pub trigger: StepTrigger,
    /// Normalized price per group at the window's start.
    pub prices: Vec<f64>,
    /// Shortfall splits decided for this window (empty when no floor bound).
    pub allocations: Vec<AllocationRecord>,
}

/// A finished plan: the policy, its predicted trajectory, and the per-window
/// diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub policy: PricingPolicy,
    pub predicted: Trajectory,
    pub steps: Vec<PlanStep>,
}

impl PlanResult {
    /// Predicted aggregate weighted revenue at the horizon.
    pub fn final_revenue(&self) -> f64 {
        self.predicted.final_aggregate_revenue()
    }

    /// All allocation records across steps, in planning order.
    pub fn allocations(&self) -> Vec<&AllocationRecord> {
        self.steps.iter().flat_map(|s| s.allocations.iter()).collect()
    }
}

fn validate_inputs(
    schedule: &ConstraintSchedule,
    models: &[DemandModel],
    start: &StartState,
) -> Result<(), PricingError> {
    schedule.ensure_valid()?;
    let k = schedule.num_groups();
    if models.len() != k {
        return Err(PricingError::InvalidScenario(format!(
            "schedule has {k} groups but {} demand models were given",
            models.len()
        )));
    }
    let horizon = schedule.horizon();
    for model in models {
        model.validate()?;
        if (model.horizon() - horizon).abs() > 1e-9 * horizon.max(1.0) {
            return Err(PricingError::InvalidScenario(format!(
                "demand model horizon {} does not match schedule horizon {horizon}",
                model.horizon()
            )));
        }
    }
    start.validate(k, horizon)
}

/// Wraps an error with its planning step, lifting the offending group out of
/// the cause when it names one.
fn step_error(e: PricingError, step: usize, group: Option<usize>) -> PricingError {
    let group = group.or(match e.root_cause() {
        PricingError::InfeasibleScenario { group, .. } => Some(*group),
        _ => None,
    });
    e.at_step(step, group)
}

/// Grid used for a plan's predicted trajectory: every checkpoint from the
/// start time on, plus demand change points.
fn prediction_grid(
    schedule: &ConstraintSchedule,
    models: &[DemandModel],
    start_time: f64,
) -> Vec<f64> {
    let horizon = schedule.horizon();
    let mut grid: Vec<f64> = vec![start_time, horizon];
    grid.extend(
        schedule
            .times()
            .iter()
            .copied()
            .filter(|t| *t > start_time),
    );
    for model in models {
        grid.extend(
            model
                .change_times()
                .into_iter()
                .filter(|t| *t > start_time && *t < horizon),
        );
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * horizon.max(1.0));
    grid
}
