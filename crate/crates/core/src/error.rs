use thiserror::Error;

use crate::constraints::{FeasibilityViolation, ScheduleViolation};

/// Errors surfaced by demand queries, planners, the oracle, and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error("time {t} lies outside the sales horizon [0, {horizon}]")]
    TimeOutsideHorizon { t: f64, horizon: f64 },

    #[error("sales rate {rate} is unattainable; maximum achievable rate is {max_rate}")]
    InfeasibleRate { rate: f64, max_rate: f64 },

    #[error(
        "revenue target {target} exceeds the achievable maximum {max} (shortfall {shortfall})"
    )]
    InfeasibleTarget {
        target: f64,
        max: f64,
        shortfall: f64,
    },

    #[error(
        "group {group}: rate {required_rate} required by the sales floor at t={floor_time} \
         exceeds the maximum attainable rate {max_rate}"
    )]
    InfeasibleScenario {
        group: usize,
        floor_time: f64,
        required_rate: f64,
        max_rate: f64,
    },

    #[error(
        "price curve leaves its valid branch at t={time}: price {price} outside [{lo}, {hi}]"
    )]
    BranchViolation {
        time: f64,
        price: f64,
        lo: f64,
        hi: f64,
    },

    #[error("constant recalculation did not settle after {passes} passes")]
    NonConvergence { passes: usize },

    #[error("planning step {step}{}: {source}", fmt_group(.group))]
    AtStep {
        step: usize,
        group: Option<usize>,
        source: Box<PricingError>,
    },

    #[error("planned trajectory violates the schedule: {violation}")]
    PlanInfeasible { violation: FeasibilityViolation },

    #[error("enumeration needs {required} policy evaluations, budget allows {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("no feasible policy on the price grid")]
    NoFeasiblePolicy,

    #[error("invalid schedule: {}", fmt_violations(.0))]
    InvalidSchedule(Vec<ScheduleViolation>),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

impl PricingError {
    /// Wraps an error with the planning step that produced it.
    pub fn at_step(self, step: usize, group: Option<usize>) -> Self {
        PricingError::AtStep {
            step,
            group,
            source: Box::new(self),
        }
    }

    /// Strips step wrappers and returns the underlying cause.
    pub fn root_cause(&self) -> &PricingError {
        match self {
            PricingError::AtStep { source, .. } => source.root_cause(),
            other => other,
        }
    }
}

fn fmt_group(group: &Option<usize>) -> String {
    match group {
        Some(g) => format!(" (group {g})"),
        None => String::new(),
    }
}

fn fmt_violations(violations: &[ScheduleViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
