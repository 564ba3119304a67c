//! Constrained dynamic pricing for multiple product groups over a finite
//! sales horizon.
//!
//! The engine plans per-group price paths that maximize revenue subject to a
//! schedule of commitments: minimum cumulative sales per group at interior
//! checkpoints, an exact sales total per group at the end of the horizon, and
//! aggregate revenue floors at checkpoints. Demand is piecewise-stationary
//! clipped-linear per group, and revenue may be weighted by a discount and a
//! posted-price uplift.
//!
//! The main pieces:
//!
//! * [`demand`] — the demand law, its inverses, and revenue-rate solvers;
//! * [`constraints`] — commitment schedules, trajectories, feasibility checks;
//! * [`policy`] — price policies and exact trajectory integration;
//! * [`distribution`] — rules for splitting a revenue shortfall across groups;
//! * [`planner`] — the constant-price and time-value planners;
//! * [`oracle`] — brute-force grid search used to bound planner optimality;
//! * [`simulator`] — forward execution with demand-change events and
//!   replanning.

pub mod constraints;
pub mod demand;
pub mod distribution;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod planner;
pub mod policy;
pub mod simulator;
pub mod timevalue;

pub use constraints::{
    check_feasibility_against, constraint_report, ConstraintKind, ConstraintSchedule,
    ConstraintStatus, FeasibilityViolation, GroupConstraints, ScheduleBuilder,
    ScheduleViolation, Trajectory,
};
pub use demand::{DemandModel, LinearDemandParams, Rate};
pub use distribution::{
    allocate, allocate_headroom, allocate_revenue_share, Allocation, AllocationInput,
    DistributionMethod,
};
pub use error::PricingError;
pub use oracle::{GridSpec, OracleBest};
pub use planner::{AllocationRecord, PlanResult, PlanStep, StartState, StepTrigger};
pub use policy::{build_grid, PolicySegment, PriceCurve, PricingPolicy};
pub use simulator::{
    CompareResult, DemandChangeEvent, DistributionRow, GroupSpec, PlannerKind,
    ReplanRecord, ReplanTrigger, Scenario, SimulationResult, SimulationStatus,
};
pub use timevalue::{TimeFunction, TimeValueSpec};
