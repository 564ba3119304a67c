//! Sales and revenue commitments over the horizon, and the trajectories they
//! are checked against.
//!
//! A schedule fixes a grid of checkpoint times `0 = τ_0 < … < τ_l = T`. Each
//! group may carry minimum-cumulative-sales floors at interior checkpoints and
//! must land exactly on its final sales total at `T`. Aggregate revenue floors
//! may sit at any checkpoint after the first.

use std::fmt;

use crate::error::PricingError;

/// One group's commitments on the checkpoint grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupConstraints {
    /// Minimum cumulative sales per checkpoint, aligned with the schedule's
    /// times. Entries at the first and last checkpoint must stay `None`.
    pub sales_floors: Vec<Option<f64>>,
    /// Exact cumulative sales required at the end of the horizon.
    pub final_sales: f64,
}

impl GroupConstraints {
    pub fn unconstrained(num_times: usize, final_sales: f64) -> Self {
        GroupConstraints {
            sales_floors: vec![None; num_times],
            final_sales,
        }
    }
}

/// Checkpoint times plus the commitments attached to them.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSchedule {
    times: Vec<f64>,
    groups: Vec<GroupConstraints>,
    /// Aggregate revenue floors aligned with `times`; entry 0 must stay `None`.
    revenue_floors: Vec<Option<f64>>,
}

/// A single invariant breach found by [`ConstraintSchedule::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleViolation {
    TooFewTimes { count: usize },
    FirstTimeNotZero { value: f64 },
    TimeNotFinite { index: usize },
    TimesNotIncreasing { index: usize },
    MisalignedFloors { group: Option<usize>, expected: usize, actual: usize },
    NegativeFloor { group: Option<usize>, index: usize, value: f64 },
    FloorAtBoundary { group: usize, index: usize },
    RevenueFloorAtStart,
    SalesFloorsDecreasing { group: usize, index: usize },
    FloorAboveFinal { group: usize, index: usize, floor: f64, final_sales: f64 },
    BadFinalSales { group: usize, value: f64 },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScheduleViolation::*;
        match self {
            TooFewTimes { count } => {
                write!(f, "need at least start and end times, got {count}")
            }
            FirstTimeNotZero { value } => write!(f, "first checkpoint must be 0, got {value}"),
            TimeNotFinite { index } => write!(f, "times[{index}] is not finite"),
            TimesNotIncreasing { index } => {
                write!(f, "times[{index}] does not increase over times[{}]", index - 1)
            }
            MisalignedFloors { group, expected, actual } => match group {
                Some(g) => write!(
                    f,
                    "group {g}: sales_floors has {actual} entries, expected {expected}"
                ),
                None => write!(
                    f,
                    "revenue_floors has {actual} entries, expected {expected}"
                ),
            },
            NegativeFloor { group, index, value } => match group {
                Some(g) => write!(f, "group {g}: sales floor at index {index} is negative ({value})"),
                None => write!(f, "revenue floor at index {index} is negative ({value})"),
            },
            FloorAtBoundary { group, index } => write!(
                f,
                "group {group}: sales floor at boundary checkpoint {index} (use final_sales for the end)"
            ),
            RevenueFloorAtStart => write!(f, "revenue floor attached to time 0"),
            SalesFloorsDecreasing { group, index } => write!(
                f,
                "group {group}: sales floor at index {index} drops below an earlier floor"
            ),
            FloorAboveFinal { group, index, floor, final_sales } => write!(
                f,
                "group {group}: floor {floor} at index {index} exceeds final sales {final_sales}"
            ),
            BadFinalSales { group, value } => {
                write!(f, "group {group}: final sales must be positive and finite, got {value}")
            }
        }
    }
}

impl ConstraintSchedule {
    /// Assembles a schedule without checking invariants; pair with
    /// [`validate`](Self::validate).
    pub fn from_parts(
        times: Vec<f64>,
        groups: Vec<GroupConstraints>,
        revenue_floors: Vec<Option<f64>>,
    ) -> Self {
        ConstraintSchedule {
            times,
            groups,
            revenue_floors,
        }
    }

    pub fn builder(horizon: f64) -> ScheduleBuilder {
        ScheduleBuilder::new(horizon)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("schedule has at least two times")
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn num_checkpoints(&self) -> usize {
        self.times.len()
    }

    pub fn group(&self, i: usize) -> &GroupConstraints {
        &self.groups[i]
    }

    pub fn final_sales(&self, group: usize) -> f64 {
        self.groups[group].final_sales
    }

    pub fn sales_floor(&self, group: usize, checkpoint: usize) -> Option<f64> {
        self.groups[group].sales_floors.get(checkpoint).copied().flatten()
    }

    pub fn revenue_floor(&self, checkpoint: usize) -> Option<f64> {
        self.revenue_floors.get(checkpoint).copied().flatten()
    }

    /// Indices of checkpoints carrying a revenue floor strictly after `t`.
    pub fn pending_revenue_floors(&self, t: f64) -> Vec<usize> {
        (0..self.times.len())
            .filter(|&j| self.times[j] > t && self.revenue_floors[j].is_some())
            .collect()
    }

    /// Reports every invariant breach; an empty list means the schedule is
    /// well formed.
    pub fn validate(&self) -> Vec<ScheduleViolation> {
        use ScheduleViolation::*;
        let mut out = Vec::new();
        let n = self.times.len();
        if n < 2 {
            out.push(TooFewTimes { count: n });
        }
        if let Some(first) = self.times.first() {
            if *first != 0.0 {
                out.push(FirstTimeNotZero { value: *first });
            }
        }
        for (i, t) in self.times.iter().enumerate() {
            if !t.is_finite() {
                out.push(TimeNotFinite { index: i });
            }
        }
        for i in 1..n {
            if !(self.times[i] > self.times[i - 1]) {
                out.push(TimesNotIncreasing { index: i });
            }
        }
        if self.revenue_floors.len() != n {
            out.push(MisalignedFloors {
                group: None,
                expected: n,
                actual: self.revenue_floors.len(),
            });
        } else {
            if self.revenue_floors[0].is_some() {
                out.push(RevenueFloorAtStart);
            }
            for (j, floor) in self.revenue_floors.iter().enumerate() {
                if let Some(v) = floor {
                    if !(*v >= 0.0) {
                        out.push(NegativeFloor {
                            group: None,
                            index: j,
                            value: *v,
                        });
                    }
                }
            }
        }
        for (g, gc) in self.groups.iter().enumerate() {
            if !(gc.final_sales.is_finite() && gc.final_sales > 0.0) {
                out.push(BadFinalSales {
                    group: g,
                    value: gc.final_sales,
                });
            }
            if gc.sales_floors.len() != n {
                out.push(MisalignedFloors {
                    group: Some(g),
                    expected: n,
                    actual: gc.sales_floors.len(),
                });
                continue;
            }
            if n >= 2 {
                if gc.sales_floors[0].is_some() {
                    out.push(FloorAtBoundary { group: g, index: 0 });
                }
                if gc.sales_floors[n - 1].is_some() {
                    out.push(FloorAtBoundary { group: g, index: n - 1 });
                }
            }
            let mut prev: Option<f64> = None;
            for (j, floor) in gc.sales_floors.iter().enumerate() {
                let Some(v) = floor else { continue };
                if !(*v >= 0.0) {
                    out.push(NegativeFloor {
                        group: Some(g),
                        index: j,
                        value: *v,
                    });
                }
                if let Some(p) = prev {
                    if *v < p {
                        out.push(SalesFloorsDecreasing { group: g, index: j });
                    }
                }
                if *v > gc.final_sales {
                    out.push(FloorAboveFinal {
                        group: g,
                        index: j,
                        floor: *v,
                        final_sales: gc.final_sales,
                    });
                }
                prev = Some(*v);
            }
        }
        out
    }

    /// Validates and wraps any breaches in an error.
    pub fn ensure_valid(&self) -> Result<(), PricingError> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(PricingError::InvalidSchedule(violations))
        }
    }

    /// Absolute comparison tolerance used when none is supplied: a millionth
    /// of the largest commitment magnitude.
    pub fn default_tolerance(&self) -> f64 {
        let mut largest: f64 = 1.0;
        for gc in &self.groups {
            largest = largest.max(gc.final_sales.abs());
            for floor in gc.sales_floors.iter().flatten() {
                largest = largest.max(floor.abs());
            }
        }
        for floor in self.revenue_floors.iter().flatten() {
            largest = largest.max(floor.abs());
        }
        1e-6 * largest
    }
}

/// Convenience constructor keyed by checkpoint time instead of index.
pub struct ScheduleBuilder {
    horizon: f64,
    interior_times: Vec<f64>,
    final_sales: Vec<f64>,
    sales_floors: Vec<(usize, f64, f64)>,
    revenue_floors: Vec<(f64, f64)>,
}

impl ScheduleBuilder {
    fn new(horizon: f64) -> Self {
        ScheduleBuilder {
            horizon,
            interior_times: Vec::new(),
            final_sales: Vec::new(),
            sales_floors: Vec::new(),
            revenue_floors: Vec::new(),
        }
    }

    pub fn interior_times(mut self, times: &[f64]) -> Self {
        self.interior_times = times.to_vec();
        self
    }

    pub fn final_sales(mut self, totals: &[f64]) -> Self {
        self.final_sales = totals.to_vec();
        self
    }

    pub fn sales_floor(mut self, group: usize, time: f64, value: f64) -> Self {
        self.sales_floors.push((group, time, value));
        self
    }

    pub fn revenue_floor(mut self, time: f64, value: f64) -> Self {
        self.revenue_floors.push((time, value));
        self
    }

    /// Assembles the schedule. Fails when a floor's time does not match any
    /// checkpoint; structural invariants are left to `validate`.
    pub fn build(self) -> Result<ConstraintSchedule, PricingError> {
        let mut times = Vec::with_capacity(self.interior_times.len() + 2);
        times.push(0.0);
        times.extend_from_slice(&self.interior_times);
        times.push(self.horizon);
        let n = times.len();
        let locate = |t: f64| -> Result<usize, PricingError> {
            times
                .iter()
                .position(|tau| (tau - t).abs() <= 1e-9 * self.horizon.abs().max(1.0))
                .ok_or_else(|| {
                    PricingError::InvalidScenario(format!(
                        "floor time {t} does not match any checkpoint"
                    ))
                })
        };
        let mut groups: Vec<GroupConstraints> = self
            .final_sales
            .iter()
            .map(|s| GroupConstraints::unconstrained(n, *s))
            .collect();
        for (g, t, v) in &self.sales_floors {
            let j = locate(*t)?;
            let gc = groups.get_mut(*g).ok_or_else(|| {
                PricingError::InvalidScenario(format!("sales floor references unknown group {g}"))
            })?;
            gc.sales_floors[j] = Some(*v);
        }
        let mut revenue_floors = vec![None; n];
        for (t, v) in &self.revenue_floors {
            let j = locate(*t)?;
            revenue_floors[j] = Some(*v);
        }
        Ok(ConstraintSchedule::from_parts(times, groups, revenue_floors))
    }
}

/// Cumulative sales and weighted revenue sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: Vec<f64>,
    /// `[group][grid point]` cumulative sales.
    sales: Vec<Vec<f64>>,
    /// `[group][grid point]` cumulative weighted revenue.
    revenue: Vec<Vec<f64>>,
    aggregate_revenue: Vec<f64>,
}

impl Trajectory {
    pub fn new(grid: Vec<f64>, sales: Vec<Vec<f64>>, revenue: Vec<Vec<f64>>) -> Self {
        let points = grid.len();
        assert!(points >= 1, "trajectory needs at least one grid point");
        assert_eq!(sales.len(), revenue.len());
        for series in sales.iter().chain(revenue.iter()) {
            assert_eq!(series.len(), points);
        }
        let aggregate_revenue = (0..points)
            .map(|i| revenue.iter().map(|r| r[i]).sum())
            .collect();
        Trajectory {
            grid,
            sales,
            revenue,
            aggregate_revenue,
        }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn num_groups(&self) -> usize {
        self.sales.len()
    }

    pub fn sales_series(&self, group: usize) -> &[f64] {
        &self.sales[group]
    }

    pub fn revenue_series(&self, group: usize) -> &[f64] {
        &self.revenue[group]
    }

    pub fn aggregate_series(&self) -> &[f64] {
        &self.aggregate_revenue
    }

    fn interpolate(&self, series: &[f64], t: f64) -> f64 {
        let n = self.grid.len();
        if t <= self.grid[0] {
            return series[0];
        }
        if t >= self.grid[n - 1] {
            return series[n - 1];
        }
        let idx = self.grid.partition_point(|g| *g <= t);
        let (t0, t1) = (self.grid[idx - 1], self.grid[idx]);
        let w = (t - t0) / (t1 - t0);
        series[idx - 1] + w * (series[idx] - series[idx - 1])
    }

    pub fn sales_at(&self, group: usize, t: f64) -> f64 {
        self.interpolate(&self.sales[group], t)
    }

    pub fn revenue_at(&self, group: usize, t: f64) -> f64 {
        self.interpolate(&self.revenue[group], t)
    }

    pub fn aggregate_revenue_at(&self, t: f64) -> f64 {
        self.interpolate(&self.aggregate_revenue, t)
    }

    pub fn final_sales(&self, group: usize) -> f64 {
        *self.sales[group].last().unwrap()
    }

    pub fn final_aggregate_revenue(&self) -> f64 {
        *self.aggregate_revenue.last().unwrap()
    }
}

/// Which commitment a trajectory missed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    IntermediateSales,
    FinalSales,
    Revenue,
}

/// First commitment a trajectory failed, with the signed gap (positive means
/// the trajectory fell short; for final sales it is the absolute deviation).
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityViolation {
    pub kind: ConstraintKind,
    pub group: Option<usize>,
    pub checkpoint: usize,
    pub time: f64,
    pub required: f64,
    pub attained: f64,
    pub gap: f64,
}

impl fmt::Display for FeasibilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ConstraintKind::IntermediateSales => "sales floor",
            ConstraintKind::FinalSales => "final sales",
            ConstraintKind::Revenue => "revenue floor",
        };
        match self.group {
            Some(g) => write!(
                f,
                "group {g} {what} at t={}: required {}, attained {} (gap {})",
                self.time, self.required, self.attained, self.gap
            ),
            None => write!(
                f,
                "{what} at t={}: required {}, attained {} (gap {})",
                self.time, self.required, self.attained, self.gap
            ),
        }
    }
}

/// Checks a trajectory against every commitment in the schedule.
///
/// Floors are checked one-sided, final sales two-sided, all with absolute
/// tolerance `tol`. Returns the first breach in checkpoint order (floors
/// before the final-sales check), or `None` when everything holds.
pub fn check_feasibility_against(
    schedule: &ConstraintSchedule,
    trajectory: &Trajectory,
    tol: f64,
) -> Option<FeasibilityViolation> {
    let times = schedule.times();
    let last = times.len() - 1;
    for (j, &tau) in times.iter().enumerate() {
        for g in 0..schedule.num_groups() {
            if let Some(floor) = schedule.sales_floor(g, j) {
                let attained = trajectory.sales_at(g, tau);
                if attained < floor - tol {
                    return Some(FeasibilityViolation {
                        kind: ConstraintKind::IntermediateSales,
                        group: Some(g),
                        checkpoint: j,
                        time: tau,
                        required: floor,
                        attained,
                        gap: floor - attained,
                    });
                }
            }
        }
        if let Some(floor) = schedule.revenue_floor(j) {
            let attained = trajectory.aggregate_revenue_at(tau);
            if attained < floor - tol {
                return Some(FeasibilityViolation {
                    kind: ConstraintKind::Revenue,
                    group: None,
                    checkpoint: j,
                    time: tau,
                    required: floor,
                    attained,
                    gap: floor - attained,
                });
            }
        }
    }
    for g in 0..schedule.num_groups() {
        let want = schedule.final_sales(g);
        let got = trajectory.final_sales(g);
        if (got - want).abs() > tol {
            return Some(FeasibilityViolation {
                kind: ConstraintKind::FinalSales,
                group: Some(g),
                checkpoint: last,
                time: times[last],
                required: want,
                attained: got,
                gap: (got - want).abs(),
            });
        }
    }
    None
}

/// Status of one commitment, for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintStatus {
    pub kind: ConstraintKind,
    pub group: Option<usize>,
    pub time: f64,
    pub required: f64,
    pub attained: f64,
    pub satisfied: bool,
}

/// Evaluates every commitment for a human-readable report.
pub fn constraint_report(
    schedule: &ConstraintSchedule,
    trajectory: &Trajectory,
    tol: f64,
) -> Vec<ConstraintStatus> {
    let mut out = Vec::new();
    let times = schedule.times();
    for (j, &tau) in times.iter().enumerate() {
        for g in 0..schedule.num_groups() {
            if let Some(floor) = schedule.sales_floor(g, j) {
                let attained = trajectory.sales_at(g, tau);
                out.push(ConstraintStatus {
                    kind: ConstraintKind::IntermediateSales,
                    group: Some(g),
                    time: tau,
                    required: floor,
                    attained,
                    satisfied: attained >= floor - tol,
                });
            }
        }
        if let Some(floor) = schedule.revenue_floor(j) {
            let attained = trajectory.aggregate_revenue_at(tau);
            out.push(ConstraintStatus {
                kind: ConstraintKind::Revenue,
                group: None,
                time: tau,
                required: floor,
                attained,
                satisfied: attained >= floor - tol,
            });
        }
    }
    for g in 0..schedule.num_groups() {
        let want = schedule.final_sales(g);
        let got = trajectory.final_sales(g);
        out.push(ConstraintStatus {
            kind: ConstraintKind::FinalSales,
            group: Some(g),
            time: schedule.horizon(),
            required: want,
            attained: got,
            satisfied: (got - want).abs() <= tol,
        });
    }
    out
}
