//! Price policies and the trajectories they induce.
//!
//! A policy assigns each group a piecewise price path over the horizon. Two
//! segment shapes cover everything the planners emit: a constant normalized
//! price, and the smooth curve `p(t) = (choke - multiplier / zeta(t)) / 2`
//! that keeps a group revenue-stationary under time-value weighting. With a
//! flat weight the smooth shape collapses to a constant, so the same
//! machinery serves both planners.
//!
//! Integration against a demand model is closed-form wherever the price stays
//! on the unclamped linear branch of demand, with adaptive quadrature as the
//! fallback, so trajectories do not depend on the reporting grid.

use crate::constraints::Trajectory;
use crate::demand::{DemandModel, LinearDemandParams};
use crate::error::PricingError;
use crate::numerics::{adaptive_simpson, QUAD_REL_TOL};
use crate::timevalue::TimeValueSpec;

/// Price as a function of time within one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriceCurve {
    /// Fixed normalized price.
    Constant(f64),
    /// `p(t) = (choke - multiplier / zeta(t)) / 2`, the stationary shape for
    /// linear demand under revenue weight `zeta`.
    Stationary { choke: f64, multiplier: f64 },
}

/// One group's price curve over `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicySegment {
    pub start: f64,
    pub end: f64,
    pub curve: PriceCurve,
}

/// A full pricing policy: per-group segments plus the revenue weighting they
/// were planned under.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingPolicy {
    horizon: f64,
    timevalue: TimeValueSpec,
    /// `[group][segment]`, segments contiguous and ordered by time.
    segments: Vec<Vec<PolicySegment>>,
}

impl PricingPolicy {
    pub fn new(
        horizon: f64,
        timevalue: TimeValueSpec,
        segments: Vec<Vec<PolicySegment>>,
    ) -> Self {
        for group in &segments {
            debug_assert!(!group.is_empty(), "every group needs at least one segment");
            for pair in group.windows(2) {
                debug_assert!(
                    (pair[0].end - pair[1].start).abs() < 1e-9,
                    "segments must be contiguous"
                );
            }
        }
        PricingPolicy {
            horizon,
            timevalue,
            segments,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn timevalue(&self) -> &TimeValueSpec {
        &self.timevalue
    }

    pub fn num_groups(&self) -> usize {
        self.segments.len()
    }

    pub fn segments(&self, group: usize) -> &[PolicySegment] {
        &self.segments[group]
    }

    /// Start of the earliest segment (zero for a full-horizon plan).
    pub fn start_time(&self) -> f64 {
        self.segments
            .iter()
            .filter_map(|g| g.first().map(|s| s.start))
            .fold(f64::INFINITY, f64::min)
    }

    fn segment_at(&self, group: usize, t: f64) -> &PolicySegment {
        let segs = &self.segments[group];
        let idx = segs.partition_point(|s| s.start <= t);
        &segs[idx.saturating_sub(1).min(segs.len() - 1)]
    }

    fn curve_price(&self, curve: &PriceCurve, t: f64) -> f64 {
        match curve {
            PriceCurve::Constant(p) => *p,
            PriceCurve::Stationary { choke, multiplier } => {
                0.5 * (choke - multiplier / self.timevalue.zeta(t))
            }
        }
    }

    /// Normalized price for `group` at time `t`.
    pub fn price(&self, group: usize, t: f64) -> f64 {
        let seg = self.segment_at(group, t);
        self.curve_price(&seg.curve, t)
    }

    /// Price actually posted at time `t` (normalized price times the uplift).
    pub fn posted_price(&self, group: usize, t: f64) -> f64 {
        self.timevalue.kappa(t) * self.price(group, t)
    }

    /// All segment boundary times across groups, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut times = Vec::new();
        for group in &self.segments {
            for seg in group {
                times.push(seg.start);
                times.push(seg.end);
            }
        }
        sort_dedup(&mut times, self.horizon);
        times
    }

    /// Interior breakpoints of one group (joins between its segments).
    pub fn group_breakpoints(&self, group: usize) -> Vec<f64> {
        self.segments[group]
            .windows(2)
            .map(|pair| pair[1].start)
            .collect()
    }

    /// Integrates sales and weighted revenue for every group on `grid`,
    /// which must be sorted and start no earlier than the policy does.
    pub fn integrate(
        &self,
        models: &[DemandModel],
        grid: &[f64],
    ) -> Result<Trajectory, PricingError> {
        let zeros = vec![0.0; self.segments.len()];
        self.integrate_from(models, grid, &zeros, &zeros)
    }

    /// Like [`integrate`](Self::integrate) but starting from prior cumulative
    /// sales and revenue (used when a plan begins mid-horizon).
    pub fn integrate_from(
        &self,
        models: &[DemandModel],
        grid: &[f64],
        initial_sales: &[f64],
        initial_revenue: &[f64],
    ) -> Result<Trajectory, PricingError> {
        let k = self.segments.len();
        if models.len() != k {
            return Err(PricingError::InvalidScenario(format!(
                "policy covers {k} groups but {} demand models were given",
                models.len()
            )));
        }
        if grid.len() < 2 {
            return Err(PricingError::InvalidScenario(
                "integration grid needs at least two points".to_string(),
            ));
        }
        let mut sales = Vec::with_capacity(k);
        let mut revenue = Vec::with_capacity(k);
        for g in 0..k {
            let mut cuts: Vec<f64> = self.segments[g]
                .iter()
                .flat_map(|s| [s.start, s.end])
                .chain(models[g].change_times())
                .collect();
            sort_dedup(&mut cuts, self.horizon);

            let mut s_series = Vec::with_capacity(grid.len());
            let mut r_series = Vec::with_capacity(grid.len());
            let mut s_cum = initial_sales[g];
            let mut r_cum = initial_revenue[g];
            s_series.push(s_cum);
            r_series.push(r_cum);
            for cell in grid.windows(2) {
                let (lo, hi) = (cell[0], cell[1]);
                for (a, b) in split_cell(lo, hi, &cuts) {
                    let seg = self.segment_at(g, 0.5 * (a + b));
                    let params = models[g].params_at(0.5 * (a + b));
                    let (ds, dr) = self.piece_totals(&seg.curve, params, a, b);
                    s_cum += ds;
                    r_cum += dr;
                }
                s_series.push(s_cum);
                r_series.push(r_cum);
            }
            sales.push(s_series);
            revenue.push(r_series);
        }
        Ok(Trajectory::new(grid.to_vec(), sales, revenue))
    }

    /// Sales and weighted revenue contributed by one curve over `[a, b]`
    /// against fixed demand parameters.
    fn piece_totals(
        &self,
        curve: &PriceCurve,
        params: &LinearDemandParams,
        a: f64,
        b: f64,
    ) -> (f64, f64) {
        if b <= a {
            return (0.0, 0.0);
        }
        match curve {
            PriceCurve::Constant(p) => {
                let v = params.rate(*p);
                let weighted = self.timevalue.zeta_integral(a, b);
                (v * (b - a), p * v * weighted)
            }
            PriceCurve::Stationary { choke, multiplier } => {
                if self.on_linear_branch(curve, params, a, b) {
                    let big_a = params.scale * params.intercept;
                    let big_b = params.scale * params.slope;
                    let inv = self.timevalue.inv_zeta_integral(a, b);
                    let zint = self.timevalue.zeta_integral(a, b);
                    let ds = 0.5 * big_a * (b - a) + 0.5 * big_b * multiplier * inv;
                    let dr = 0.25 * big_a * choke * zint
                        - 0.25 * big_b * multiplier * multiplier * inv;
                    (ds, dr)
                } else {
                    // The curve strays into clamped demand somewhere in the
                    // piece; fall back to quadrature of the true rate.
                    let rate = |t: f64| params.rate(self.curve_price(curve, t));
                    let ds = adaptive_simpson(&rate, a, b, QUAD_REL_TOL);
                    let dr = adaptive_simpson(
                        &|t: f64| {
                            let p = self.curve_price(curve, t);
                            self.timevalue.zeta(t) * p * params.rate(p)
                        },
                        a,
                        b,
                        QUAD_REL_TOL,
                    );
                    (ds, dr)
                }
            }
        }
    }

    /// Samples the curve over `[a, b]` and reports whether the unclamped
    /// linear demand branch holds throughout.
    fn on_linear_branch(
        &self,
        curve: &PriceCurve,
        params: &LinearDemandParams,
        a: f64,
        b: f64,
    ) -> bool {
        const SAMPLES: usize = 9;
        let max_unclamped = params.scale * params.intercept;
        let slack = 1e-9 * max_unclamped.max(1.0);
        for i in 0..=SAMPLES {
            let t = a + (b - a) * (i as f64) / (SAMPLES as f64);
            let p = self.curve_price(curve, t);
            let linear = params.scale * (params.intercept - params.slope * p);
            if linear < -slack || linear > params.cap + slack {
                return false;
            }
        }
        true
    }
}

/// Builds a reporting grid: multiples of `step` over `[0, horizon]` merged
/// with `extra` times (clamped into range), sorted and deduplicated.
pub fn build_grid(horizon: f64, step: f64, extra: &[f64]) -> Vec<f64> {
    assert!(step > 0.0, "grid step must be positive");
    let mut grid = Vec::new();
    let mut t = 0.0;
    while t < horizon {
        grid.push(t);
        t += step;
    }
    grid.push(horizon);
    grid.extend(extra.iter().copied().filter(|t| (0.0..=horizon).contains(t)));
    sort_dedup(&mut grid, horizon);
    grid
}

fn sort_dedup(times: &mut Vec<f64>, horizon: f64) {
    let eps = 1e-12 * horizon.abs().max(1.0);
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup_by(|a, b| (*a - *b).abs() <= eps);
}

/// Cuts `[lo, hi]` at the interior members of `cuts` (sorted), yielding the
/// atomic sub-intervals.
fn split_cell(lo: f64, hi: f64, cuts: &[f64]) -> Vec<(f64, f64)> {
    let mut bounds = vec![lo];
    for &c in cuts {
        if c > lo && c < hi {
            bounds.push(c);
        }
    }
    bounds.push(hi);
    bounds.windows(2).map(|w| (w[0], w[1])).collect()
}
