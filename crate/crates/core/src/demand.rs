//! Piecewise-stationary clipped-linear demand.
//!
//! Each pricing group sells at a rate driven by its normalized price `p`:
//!
//! ```text
//! v(p) = clamp(scale * (intercept - slope * p), 0, cap)
//! ```
//!
//! The linear part is scaled first, then clipped to `[0, cap]`. A demand model
//! is a sequence of such parameter sets, each active from its start time until
//! the next change point; the last segment runs to the end of the horizon.

use crate::error::PricingError;

/// A non-negative sales rate (units per unit time).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Rate(f64);

impl Rate {
    pub fn new(value: f64) -> Self {
        debug_assert!(value >= 0.0, "sales rate must be non-negative, got {value}");
        Rate(value.max(0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Rate> for f64 {
    fn from(r: Rate) -> f64 {
        r.0
    }
}

/// Parameters of one stationary demand segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearDemandParams {
    /// Demand at zero price before scaling, in conversion units.
    pub intercept: f64,
    /// Demand lost per unit of price before scaling. Must be positive.
    pub slope: f64,
    /// Multiplier applied to the linear part (e.g. market size).
    pub scale: f64,
    /// Hard ceiling on the sales rate; `f64::INFINITY` disables it.
    pub cap: f64,
    /// Lowest admissible normalized price.
    pub price_min: f64,
    /// Highest admissible normalized price.
    pub price_max: f64,
}

impl LinearDemandParams {
    /// Builds a segment with unit scale, no cap, and price bounds spanning
    /// `[0, choke]`.
    pub fn new(intercept: f64, slope: f64) -> Self {
        LinearDemandParams {
            intercept,
            slope,
            scale: 1.0,
            cap: f64::INFINITY,
            price_min: 0.0,
            price_max: intercept / slope,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = cap;
        self
    }

    pub fn with_price_bounds(mut self, min: f64, max: f64) -> Self {
        self.price_min = min;
        self.price_max = max;
        self
    }

    pub fn validate(&self) -> Result<(), PricingError> {
        let bad = |msg: String| Err(PricingError::InvalidScenario(msg));
        if !self.intercept.is_finite() || self.intercept <= 0.0 {
            return bad(format!("demand intercept must be positive, got {}", self.intercept));
        }
        if !self.slope.is_finite() || self.slope <= 0.0 {
            return bad(format!("demand slope must be positive, got {}", self.slope));
        }
        if !self.scale.is_finite() || self.scale < 0.0 {
            return bad(format!("demand scale must be non-negative, got {}", self.scale));
        }
        if self.cap.is_nan() || self.cap <= 0.0 {
            return bad(format!("demand cap must be positive, got {}", self.cap));
        }
        if !self.price_min.is_finite() || !self.price_max.is_finite() {
            return bad("price bounds must be finite".to_string());
        }
        if self.price_min < 0.0 || self.price_min >= self.price_max {
            return bad(format!(
                "price bounds must satisfy 0 <= min < max, got [{}, {}]",
                self.price_min, self.price_max
            ));
        }
        Ok(())
    }

    /// Price at which the unclamped linear demand reaches zero.
    pub fn choke_price(&self) -> f64 {
        self.intercept / self.slope
    }

    /// Sales rate at normalized price `p`.
    pub fn rate(&self, p: f64) -> f64 {
        (self.scale * (self.intercept - self.slope * p)).clamp(0.0, self.cap)
    }

    /// Revenue rate `p * v(p)` at normalized price `p`.
    pub fn revenue_rate(&self, p: f64) -> f64 {
        p * self.rate(p)
    }

    /// Largest achievable sales rate over non-negative prices.
    pub fn max_rate(&self) -> f64 {
        (self.scale * self.intercept).min(self.cap)
    }

    /// Price below which the cap clips demand, or `None` when the cap never
    /// binds at non-negative prices.
    fn cap_price(&self) -> Option<f64> {
        if self.scale <= 0.0 || self.cap >= self.scale * self.intercept {
            return None;
        }
        Some((self.intercept - self.cap / self.scale) / self.slope)
    }

    /// The price on the downward-sloping branch that attains a given sales
    /// rate. Fails when the rate is negative or above `max_rate`.
    pub fn invert_rate(&self, rate: f64) -> Result<f64, PricingError> {
        let max_rate = self.max_rate();
        if rate < 0.0 || rate > max_rate {
            return Err(PricingError::InfeasibleRate { rate, max_rate });
        }
        if self.scale <= 0.0 {
            // Only a zero rate is attainable; any price at or above choke works.
            return Ok(self.choke_price());
        }
        Ok((self.intercept - rate / self.scale) / self.slope)
    }

    /// Revenue-maximizing price, ignoring the admissible price interval.
    fn unconstrained_revenue_max(&self) -> f64 {
        let interior = 0.5 * self.choke_price();
        match self.cap_price() {
            // Below cap_price revenue grows linearly in p; above it the
            // parabola peaks at choke/2. The larger of the two wins.
            Some(pc) => interior.max(pc),
            None => interior,
        }
    }

    /// Revenue-maximizing price clamped into `[price_min, price_max]`.
    pub fn revenue_max_price(&self) -> f64 {
        self.unconstrained_revenue_max()
            .clamp(self.price_min, self.price_max)
    }

    /// Price interval on which demand is both admissible and unclamped: at or
    /// above the cap threshold, at or below choke, inside the price bounds.
    pub fn valid_branch(&self) -> (f64, f64) {
        let lo = match self.cap_price() {
            Some(pc) => self.price_min.max(pc),
            None => self.price_min,
        };
        (lo, self.price_max.min(self.choke_price()))
    }

    /// Largest achievable revenue rate over non-negative prices, ignoring the
    /// admissible price interval.
    pub fn max_revenue_rate(&self) -> f64 {
        let p = self.unconstrained_revenue_max();
        self.revenue_rate(p)
    }

    /// Finds the price achieving revenue rate `target`, picking the root
    /// closest to `reference` (ties resolve to the lower price).
    ///
    /// The revenue curve rises from zero to its peak and falls back to zero at
    /// the choke price, so an attainable target generally has two roots.
    pub fn solve_price_for_revenue_rate(
        &self,
        target: f64,
        reference: f64,
    ) -> Result<f64, PricingError> {
        assert!(target >= 0.0, "revenue-rate target must be non-negative");
        if target == 0.0 {
            return Ok(self.choke_price());
        }
        let max = self.max_revenue_rate();
        let mut c = target;
        if c > max {
            let shortfall = c - max;
            if shortfall <= 1e-9 * max.max(1.0) {
                // Round-off from upstream arithmetic; land on the peak.
                c = max;
            } else {
                return Err(PricingError::InfeasibleTarget {
                    target,
                    max,
                    shortfall,
                });
            }
        }

        let cap_price = self.cap_price();
        let lower = match cap_price {
            // On the capped stretch revenue is p * cap.
            Some(pc) if c <= pc * self.cap => c / self.cap,
            _ => {
                let disc = (self.intercept * self.intercept
                    - 4.0 * self.slope * c / self.scale)
                    .max(0.0);
                (self.intercept - disc.sqrt()) / (2.0 * self.slope)
            }
        };
        let upper = {
            let disc = (self.intercept * self.intercept - 4.0 * self.slope * c / self.scale)
                .max(0.0);
            (self.intercept + disc.sqrt()) / (2.0 * self.slope)
        };

        let d_lower = (lower - reference).abs();
        let d_upper = (upper - reference).abs();
        if d_lower <= d_upper {
            Ok(lower)
        } else {
            Ok(upper)
        }
    }
}

/// Demand for one group across the whole horizon: an ordered list of segments,
/// the first starting at time zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandModel {
    horizon: f64,
    /// `(start_time, params)`, start times strictly increasing from 0.
    segments: Vec<(f64, LinearDemandParams)>,
}

impl DemandModel {
    /// A single stationary segment covering `[0, horizon]`.
    pub fn constant(params: LinearDemandParams, horizon: f64) -> Self {
        DemandModel {
            horizon,
            segments: vec![(0.0, params)],
        }
    }

    pub fn new(
        segments: Vec<(f64, LinearDemandParams)>,
        horizon: f64,
    ) -> Result<Self, PricingError> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(PricingError::InvalidScenario(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if segments.is_empty() {
            return Err(PricingError::InvalidScenario(
                "demand model needs at least one segment".to_string(),
            ));
        }
        if segments[0].0 != 0.0 {
            return Err(PricingError::InvalidScenario(
                "first demand segment must start at time 0".to_string(),
            ));
        }
        for pair in segments.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(PricingError::InvalidScenario(
                    "demand segment starts must be strictly increasing".to_string(),
                ));
            }
        }
        for (start, params) in &segments {
            if *start >= horizon {
                return Err(PricingError::InvalidScenario(format!(
                    "demand segment start {start} is at or past the horizon {horizon}"
                )));
            }
            params.validate()?;
        }
        Ok(DemandModel { horizon, segments })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Re-checks the construction invariants (useful for models assembled via
    /// [`constant`](Self::constant) or [`with_change`](Self::with_change)).
    pub fn validate(&self) -> Result<(), PricingError> {
        Self::new(self.segments.clone(), self.horizon).map(|_| ())
    }

    /// Times at which the parameters change (excludes time 0).
    pub fn change_times(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|(t, _)| *t).collect()
    }

    /// Parameters in force at time `t` (clamped to the horizon ends).
    pub fn params_at(&self, t: f64) -> &LinearDemandParams {
        let idx = self.segments.partition_point(|(start, _)| *start <= t);
        &self.segments[idx.saturating_sub(1)].1
    }

    /// Returns a copy with new parameters taking over from time `at` onward.
    /// Any previously scheduled change at or after `at` is dropped.
    pub fn with_change(&self, at: f64, params: LinearDemandParams) -> Self {
        let mut segments: Vec<_> = self
            .segments
            .iter()
            .filter(|(start, _)| *start < at)
            .cloned()
            .collect();
        segments.push((at, params));
        DemandModel {
            horizon: self.horizon,
            segments,
        }
    }

    fn check_time(&self, t: f64) -> Result<(), PricingError> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(PricingError::TimeOutsideHorizon {
                t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    /// Sales rate at time `t` and normalized price `p`.
    pub fn rate(&self, t: f64, p: f64) -> Result<Rate, PricingError> {
        self.check_time(t)?;
        Ok(Rate::new(self.params_at(t).rate(p)))
    }

    /// See [`LinearDemandParams::invert_rate`].
    pub fn invert_rate(&self, t: f64, rate: f64) -> Result<f64, PricingError> {
        self.check_time(t)?;
        self.params_at(t).invert_rate(rate)
    }

    /// See [`LinearDemandParams::revenue_max_price`].
    pub fn revenue_max_price(&self, t: f64) -> Result<f64, PricingError> {
        self.check_time(t)?;
        Ok(self.params_at(t).revenue_max_price())
    }

    /// See [`LinearDemandParams::solve_price_for_revenue_rate`].
    pub fn solve_price_for_revenue_rate(
        &self,
        t: f64,
        target: f64,
        reference: f64,
    ) -> Result<f64, PricingError> {
        self.check_time(t)?;
        self.params_at(t).solve_price_for_revenue_rate(target, reference)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plain(intercept: f64, slope: f64) -> LinearDemandParams {
        LinearDemandParams::new(intercept, slope)
    }

    #[test]
    fn rate_clamps_after_scaling() {
        let d = plain(300.0, 2.0).with_scale(2.0).with_cap(500.0);
        // Unclamped: 2 * (300 - 2*100) = 200
        assert_eq!(d.rate(100.0), 200.0);
        // 2 * (300 - 2*25) = 500 exactly at the cap
        assert_eq!(d.rate(25.0), 500.0);
        // Below that price the cap clips.
        assert_eq!(d.rate(10.0), 500.0);
        // Past choke the rate floors at zero.
        assert_eq!(d.rate(200.0), 0.0);
    }

    #[test]
    fn invert_rate_recovers_price_on_linear_branch() {
        let d = plain(300.0, 2.0);
        assert_eq!(d.invert_rate(100.0).unwrap(), 100.0);
        // Zero rate lands exactly on the choke price.
        assert_eq!(d.invert_rate(0.0).unwrap(), 150.0);
    }

    #[test]
    fn invert_rate_rejects_unattainable_rate() {
        let d = plain(300.0, 2.0);
        let err = d.invert_rate(301.0).unwrap_err();
        assert_eq!(
            err,
            PricingError::InfeasibleRate {
                rate: 301.0,
                max_rate: 300.0
            }
        );
    }

    #[test]
    fn invert_rate_respects_cap_ceiling() {
        let d = plain(300.0, 2.0).with_cap(120.0);
        assert!(d.invert_rate(120.0).is_ok());
        assert!(d.invert_rate(121.0).is_err());
    }

    #[test]
    fn revenue_max_interior_peak() {
        let d = plain(300.0, 2.0).with_price_bounds(0.0, 200.0);
        assert_eq!(d.revenue_max_price(), 75.0);
        assert_eq!(d.max_revenue_rate(), 11250.0);
    }

    #[test]
    fn revenue_max_clamps_to_price_bounds() {
        let d = plain(300.0, 2.0).with_price_bounds(90.0, 200.0);
        assert_eq!(d.revenue_max_price(), 90.0);
    }

    #[test]
    fn revenue_max_moves_to_cap_corner() {
        // Cap 100 binds below p = 100; the best unclamped point is the corner,
        // which beats the parabola peak location.
        let d = plain(300.0, 2.0).with_cap(100.0).with_price_bounds(0.0, 150.0);
        assert_eq!(d.revenue_max_price(), 100.0);
        assert_eq!(d.max_revenue_rate(), 10000.0);
    }

    #[test]
    fn solve_picks_root_nearest_reference() {
        let d = plain(300.0, 2.0);
        // Roots of p(300 - 2p) = 10500 are 150/2 ± sqrt(1500)/2.
        let hi = d.solve_price_for_revenue_rate(10500.0, 100.0).unwrap();
        let lo = d.solve_price_for_revenue_rate(10500.0, 40.0).unwrap();
        let disc = 1500.0f64.sqrt();
        assert!((hi - (75.0 + 0.5 * disc)).abs() < 1e-9);
        assert!((lo - (75.0 - 0.5 * disc)).abs() < 1e-9);
    }

    #[test]
    fn solve_tie_prefers_lower_price() {
        let d = plain(300.0, 2.0);
        // Reference exactly between the two roots of c = 10500.
        let p = d.solve_price_for_revenue_rate(10500.0, 75.0).unwrap();
        assert!(p < 75.0);
    }

    #[test]
    fn solve_peak_target_returns_tangent_price() {
        let d = plain(300.0, 2.0);
        let p = d.solve_price_for_revenue_rate(11250.0, 100.0).unwrap();
        assert!((p - 75.0).abs() < 1e-9);
    }

    #[test]
    fn solve_reports_shortfall_past_peak() {
        let d = plain(300.0, 2.0);
        let err = d.solve_price_for_revenue_rate(12000.0, 100.0).unwrap_err();
        match err {
            PricingError::InfeasibleTarget {
                target,
                max,
                shortfall,
            } => {
                assert_eq!(target, 12000.0);
                assert_eq!(max, 11250.0);
                assert!((shortfall - 750.0).abs() < 1e-12);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn solve_uses_capped_stretch_for_low_targets() {
        let d = plain(300.0, 2.0).with_cap(100.0);
        // Below p=100 revenue is 100 p, so a target of 5000 has its rising
        // root at p = 50.
        let p = d.solve_price_for_revenue_rate(5000.0, 0.0).unwrap();
        assert_eq!(p, 50.0);
        assert_eq!(d.revenue_rate(p), 5000.0);
    }

    #[test]
    fn solve_zero_target_stops_sales() {
        let d = plain(300.0, 2.0);
        let p = d.solve_price_for_revenue_rate(0.0, 40.0).unwrap();
        assert_eq!(p, 150.0);
        assert_eq!(d.rate(p), 0.0);
    }

    #[test]
    fn model_segments_switch_at_change_points() {
        let early = plain(300.0, 2.0);
        let late = plain(200.0, 2.0);
        let m = DemandModel::new(vec![(0.0, early), (6.0, late)], 10.0).unwrap();
        assert_eq!(m.params_at(5.999).intercept, 300.0);
        assert_eq!(m.params_at(6.0).intercept, 200.0);
        assert_eq!(m.params_at(10.0).intercept, 200.0);
        assert_eq!(m.change_times(), vec![6.0]);
    }

    #[test]
    fn with_change_replaces_tail() {
        let m = DemandModel::constant(plain(300.0, 2.0), 10.0);
        let shifted = m.with_change(4.0, plain(150.0, 2.0));
        assert_eq!(shifted.params_at(3.9).intercept, 300.0);
        assert_eq!(shifted.params_at(4.0).intercept, 150.0);
        // A later change overrides a pending earlier one at the same time.
        let again = shifted.with_change(4.0, plain(120.0, 2.0));
        assert_eq!(again.params_at(4.0).intercept, 120.0);
        assert_eq!(again.change_times(), vec![4.0]);
    }

    #[test]
    fn model_rejects_out_of_horizon_queries() {
        let m = DemandModel::constant(plain(300.0, 2.0), 10.0);
        assert!(m.rate(10.0, 50.0).is_ok());
        assert!(matches!(
            m.rate(10.5, 50.0),
            Err(PricingError::TimeOutsideHorizon { .. })
        ));
        assert!(m.invert_rate(-0.1, 10.0).is_err());
    }

    #[test]
    fn model_validation_catches_bad_shapes() {
        let p = plain(300.0, 2.0);
        assert!(DemandModel::new(vec![(1.0, p)], 10.0).is_err());
        assert!(DemandModel::new(vec![(0.0, p), (0.0, p)], 10.0).is_err());
        assert!(DemandModel::new(vec![(0.0, p), (12.0, p)], 10.0).is_err());
        let bad = LinearDemandParams {
            slope: -1.0,
            ..plain(300.0, 2.0)
        };
        assert!(DemandModel::new(vec![(0.0, bad)], 10.0).is_err());
    }

    proptest! {
        #[test]
        fn invert_is_right_inverse_of_rate(
            intercept in 10.0..500.0f64,
            slope in 0.05..5.0f64,
            scale in 0.5..100.0f64,
            frac in 0.0..1.0f64,
        ) {
            let d = plain(intercept, slope).with_scale(scale);
            let r = frac * d.max_rate();
            let p = d.invert_rate(r).unwrap();
            prop_assert!((d.rate(p) - r).abs() <= 1e-9 * d.max_rate().max(1.0));
        }

        #[test]
        fn solved_price_attains_target(
            intercept in 10.0..500.0f64,
            slope in 0.05..5.0f64,
            scale in 0.5..100.0f64,
            cap_frac in 0.2..2.0f64,
            c_frac in 0.01..1.0f64,
            reference in 0.0..400.0f64,
        ) {
            let cap = cap_frac * scale * intercept;
            let d = plain(intercept, slope).with_scale(scale).with_cap(cap);
            let c = c_frac * d.max_revenue_rate();
            let p = d.solve_price_for_revenue_rate(c, reference).unwrap();
            let achieved = d.revenue_rate(p);
            prop_assert!(
                (achieved - c).abs() <= 1e-6 * c.max(1.0),
                "price {p} achieves {achieved}, wanted {c}"
            );
        }
    }
}
