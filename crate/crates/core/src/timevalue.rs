//! Time-value weighting of revenue.
//!
//! Money collected later in the horizon can be worth less (discounting) while
//! list prices can drift upward as construction progresses (an uplift factor
//! applied to the posted price). Both effects enter the revenue objective
//! through a single weight `zeta(t) = phi(t) * kappa(t)`:
//!
//! * `phi` — discount factor, non-increasing, `phi(t) > 0`;
//! * `kappa` — posted-price uplift, non-decreasing, `kappa(0) = 1`.
//!
//! Weighted revenue over an interval is `∫ zeta(t) · p(t) · v(p(t)) dt` where
//! `p` is the normalized price the demand model sees and `kappa(t) · p(t)` is
//! the price actually posted.

use crate::error::PricingError;
use crate::numerics::{adaptive_simpson, QUAD_REL_TOL};

/// A scalar function of time used for discounting or price uplift.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeFunction {
    /// Constant value at all times.
    Constant(f64),
    /// `e^(-rate * t)`. A negative rate grows over time, which is how an
    /// exponential uplift is expressed.
    Exponential { rate: f64 },
    /// Piecewise-linear interpolation through `(time, value)` knots with
    /// strictly increasing times. Values are held flat outside the knot range.
    Table(Vec<(f64, f64)>),
}

impl TimeFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFunction::Constant(c) => *c,
            TimeFunction::Exponential { rate } => (-rate * t).exp(),
            TimeFunction::Table(knots) => eval_table(knots, t),
        }
    }

    fn is_constant_one(&self) -> bool {
        matches!(self, TimeFunction::Constant(c) if *c == 1.0)
    }
}

fn eval_table(knots: &[(f64, f64)], t: f64) -> f64 {
    match knots {
        [] => 1.0,
        [single] => single.1,
        _ => {
            let first = knots[0];
            let last = knots[knots.len() - 1];
            if t <= first.0 {
                return first.1;
            }
            if t >= last.0 {
                return last.1;
            }
            let idx = knots.partition_point(|(kt, _)| *kt <= t);
            let (t0, v0) = knots[idx - 1];
            let (t1, v1) = knots[idx];
            let w = (t - t0) / (t1 - t0);
            v0 + w * (v1 - v0)
        }
    }
}

/// Analytic shape of `zeta`, used to pick closed-form integrals.
#[derive(Debug, Clone, PartialEq)]
enum ZetaForm {
    Constant(f64),
    /// `coeff * e^(-rate * t)` with `rate != 0`.
    Exponential { coeff: f64, rate: f64 },
    /// No closed form; integrate numerically.
    Numeric,
}

/// Discount and uplift pair, with the combined weight cached in analytic form
/// where one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeValueSpec {
    phi: TimeFunction,
    kappa: TimeFunction,
    form: ZetaForm,
}

impl TimeValueSpec {
    pub fn new(phi: TimeFunction, kappa: TimeFunction) -> Self {
        let form = classify(&phi, &kappa);
        TimeValueSpec { phi, kappa, form }
    }

    /// No discounting, no uplift: `zeta ≡ 1`.
    pub fn flat() -> Self {
        Self::new(TimeFunction::Constant(1.0), TimeFunction::Constant(1.0))
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.phi.eval(t)
    }

    pub fn kappa(&self, t: f64) -> f64 {
        self.kappa.eval(t)
    }

    /// Combined revenue weight `phi(t) * kappa(t)`.
    pub fn zeta(&self, t: f64) -> f64 {
        match &self.form {
            ZetaForm::Constant(c) => *c,
            ZetaForm::Exponential { coeff, rate } => coeff * (-rate * t).exp(),
            ZetaForm::Numeric => self.phi.eval(t) * self.kappa.eval(t),
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.form, ZetaForm::Constant(c) if c == 1.0)
            && self.kappa.is_constant_one()
    }

    /// `∫ zeta(t) dt` over `[t1, t2]`.
    pub fn zeta_integral(&self, t1: f64, t2: f64) -> f64 {
        match &self.form {
            ZetaForm::Constant(c) => c * (t2 - t1),
            ZetaForm::Exponential { coeff, rate } => {
                coeff / rate * ((-rate * t1).exp() - (-rate * t2).exp())
            }
            ZetaForm::Numeric => adaptive_simpson(&|t| self.zeta(t), t1, t2, QUAD_REL_TOL),
        }
    }

    /// `∫ dt / zeta(t)` over `[t1, t2]`.
    pub fn inv_zeta_integral(&self, t1: f64, t2: f64) -> f64 {
        match &self.form {
            ZetaForm::Constant(c) => (t2 - t1) / c,
            ZetaForm::Exponential { coeff, rate } => {
                ((rate * t2).exp() - (rate * t1).exp()) / (coeff * rate)
            }
            ZetaForm::Numeric => adaptive_simpson(&|t| 1.0 / self.zeta(t), t1, t2, QUAD_REL_TOL),
        }
    }

    /// Checks shape requirements over `[0, horizon]`: positivity, `phi`
    /// non-increasing, `kappa` non-decreasing with `kappa(0) = 1`.
    pub fn validate(&self, horizon: f64) -> Result<(), PricingError> {
        validate_function(&self.phi, horizon, Monotonicity::NonIncreasing, "phi")?;
        validate_function(&self.kappa, horizon, Monotonicity::NonDecreasing, "kappa")?;
        let k0 = self.kappa.eval(0.0);
        if (k0 - 1.0).abs() > 1e-9 {
            return Err(PricingError::InvalidScenario(format!(
                "kappa(0) must be 1, got {k0}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Monotonicity {
    NonIncreasing,
    NonDecreasing,
}

fn validate_function(
    f: &TimeFunction,
    horizon: f64,
    direction: Monotonicity,
    name: &str,
) -> Result<(), PricingError> {
    let bad_rate = match (f, direction) {
        (TimeFunction::Exponential { rate }, Monotonicity::NonIncreasing) => *rate < 0.0,
        (TimeFunction::Exponential { rate }, Monotonicity::NonDecreasing) => *rate > 0.0,
        _ => false,
    };
    if bad_rate {
        return Err(PricingError::InvalidScenario(format!(
            "{name} has the wrong monotonicity for its role"
        )));
    }
    if let TimeFunction::Constant(c) = f {
        if !c.is_finite() || *c <= 0.0 {
            return Err(PricingError::InvalidScenario(format!(
                "{name} must be positive, got {c}"
            )));
        }
    }
    if let TimeFunction::Table(knots) = f {
        if knots.is_empty() {
            return Err(PricingError::InvalidScenario(format!("{name} table is empty")));
        }
        for pair in knots.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(PricingError::InvalidScenario(format!(
                    "{name} table times must be strictly increasing"
                )));
            }
            let increasing = pair[1].1 >= pair[0].1;
            let ok = match direction {
                Monotonicity::NonIncreasing => !increasing || pair[1].1 == pair[0].1,
                Monotonicity::NonDecreasing => increasing,
            };
            if !ok {
                return Err(PricingError::InvalidScenario(format!(
                    "{name} table has the wrong monotonicity for its role"
                )));
            }
        }
        if knots[0].0 > 0.0 || knots[knots.len() - 1].0 < horizon {
            return Err(PricingError::InvalidScenario(format!(
                "{name} table must cover [0, {horizon}]"
            )));
        }
        for (t, v) in knots {
            if !t.is_finite() || !v.is_finite() || *v <= 0.0 {
                return Err(PricingError::InvalidScenario(format!(
                    "{name} table entries must be finite and positive"
                )));
            }
        }
    }
    Ok(())
}

fn classify(phi: &TimeFunction, kappa: &TimeFunction) -> ZetaForm {
    // Constants and exponentials compose into a single exponential; anything
    // involving a table falls back to quadrature.
    let part = |f: &TimeFunction| -> Option<(f64, f64)> {
        match f {
            TimeFunction::Constant(c) => Some((*c, 0.0)),
            TimeFunction::Exponential { rate } => Some((1.0, *rate)),
            TimeFunction::Table(_) => None,
        }
    };
    match (part(phi), part(kappa)) {
        (Some((c1, r1)), Some((c2, r2))) => {
            let coeff = c1 * c2;
            let rate = r1 + r2;
            if rate == 0.0 {
                ZetaForm::Constant(coeff)
            } else {
                ZetaForm::Exponential { coeff, rate }
            }
        }
        _ => ZetaForm::Numeric,
    }
}
