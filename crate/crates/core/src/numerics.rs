//! Small numeric helpers: adaptive quadrature and bracketed root finding.
//!
//! Everything here works on plain `f64` closures. The routines are tuned for
//! the smooth, well-scaled integrands and monotone residuals that show up in
//! pricing computations, not for general-purpose scientific use.

/// Relative tolerance used for quadrature when a caller does not override it.
pub const QUAD_REL_TOL: f64 = 1e-9;

/// Maximum bisection iterations before giving up.
pub const BISECT_MAX_ITER: usize = 200;

/// Integrates `f` over `[a, b]` with adaptive Simpson refinement.
///
/// The error target is `rel_tol` relative to the magnitude of the whole
/// integral (with a small absolute floor so an integral near zero still
/// terminates).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let tol = rel_tol * whole.abs().max(1e-12);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        // Richardson correction of the two-panel estimate.
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Outcome of a bisection run that could not start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketError {
    /// `f(lo)` and `f(hi)` have the same sign, so no root is bracketed.
    NoSignChange,
}

/// Finds a root of `f` on `[lo, hi]` by bisection.
///
/// The endpoints may be passed in either order. Returns the midpoint once the
/// bracket width drops below `x_tol` (absolute) or an endpoint evaluates to
/// exactly zero. The function must change sign across the bracket.
pub fn bisect<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    x_tol: f64,
) -> Result<f64, BracketError> {
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(BracketError::NoSignChange);
    }
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= x_tol {
            return Ok(mid);
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        // Simpson's rule integrates cubics exactly; the adaptive driver should
        // terminate at the first level.
        let f = |x: f64| 3.0 * x * x * x - x + 2.0;
        let got = adaptive_simpson(&f, 0.0, 2.0, 1e-9);
        let want = 3.0 / 4.0 * 16.0 - 2.0 + 4.0;
        assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
    }

    #[test]
    fn simpson_handles_exponential_decay() {
        let f = |x: f64| (-0.3 * x).exp();
        let got = adaptive_simpson(&f, 0.0, 10.0, 1e-9);
        let want = (1.0 - (-3.0f64).exp()) / 0.3;
        assert!((got - want).abs() / want < 1e-9);
    }

    #[test]
    fn simpson_empty_interval_is_zero() {
        assert_eq!(adaptive_simpson(&|x: f64| x.sin(), 4.0, 4.0, 1e-9), 0.0);
    }

    #[test]
    fn simpson_reversed_interval_changes_sign() {
        let f = |x: f64| x * x;
        let forward = adaptive_simpson(&f, 0.0, 3.0, 1e-10);
        let backward = adaptive_simpson(&f, 3.0, 0.0, 1e-10);
        assert!((forward + backward).abs() < 1e-9);
    }

    #[test]
    fn bisect_finds_sqrt_two() {
        let root = bisect(&|x: f64| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((root - 2.0f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn bisect_accepts_reversed_bracket() {
        let root = bisect(&|x: f64| x - 1.5, 3.0, 0.0, 1e-12).unwrap();
        assert!((root - 1.5).abs() < 1e-10);
    }

    #[test]
    fn bisect_rejects_unbracketed_root() {
        let err = bisect(&|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12).unwrap_err();
        assert_eq!(err, BracketError::NoSignChange);
    }

    #[test]
    fn bisect_returns_exact_endpoint_root() {
        let root = bisect(&|x: f64| x - 2.0, 2.0, 5.0, 1e-12).unwrap();
        assert_eq!(root, 2.0);
    }
}
