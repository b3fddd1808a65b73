//! Bracketed scalar root finding: bisection with a safeguarded secant step.

use crate::error::{Error, Result};

/// Refine a root of `f` inside `[lo, hi]` where `f(lo)` and `f(hi)` have
/// opposite signs. Stops when `|f| <= f_tol` or the bracket collapses to a
/// few ulps. The secant step is taken only when it lands strictly inside the
/// current bracket, otherwise the midpoint is used.
pub(crate) fn refine(
    f: &mut dyn FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    mut fhi: f64,
    f_tol: f64,
) -> Result<f64> {
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::BracketFailure(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..240 {
        // Secant candidate, safeguarded to the interior.
        let denom = fhi - flo;
        let mut cand = if denom != 0.0 {
            hi - fhi * (hi - lo) / denom
        } else {
            0.5 * (lo + hi)
        };
        let width = hi - lo;
        if !(cand > lo + 1e-3 * width && cand < hi - 1e-3 * width) {
            cand = 0.5 * (lo + hi);
        }
        let fc = f(cand);
        x = cand;
        if fc.abs() <= f_tol {
            return Ok(cand);
        }
        if fc.signum() == flo.signum() {
            lo = cand;
            flo = fc;
        } else {
            hi = cand;
            fhi = fc;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(1e-300) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Ok(x)
}

/// Scan `grid` (assumed ordered in the search direction) for the first
/// adjacent pair where `f` changes sign; returns `(lo, hi, flo, fhi)`.
pub(crate) fn scan_sign_change(
    f: &mut dyn FnMut(f64) -> f64,
    grid: impl Iterator<Item = f64>,
) -> Option<(f64, f64, f64, f64)> {
    let mut prev: Option<(f64, f64)> = None;
    for x in grid {
        let fx = f(x);
        if !fx.is_finite() {
            prev = None;
            continue;
        }
        if let Some((px, pfx)) = prev {
            if pfx == 0.0 {
                return Some((px, px, 0.0, 0.0));
            }
            if pfx.signum() != fx.signum() {
                return Some((px, x, pfx, fx));
            }
        }
        prev = Some((x, fx));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refines_simple_root() {
        let mut f = |x: f64| x * x - 2.0;
        let r = refine(&mut f, 0.0, 2.0, -2.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn scan_finds_bracket() {
        let mut f = |x: f64| x.tan() - 1.0;
        let grid = (0..100).map(|k| -0.7 + 0.02 * k as f64);
        let (lo, hi, flo, fhi) = scan_sign_change(&mut f, grid).unwrap();
        assert!(flo < 0.0 && fhi > 0.0);
        assert!(lo < std::f64::consts::FRAC_PI_4 && hi > std::f64::consts::FRAC_PI_4);
    }
}
