use super::Tolerance;
use crate::error::{Error, Result};

/// Solves `g(x) = target` for strictly increasing `g` on `[lo, hi]` by bisection.
///
/// Stops when `|g(x) - target| <= tol.abs` or the bracket is narrower than
/// `tol.abs`.
pub fn bisect_monotone<G: Fn(f64) -> f64>(
    g: G,
    target: f64,
    lo: f64,
    hi: f64,
    tol: Tolerance,
) -> Result<f64> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain(format!("invalid bracket [{lo}, {hi}]")));
    }
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo <= target && target <= ghi) {
        return Err(Error::domain(format!(
            "target {target} outside bracket image [{glo}, {ghi}]"
        )));
    }
    if glo == target {
        return Ok(lo);
    }
    if ghi == target {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..tol.max_iter.max(1) {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Ok(m);
        }
        let gm = g(m);
        if (gm - target).abs() <= tol.abs || b - a <= tol.abs {
            return Ok(m);
        }
        if gm < target {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}
