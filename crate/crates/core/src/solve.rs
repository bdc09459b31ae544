//! Safeguarded scalar root finding: monotone bracketing with Newton polish.

use crate::error::{Error, Result};

/// Solve `f(x) = target` for a strictly monotone `f` on `[lo, hi]`.
///
/// `f` returns `(value, derivative)`. Newton steps are taken whenever they
/// stay inside the current bracket, otherwise the step falls back to
/// bisection. Convergence is declared on the residual: `|f(x) - target| <= tol`.
pub fn monotone_root<F>(mut f: F, lo: f64, hi: f64, target: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let max_iter = 200;
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    let increasing = fhi >= flo;
    let (mut lo, mut hi) = (lo, hi);
    // Allow target to sit on the closure of the range.
    let (rmin, rmax) = if increasing { (flo, fhi) } else { (fhi, flo) };
    if target < rmin - 1e-12 || target > rmax + 1e-12 {
        return Err(Error::Domain(format!(
            "target {target} outside branch range [{rmin}, {rmax}]"
        )));
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        let resid = fx - target;
        if resid.abs() <= tol {
            return Ok(x);
        }
        // shrink the bracket
        let below = if increasing { fx < target } else { fx > target };
        if below {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - resid / dfx;
        x = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < f64::EPSILON * (1.0 + x.abs()) {
            let (fx, _) = f(x);
            if (fx - target).abs() <= tol.max(1e-12) {
                return Ok(x);
            }
            break;
        }
    }
    let (fx, _) = f(x);
    if (fx - target).abs() <= tol.max(1e-12) {
        return Ok(x);
    }
    Err(Error::NoConvergence {
        context: format!("monotone root for target {target}"),
        lo,
        hi,
    })
}

/// Same as [`monotone_root`] but starting from a caller-provided seed,
/// useful when consecutive solves have nearby solutions (marker chains).
pub fn monotone_root_seeded<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    target: f64,
    tol: f64,
    seed: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut x = seed.clamp(lo, hi);
    for _ in 0..12 {
        let (fx, dfx) = f(x);
        if (fx - target).abs() <= tol {
            return Ok(x);
        }
        if dfx == 0.0 {
            break;
        }
        let next = x - (fx - target) / dfx;
        if !(lo..=hi).contains(&next) {
            break;
        }
        x = next;
    }
    monotone_root(f, lo, hi, target, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_root_of_increasing_cubic() {
        let f = |x: f64| (x * x * x + x, 3.0 * x * x + 1.0);
        let x = monotone_root(f, 0.0, 2.0, 1.2, 1e-14).unwrap();
        assert!((x * x * x + x - 1.2).abs() <= 1e-14);
    }

    #[test]
    fn finds_root_of_decreasing_branch() {
        // (1-x)/x on [1/2, 1], target 0.5 -> x = 2/3
        let f = |x: f64| ((1.0 - x) / x, -1.0 / (x * x));
        let x = monotone_root(f, 0.5, 1.0, 0.5, 1e-15).unwrap();
        assert!((x - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_target_outside_range() {
        let f = |x: f64| (x, 1.0);
        assert!(monotone_root(f, 0.0, 1.0, 2.0, 1e-14).is_err());
    }
}
