use super::cumulative::CumulativeIntegral;
use crate::error::{Error, Result};

/// Default residual tolerance for [`invert_monotone`].
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Solves `g(x) = target` for a strictly increasing `g` on `[lo, hi]`.
///
/// Regula falsi with the Illinois modification, falling back to bisection
/// whenever the secant step stalls. Stops once
/// `|g(x) - target| <= tol * max(1, |target|)` or the bracket cannot be
/// split any further in floating point.
pub fn solve_increasing<G: Fn(f64) -> f64>(
    g: G,
    target: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = g(a) - target;
    let mut fb = g(b) - target;
    if fa > 0.0 || fb < 0.0 {
        return Err(Error::OutOfRange { target, low: fa + target, high: fb + target });
    }
    let accept = tol * target.abs().max(1.0);
    if fa.abs() <= accept {
        return Ok(a);
    }
    if fb.abs() <= accept {
        return Ok(b);
    }
    // side: -1 when a was retained last step, +1 when b was.
    let mut side = 0i8;
    for iter in 0..400 {
        let mut x = if iter % 4 == 3 {
            0.5 * (a + b)
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        if x <= a || x >= b {
            // a and b are adjacent floats.
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
        let fx = g(x) - target;
        if fx.abs() <= accept {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

/// Inverts a tabulated increasing integral: returns `x` with
/// `|g(x) - target| <= tol * max(1, |target|)`.
pub fn invert_monotone(g: &CumulativeIntegral, target: f64, tol: f64) -> Result<f64> {
    let sums = g.partial_sums();
    let bps = g.breakpoints();
    let total = g.total();
    if !(target >= 0.0 && target <= total) {
        return Err(Error::OutOfRange { target, low: 0.0, high: total });
    }
    // Narrow the bracket to one stored panel before iterating.
    let k = sums.partition_point(|&s| s <= target).clamp(1, sums.len() - 1);
    solve_increasing(|x| g.eval(x), target, bps[k - 1], bps[k], tol)
}
