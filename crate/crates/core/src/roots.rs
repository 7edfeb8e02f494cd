//! Bracketing scalar solvers for increasing functions.

use crate::error::{Error, Result};

const MAX_NEWTON_ITER: usize = 200;

/// Doubles `hi` until `f(hi) >= 0`, moving `lo` up behind it.
///
/// `f` must be increasing with `f(lo) < 0`. Returns the bracket and `f(hi)`.
pub(crate) fn expand_upper(
    solver: &'static str,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    max_doublings: u32,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    for _ in 0..=max_doublings {
        let v = f(hi)?;
        if v >= 0.0 {
            return Ok((lo, hi));
        }
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            break;
        }
    }
    Err(Error::Solver {
        solver,
        reason: "bracket expansion exceeded the overflow guard",
        lo,
        hi,
        target,
    })
}

/// Safeguarded Newton iteration on a bracket `[lo, hi]` with
/// `f(lo) < 0 <= f(hi)`, `f` increasing. Falls back to bisection whenever
/// the Newton step leaves the bracket. Stops when the step is below
/// `max(rel_tol * |x|, abs_tol)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn newton_bracketed(
    solver: &'static str,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    start: f64,
    rel_tol: f64,
    abs_tol: f64,
    mut fdf: impl FnMut(f64) -> Result<(f64, f64)>,
) -> Result<f64> {
    let mut x = if start > lo && start < hi {
        start
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..MAX_NEWTON_ITER {
        let (fx, dfx) = fdf(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let tol = (rel_tol * next.abs()).max(abs_tol);
        if (next - x).abs() <= tol || hi - lo <= tol {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Solver {
        solver,
        reason: "did not converge",
        lo,
        hi,
        target,
    })
}
