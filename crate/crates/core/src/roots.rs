//! Bracketed root finding for monotone scalar equations.

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
#[error("no bracket for target {target}: f stays below it up to r = {reached:e}")]
pub struct BracketError {
    pub target: f64,
    pub reached: f64,
}

const MAX_DOUBLINGS: usize = 1100;
const MAX_BISECTIONS: usize = 2000;

/// Solve `f(r) = target` on `r ≥ 0` for nondecreasing `f` with `f(0) ≤ target`.
///
/// The upper end of the bracket doubles from 1 until `f` reaches the
/// target, then bisection runs until the bracket is `rtol` wide relative to
/// its upper end. The returned root is the secant point of the last bracket.
pub fn solve_increasing(f: impl Fn(f64) -> f64, target: f64, rtol: f64) -> Result<f64, BracketError> {
    let (mut lo, mut flo) = (0.0, f(0.0));
    if flo >= target {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    let mut fhi = f(hi);
    let mut doublings = 0;
    while !(fhi >= target) {
        if doublings == MAX_DOUBLINGS || !hi.is_finite() {
            return Err(BracketError { target, reached: hi });
        }
        (lo, flo) = (hi, fhi);
        hi *= 2.0;
        fhi = f(hi);
        doublings += 1;
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= rtol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm < target {
            (lo, flo) = (mid, fm);
        } else {
            (hi, fhi) = (mid, fm);
        }
    }
    if fhi > flo {
        Ok((lo + (target - flo) * (hi - lo) / (fhi - flo)).clamp(lo, hi))
    } else {
        Ok(hi)
    }
}
