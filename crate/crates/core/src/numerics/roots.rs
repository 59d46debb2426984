//! Scalar fixed points and bracketed root finding.

use crate::error::{PfError, Result};

#[derive(Debug, Clone, Copy)]
pub struct FixedPoint {
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Iterate x <- map(x) until |x - map(x)| <= tol.
///
/// Divergence is flagged when the residual grows well past its starting
/// value; the maps used here are strong contractions so this only fires on
/// caller error.
pub fn fixed_point<F: Fn(f64) -> f64>(
    map: F,
    x0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPoint> {
    let mut x = x0;
    let mut res0 = f64::INFINITY;
    for it in 0..max_iter {
        let next = map(x);
        let res = (next - x).abs();
        if !res.is_finite() {
            return Err(PfError::FixedPointDiverged {
                iterations: it,
                residual: res,
            });
        }
        if it == 0 {
            res0 = res;
        } else if res > 10.0 * (res0 + 1.0) {
            return Err(PfError::FixedPointDiverged {
                iterations: it,
                residual: res,
            });
        }
        x = next;
        if res <= tol {
            return Ok(FixedPoint {
                value: x,
                iterations: it + 1,
                residual: res,
            });
        }
    }
    Err(PfError::FixedPointIterationCap {
        iterations: max_iter,
        residual: (map(x) - x).abs(),
    })
}

/// Bisection on a sign change of `f` over [lo, hi].
pub fn bisect_root<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(PfError::BracketSignError { lo, hi });
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol {
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
