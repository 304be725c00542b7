//! Bracketing root finder: bisection down to a narrow bracket, then a
//! guarded secant polish.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tol {
    /// Absolute bracket width at which bisection stops.
    pub abs: f64,
    /// Relative bracket width at which bisection stops.
    pub rel: f64,
    pub max_iter: usize,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { abs: 1e-13, rel: 0.0, max_iter: 400 }
    }
}

impl Tol {
    /// Resolve to the last representable bit.
    pub fn full() -> Self {
        Tol { abs: 0.0, rel: 0.0, max_iter: 2200 }
    }
}

/// Root of `f` in `[lo, hi]`; `f(lo)` and `f(hi)` must differ in sign (a zero
/// at either end is returned directly).
pub fn bracketed<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: Tol, context: &'static str) -> Result<f64> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.signum() != fhi.signum()) || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Bracket { lo, hi, context });
    }
    for _ in 0..tol.max_iter {
        let width = hi - lo;
        let mid = lo + 0.5 * width;
        if width <= tol.abs.max(tol.rel * mid.abs()) || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let mut best = if flo.abs() < fhi.abs() { (lo, flo) } else { (hi, fhi) };
    // secant through the final bracket, accepted only if it stays inside and
    // improves the residual
    if fhi != flo {
        let s = lo - flo * (hi - lo) / (fhi - flo);
        if s > lo && s < hi {
            let fs = f(s);
            if fs.abs() < best.1.abs() {
                best = (s, fs);
            }
        }
    }
    Ok(best.0)
}
