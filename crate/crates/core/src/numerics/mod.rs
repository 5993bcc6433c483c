//! Shared numerical kernels: the lower branch of the Lambert W function,
//! a robust bisection, and the structured convex solver used by the
//! resource-allocation subproblems.

pub mod convex;

use crate::error::{Error, Result};

const INV_E: f64 = 1.0 / std::f64::consts::E;

/// Lower branch W_{-1} of the Lambert W function on [-1/e, 0).
///
/// Returns the solution w <= -1 of w * e^w = x. Asymptotic initial guess
/// polished by Halley iterations; falls back to bisection if the iteration
/// stalls.
pub fn lambert_w_m1(x: f64) -> Result<f64> {
    if !(x >= -INV_E && x < 0.0) {
        return Err(Error::Domain(format!(
            "lambert_w_m1 requires -1/e <= x < 0, got {x}"
        )));
    }
    if x == -INV_E {
        return Ok(-1.0);
    }

    let guess = if x < -0.25 {
        // branch-point series in p = -sqrt(2 (1 + e x))
        let p = -(2.0 * (1.0 + std::f64::consts::E * x)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0
    } else {
        // log asymptotics towards x -> 0^-
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };

    let mut w = guess.min(-1.0 - 1e-12);
    for _ in 0..60 {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            return Ok(w);
        }
        let fp = (1.0 + w) * ew;
        let fpp = (2.0 + w) * ew;
        if fp == 0.0 || !fp.is_finite() {
            break;
        }
        let half = f / fp;
        let step = half / (1.0 - half * fpp / (2.0 * fp));
        let next = (w - step).min(-1.0);
        if !next.is_finite() {
            break;
        }
        if (next - w).abs() <= 1e-15 * w.abs() {
            return Ok(next);
        }
        w = next;
    }
    // verify the polished value before trusting it
    if (w * w.exp() - x).abs() <= 1e-12 * x.abs() {
        return Ok(w);
    }

    // bisection fallback: w e^w is decreasing on (-inf, -1]
    let mut lo: f64 = -2.0;
    while lo * lo.exp() - x < 0.0 {
        lo *= 2.0;
        if lo < -746.0 {
            lo = -746.0;
            break;
        }
    }
    let root = bisect(|w| w * w.exp() - x, lo, -1.0, 1e-15)?;
    Ok(root)
}

/// Root of a sign-changing monotone function on [lo, hi] by bisection.
/// Stops when the bracket width drops below `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(Error::NoSignChange { lo, hi });
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm * flo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Ok(0.5 * (lo + hi))
}
