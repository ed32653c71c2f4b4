//! Scalar root finding and minimisation on bounded intervals.

use crate::error::{domain, Error, Result};

pub const MAX_ITERATIONS: usize = 200;

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs (or
/// one vanishes). Stops once the bracket is narrower than `tol` or cannot be
/// split further in floating point, so `tol = 0` bisects to full precision.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::Numeric {
            message: format!("no sign change to bisect (f(lo)={f_lo}, f(hi)={f_hi})"),
            iterations: 0,
            lo,
            hi,
        });
    }
    for _ in 0..MAX_ITERATIONS {
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numeric {
        message: format!("bisection did not reach tolerance {tol}"),
        iterations: MAX_ITERATIONS,
        lo,
        hi,
    })
}

/// Golden-section search for the minimiser of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(domain(format!("empty search interval [{lo}, {hi}]")));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..MAX_ITERATIONS {
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    Err(Error::Numeric {
        message: format!("golden-section search did not reach tolerance {tol}"),
        iterations: MAX_ITERATIONS,
        lo,
        hi,
    })
}

/// `count` points `1/(1+exp(-t))` for `t` evenly spaced on `[t_lo, t_hi]`;
/// dense near both ends of the unit interval.
pub fn logistic_grid(count: usize, t_lo: f64, t_hi: f64) -> Vec<f64> {
    let step = if count > 1 { (t_hi - t_lo) / (count - 1) as f64 } else { 0.0 };
    (0..count)
        .map(|i| {
            let t = t_lo + step * i as f64;
            1.0 / (1.0 + (-t).exp())
        })
        .collect()
}

/// `count` evenly spaced points on `[lo, hi]`.
pub fn linear_grid(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| if i + 1 == count { hi } else { lo + step * i as f64 }).collect()
}

/// Indices `i` where `values[i]` and `values[i+1]` have strictly opposite
/// signs, treating exact zeros as belonging to the preceding sign.
pub fn sign_changes(values: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut last: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        if let Some((j, s)) = last {
            if s != v.signum() {
                out.push(j);
            }
        }
        last = Some((i, v.signum()));
    }
    out
}
