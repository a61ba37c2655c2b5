//! Scalar bracketing solvers shared by the stability and equilibrium code.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracketed<T> {
    pub root: T,
    pub iterations: usize,
}

/// Bisection on a sign change of `f` over `[lo, hi]`.
///
/// Stops when the bracket is narrower than `x_tol` (absolute, or relative to
/// the midpoint when that is larger), when `|f|` drops below `f_tol`, or after
/// `max_iter` halvings. Returns `None` if the end points do not bracket a root.
pub fn bisect<T: Real>(
    mut f: impl FnMut(T) -> T,
    mut lo: T,
    mut hi: T,
    x_tol: T,
    f_tol: T,
    max_iter: usize,
) -> Option<Bracketed<T>> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == T::zero() {
        return Some(Bracketed { root: lo, iterations: 0 });
    }
    if f_hi == T::zero() {
        return Some(Bracketed { root: hi, iterations: 0 });
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return None;
    }
    let half = T::lit(0.5);
    for it in 1..=max_iter {
        let mid = lo + (hi - lo) * half;
        if mid == lo || mid == hi {
            // bracket is down to adjacent floats
            return Some(Bracketed { root: mid, iterations: it });
        }
        let f_mid = f(mid);
        if f_mid.abs() < f_tol || f_mid == T::zero() {
            return Some(Bracketed { root: mid, iterations: it });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= x_tol.max(x_tol * mid.abs()) {
            return Some(Bracketed { root: lo + (hi - lo) * half, iterations: it });
        }
    }
    Some(Bracketed { root: lo + (hi - lo) * half, iterations: max_iter })
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_max<T: Real>(mut f: impl FnMut(T) -> T, mut lo: T, mut hi: T, x_tol: T) -> T {
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut c = hi - (hi - lo) * inv_phi;
    let mut d = lo + (hi - lo) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (hi - lo).abs() <= x_tol {
            break;
        }
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - (hi - lo) * inv_phi;
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + (hi - lo) * inv_phi;
            fd = f(d);
        }
    }
    (lo + hi) * T::lit(0.5)
}
