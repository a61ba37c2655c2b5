use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the analytical model is evaluated in.
///
/// Every formula in this crate is written against this trait so the same code
/// runs in `f32` for quick sweeps and `f64` for the reference numbers.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for the constants used in this crate.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance scaled to the precision of the scalar type: `max(tol, k * eps)`.
    #[inline]
    fn tol(tol: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(64.0);
        Self::lit(tol).max(floor)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `1 - e^{-x}(1 + x)`, the probability that a ready mini-slot starts a
/// collision. Evaluated by its Taylor tail for small `x` where the direct
/// form cancels.
pub(crate) fn collision_mass<T: Real>(x: T) -> T {
    if x < T::lit(0.5) {
        let mut term = x * x / T::lit(2.0);
        let mut sum = term;
        let mut k = 3usize;
        while term > sum * T::epsilon() && k < 60 {
            term = term * x / T::from_count(k);
            sum += term;
            k += 1;
        }
        sum * (-x).exp()
    } else {
        -(-x).exp_m1() - x * (-x).exp()
    }
}
