//! Numeric evaluation of the service-time generating function for a finite
//! cut-off.
//!
//! The recurrence is solved from phase `K` downwards while carrying value,
//! first and second derivative together, so the moments at `z = 1` are exact
//! up to rounding instead of finite-difference estimates.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::channel::ChannelPoint;
use crate::error::{ModelError, Result};
use crate::hol::waiting_duration;
use crate::params::SystemParams;
use crate::scalar::Real;

/// Second-order forward-mode jet `(f, f', f'')` in the variable `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T> {
    pub v: T,
    pub d1: T,
    pub d2: T,
}

impl<T: Real> Jet<T> {
    pub fn constant(v: T) -> Self {
        Self { v, d1: T::zero(), d2: T::zero() }
    }

    /// `z^n` evaluated at `z`.
    pub fn power(z: T, n: u32) -> Self {
        let nf = T::from_u32(n).expect("exponent fits scalar");
        let v = z.powi(n as i32);
        let d1 = if n >= 1 { nf * z.powi(n as i32 - 1) } else { T::zero() };
        let d2 = if n >= 2 { nf * (nf - T::one()) * z.powi(n as i32 - 2) } else { T::zero() };
        Self { v, d1, d2 }
    }

    /// `1 - z^n`, exact zero at `z = 1`.
    pub fn one_minus_power(z: T, n: u32) -> Self {
        let p = Self::power(z, n);
        let nf = T::from_u32(n).expect("exponent fits scalar");
        Self { v: -(nf * z.ln()).exp_m1(), d1: -p.d1, d2: -p.d2 }
    }

    pub fn scale(self, c: T) -> Self {
        Self { v: self.v * c, d1: self.d1 * c, d2: self.d2 * c }
    }

    pub fn recip(self) -> Self {
        let inv = T::one() / self.v;
        Self {
            v: inv,
            d1: -self.d1 * inv * inv,
            d2: (T::lit(2.0) * self.d1 * self.d1 * inv - self.d2) * inv * inv,
        }
    }
}

impl<T: Real> Add for Jet<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl<T: Real> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }
}

impl<T: Real> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + T::lit(2.0) * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl<T: Real> Div for Jet<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

/// Integer sojourn counts and branch probabilities of the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgfSystem<T> {
    pub t_a: u32,
    pub t_s: u32,
    pub t_c: u32,
    pub t_w: u32,
    pub p: T,
    pub q: T,
    pub alpha: T,
    pub alpha0: T,
    pub cutoff: usize,
}

fn slot_count<T: Real>(v: T, name: &str) -> Result<u32> {
    let r = v.round();
    if !(r >= T::zero()) {
        return Err(ModelError::InvalidParams(format!("{name} = {v} must be non-negative")));
    }
    r.to_u32()
        .ok_or_else(|| ModelError::InvalidParams(format!("{name} = {v} is not a slot count")))
}

impl<T: Real> PgfSystem<T> {
    /// Discretizes a model operating point. `t_W` is rounded to the nearest
    /// mini-slot; the other counts are exact in slot mode and rounded in
    /// microsecond mode.
    pub fn from_model(
        params: &SystemParams<T>,
        ch: &ChannelPoint<T>,
        q: T,
        cutoff: usize,
    ) -> Result<Self> {
        let tw = waiting_duration(params, ch.p) / params.a;
        Ok(Self {
            t_a: slot_count(params.act_slots(), "t_A")?,
            t_s: slot_count(params.suc_slots(), "t_S")?,
            t_c: slot_count(params.col_slots(), "t_C")?,
            t_w: slot_count(tw, "t_W")?,
            p: ch.p,
            q,
            alpha: ch.alpha,
            alpha0: ch.alpha0,
            cutoff,
        })
    }

    fn validate(&self) -> Result<()> {
        let unit = |v: T| v > T::zero() && v <= T::one();
        if !(unit(self.p) && unit(self.q) && unit(self.alpha) && unit(self.alpha0)) {
            return Err(ModelError::InvalidParams("pgf probabilities must lie in (0, 1]".into()));
        }
        if self.cutoff == 0 {
            return Err(ModelError::InvalidParams("pgf cut-off must be >= 1".into()));
        }
        Ok(())
    }

    /// `Act(z)` with its first two derivatives, for `z` in `(0, 1]`.
    pub fn eval(&self, z: T) -> Result<Jet<T>> {
        self.validate()?;
        if !(z > T::zero() && z <= T::one()) {
            return Err(ModelError::InvalidParams(format!("z = {z} outside (0, 1]")));
        }
        let one = T::one();
        let (p, q, al, al0) = (self.p, self.q, self.alpha, self.alpha0);
        let zv = Jet::power(z, 1);
        let suc_path = Jet::power(z, 1 + self.t_s); // z * Suc(z)
        let col_path = Jet::power(z, 1 + self.t_c); // z * z^{t_C}

        let ensure = |den: Jet<T>, phase: usize| -> Result<Jet<T>> {
            if den.v > T::zero() && den.v.is_finite() {
                Ok(den)
            } else {
                Err(ModelError::SingularPgf { phase, z: z.as_f64() })
            }
        };

        // 1 - (1-alpha) z^{t_W+1} - alpha (1-q^i) z, rearranged as
        // (1 - z^{t_W+1}) - alpha z (1 - z^{t_W}) + alpha q^i z so that the
        // value at z = 1 is alpha q^i without cancellation
        let stay = Jet::one_minus_power(z, self.t_w + 1) - (zv * Jet::one_minus_power(z, self.t_w)).scale(al);

        let k = self.cutoff;
        // S_K also loops back through Col_K
        let qk = q.powi(k as i32);
        let den = stay
            + (zv * (Jet::constant(p) + Jet::one_minus_power(z, self.t_c).scale(one - p)))
                .scale(al * qk);
        let mut s = suc_path.scale(al * qk * p) / ensure(den, k)?;

        // S_i for i = K-1 .. 1, each fed by S_{i+1} through Col_i
        let mut qi = qk;
        for i in (1..k).rev() {
            qi = qi / q;
            let den = stay + zv.scale(al * qi);
            let num = suc_path.scale(al * qi * p) + col_path.scale(al * qi * (one - p)) * s;
            s = num / ensure(den, i)?;
        }
        let s1 = s;

        // S_0 exits to Col_0 -> S_1 or W_0 -> S_1
        let s0 = suc_path.scale(al * p)
            + col_path.scale(al * (one - p)) * s1
            + Jet::power(z, 1 + self.t_w).scale(one - al) * s1;
        let act = Jet::power(z, self.t_a) * s0.scale(al0)
            + Jet::power(z, self.t_a + self.t_w).scale(one - al0) * s1;
        Ok(act)
    }

    /// `(E[X], E[X^2])` in mini-slots from the derivatives at `z = 1`.
    pub fn moments(&self) -> Result<(T, T)> {
        let j = self.eval(T::one())?;
        Ok((j.d1, j.d2 + j.d1))
    }
}
