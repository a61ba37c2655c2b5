//! Alternating-renewal model of the shared channel.
//!
//! Aggregate attempts of all HOL packets are Poisson with `x = aG` attempts
//! per ready mini-slot. A ready mini-slot is idle, starts a successful
//! period of length `T_S`, or starts a collision period of length `T_C`.

use crate::error::{ModelError, Result};
use crate::params::SystemParams;
use crate::scalar::{collision_mass, Real};

/// Channel operating point at attempt rate `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPoint<T> {
    /// Attempts per mini-slot, `aG`.
    pub x: T,
    /// Success probability of a tagged transmission, `e^{-x}`.
    pub p: T,
    /// Probability of at least one attempt in a ready mini-slot.
    pub p_t: T,
    /// Probability that a started period is a success.
    pub p_s: T,
    /// Probability that the channel is available in a mini-slot.
    pub alpha: T,
    /// Probability that the channel stays idle for `T_D - a`.
    pub alpha0: T,
}

fn check_rate<T: Real>(x: T) -> Result<()> {
    if x < T::zero() || x.is_nan() {
        return Err(ModelError::NegativeAttemptRate(x.as_f64()));
    }
    Ok(())
}

/// `P_t = 1 - e^{-x}`.
pub fn attempt_probability<T: Real>(x: T) -> Result<T> {
    check_rate(x)?;
    Ok(-(-x).exp_m1())
}

/// `P_s = x e^{-x} / (1 - e^{-x})`, with the limit `1` at `x = 0` and `0`
/// as `x` grows without bound.
pub fn success_probability_cond<T: Real>(x: T) -> Result<T> {
    check_rate(x)?;
    if x == T::zero() {
        return Ok(T::one());
    }
    // x / (e^x - 1) avoids 0/0 near zero and overflow far out
    let em1 = x.exp_m1();
    if em1.is_infinite() {
        return Ok(T::zero());
    }
    Ok(x / em1)
}

/// `p = e^{-x}`.
pub fn success_probability<T: Real>(x: T) -> Result<T> {
    check_rate(x)?;
    Ok((-x).exp())
}

/// Mean cycle length per ready mini-slot: `a(1-P_t) + T_S P_t P_s + T_C P_t (1-P_s)`.
fn cycle_length<T: Real>(params: &SystemParams<T>, x: T, p: T) -> T {
    params.a * p + params.t_s * x * p + params.t_c * collision_mass(x)
}

/// `alpha^{(T_D - a)/a}`; a real power so microsecond mode works unchanged.
fn difs_idle<T: Real>(params: &SystemParams<T>, alpha: T) -> T {
    alpha.powf(params.act_slots())
}

/// `(alpha, alpha0)` at attempt rate `x`.
pub fn availability<T: Real>(params: &SystemParams<T>, x: T) -> Result<(T, T)> {
    let c = ChannelPoint::at(params, x)?;
    Ok((c.alpha, c.alpha0))
}

impl<T: Real> ChannelPoint<T> {
    /// Evaluates every channel quantity at `x`.
    pub fn at(params: &SystemParams<T>, x: T) -> Result<Self> {
        check_rate(x)?;
        Ok(Self::assemble(params, x, (-x).exp()))
    }

    /// Builds the point from a given success probability `p` in `(0, 1]`.
    ///
    /// Used where `p` is the primary unknown, so that `p + q - 1` is carried
    /// without the rounding of `exp(-x)`.
    pub fn from_success(params: &SystemParams<T>, p: T) -> Result<Self> {
        if !(p > T::zero() && p <= T::one()) {
            return Err(ModelError::InvalidParams(format!(
                "success probability {p} outside (0, 1]"
            )));
        }
        let x = (-p.ln()).max(T::zero());
        Ok(Self::assemble(params, x, p))
    }

    fn assemble(params: &SystemParams<T>, x: T, p: T) -> Self {
        let (p_t, p_s) = if x == T::zero() {
            (T::zero(), T::one())
        } else {
            let p_t = -(-x).exp_m1();
            let p_s = if p_t > T::zero() { (x * p / p_t).min(T::one()) } else { T::zero() };
            (p_t, p_s)
        };
        let alpha = params.a / cycle_length(params, x, p);
        let alpha0 = difs_idle(params, alpha);
        Self { x, p, p_t, p_s, alpha, alpha0 }
    }

    /// `(pi_idle, pi_suc, pi_col)` for a ready mini-slot.
    pub fn slot_outcomes(&self) -> (T, T, T) {
        (self.p, self.x * self.p, collision_mass(self.x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{Mechanism, UnitMode};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn basic() -> SystemParams<f64> {
        SystemParams::preset(Mechanism::Basic, UnitMode::SlotUnits)
    }

    #[test]
    fn attempt_probability_examples() {
        assert_eq!(attempt_probability(0.0f64).unwrap(), 0.0);
        assert_relative_eq!(
            attempt_probability(std::f64::consts::LN_2).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_relative_eq!(attempt_probability(2.1f64).unwrap(), 0.8775435717470181, epsilon = 1e-13);
        assert!(attempt_probability(-0.1f64).is_err());
    }

    #[test]
    fn conditional_success_examples() {
        assert_eq!(success_probability_cond(0.0f64).unwrap(), 1.0);
        assert_relative_eq!(success_probability_cond(1e-9f64).unwrap(), 1.0, epsilon = 1e-8);
        assert_relative_eq!(success_probability_cond(2.1f64).unwrap(), 0.2930435680, epsilon = 1e-9);
        assert!(success_probability_cond(800.0f64).unwrap() < 1e-300);
        assert_eq!(success_probability_cond(f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn success_probability_examples() {
        assert_eq!(success_probability(0.0f64).unwrap(), 1.0);
        assert_relative_eq!(
            success_probability(std::f64::consts::LN_2).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_relative_eq!(success_probability(2.1f64).unwrap(), 0.1224564282529819, epsilon = 1e-14);
    }

    #[test]
    fn availability_examples() {
        let (a, a0) = availability(&basic(), 0.0).unwrap();
        assert_eq!((a, a0), (1.0, 1.0));

        let x = 2.1f64;
        let e = (-x).exp();
        let expected = 1.0 / (e + 180.0 * x * e + 175.0 * (1.0 - e - x * e));
        let (a, a0) = availability(&basic(), x).unwrap();
        assert_relative_eq!(a, expected, max_relative = 1e-13);
        assert_relative_eq!(a, 0.00645, max_relative = 5e-3);
        assert_relative_eq!(a0, a * a, max_relative = 1e-13);
        assert_relative_eq!(a0, 4.16e-5, max_relative = 5e-3);

        let rts = SystemParams::preset(Mechanism::RtsCts, UnitMode::SlotUnits);
        assert!(availability(&rts, x).unwrap().0 > a);
    }

    #[test]
    fn micro_mode_uses_real_power() {
        let p = SystemParams::<f64>::preset(Mechanism::Basic, UnitMode::Microseconds);
        let c = ChannelPoint::at(&p, 0.5).unwrap();
        assert_relative_eq!(c.alpha0, c.alpha.powf(1.56), max_relative = 1e-14);
    }

    #[test]
    fn from_success_agrees_with_at() {
        let c1 = ChannelPoint::at(&basic(), 0.37).unwrap();
        let c2 = ChannelPoint::from_success(&basic(), c1.p).unwrap();
        assert_relative_eq!(c1.alpha, c2.alpha, max_relative = 1e-13);
        assert_relative_eq!(c1.x, c2.x, max_relative = 1e-13);
        assert!(ChannelPoint::from_success(&basic(), 0.0).is_err());
    }

    #[test]
    fn single_precision_evaluates() {
        let p = SystemParams::<f32>::preset(Mechanism::Basic, UnitMode::SlotUnits);
        let c = ChannelPoint::at(&p, 2.1f32).unwrap();
        assert!((c.alpha - 0.00645).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn outcomes_partition_unity(x in 0.0f64..40.0) {
            let c = ChannelPoint::at(&basic(), x).unwrap();
            let (i, s, k) = c.slot_outcomes();
            prop_assert!((i + s + k - 1.0).abs() < 1e-12);
            prop_assert!((c.p_t * c.p_s - x * (-x).exp()).abs() < 1e-14);
            for v in [c.p, c.p_t, c.p_s, c.alpha, c.alpha0] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(c.alpha > 0.0);
        }

        #[test]
        fn availability_monotone_sides(x in 0.0f64..60.0, dx in 1e-4f64..1.0) {
            // the cycle length peaks at x = (T_S - a)/(T_S - T_C); alpha is
            // non-increasing below that point and non-decreasing above it
            for mech in [Mechanism::Basic, Mechanism::RtsCts] {
                let p = SystemParams::preset(mech, UnitMode::SlotUnits);
                let turn = (p.t_s - p.a) / (p.t_s - p.t_c);
                let a1 = availability(&p, x).unwrap().0;
                let a2 = availability(&p, x + dx).unwrap().0;
                if x + dx <= turn {
                    prop_assert!(a2 <= a1 * (1.0 + 1e-12));
                } else if x >= turn {
                    prop_assert!(a2 >= a1 * (1.0 - 1e-12));
                }
            }
        }
    }
}
