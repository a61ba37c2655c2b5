//! Steady state of the head-of-line packet chain.
//!
//! States: `Act` (first `T_D - a` of DIFS), `S_i` (sensing, one mini-slot),
//! `Col_i` (collision, `T_C - a`), `W_i` (waiting, `T_W`), `Suc`
//! (`T_S - T_D`). A packet in phase `i >= 1` transmits with probability
//! `q^i` in an available sensing slot. Probabilities here are time
//! averages, i.e. weighted by sojourn.

use crate::channel::ChannelPoint;
use crate::error::{ModelError, Result};
use crate::params::{BackoffConfig, Cutoff, SystemParams};
use crate::scalar::Real;

/// Longest phase profile materialized for an infinite cut-off.
pub const MAX_PROFILE_PHASES: usize = 200_000;

/// Time-average state probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct HolSteadyState<T> {
    pub b_act: T,
    pub b_suc: T,
    /// `b_s[i]` for phases `0..=K`.
    pub b_s: Vec<T>,
    pub b_w: Vec<T>,
    pub b_col: Vec<T>,
    /// Chain normalizer.
    pub normalizer: T,
    /// Waiting-state duration in time units.
    pub t_w: T,
    /// Largest phase listed. Equals `K` for a finite cut-off; for an infinite
    /// cut-off, the phase beyond which the geometric tail is negligible.
    pub cutoff: usize,
}

impl<T: Real> HolSteadyState<T> {
    pub fn total(&self) -> T {
        let sum = |v: &[T]| v.iter().fold(T::zero(), |acc, &b| acc + b);
        self.b_act + self.b_suc + sum(&self.b_s) + sum(&self.b_w) + sum(&self.b_col)
    }

    /// Mean return time to `Suc`, in units of `t_Suc`.
    pub fn mean_return_time(&self) -> T {
        T::one() / self.b_suc
    }
}

/// `T_W = p T_S + (1-p) T_C - a`.
pub fn waiting_duration<T: Real>(params: &SystemParams<T>, p: T) -> T {
    p * params.t_s + (T::one() - p) * params.t_c - params.a
}

fn recurrence_gap<T: Real>(p: T, q: T, x: T) -> Result<T> {
    let gap = p + q - T::one();
    if !(gap > T::zero()) {
        return Err(ModelError::NonRecurrent { p: p.as_f64(), q: q.as_f64(), x: Some(x.as_f64()) });
    }
    Ok(gap)
}

/// Chain normalizer with the recurrence gap `p + q - 1` passed explicitly,
/// so callers holding an exact gap avoid the cancellation in `p + q - 1`.
pub(crate) fn normalizer_with_gap<T: Real>(
    params: &SystemParams<T>,
    ch: &ChannelPoint<T>,
    q: T,
    gap: T,
    cutoff: Cutoff,
) -> T {
    let one = T::one();
    let (a, p, al, al0) = (params.a, ch.p, ch.alpha, ch.alpha0);
    let tw = waiting_duration(params, p);
    let head = (tw - al0 * al * tw + params.t_s + a * al0 - params.t_c) * al * p
        + (params.t_c - a) * al;
    let backlog = (one - p * al0 * al) * (a + tw - al * tw);
    let tail = match cutoff {
        // bracket / q -> p as K grows, since (1 - p)/q < 1
        Cutoff::Infinite => p / gap,
        Cutoff::Finite(k) => {
            let ratio = (one - p) / q;
            let bracket = p * q + (gap - p * q) * ratio.powi(k as i32 - 1);
            bracket / (q * gap)
        }
    };
    head + backlog * tail
}

/// Chain normalizer `D` at the given operating point.
pub fn chain_normalizer<T: Real>(
    params: &SystemParams<T>,
    ch: &ChannelPoint<T>,
    backoff: &BackoffConfig<T>,
) -> Result<T> {
    let gap = recurrence_gap(ch.p, backoff.q, ch.x)?;
    Ok(normalizer_with_gap(params, ch, backoff.q, gap, backoff.cutoff))
}

/// Phases materialized for an infinite cut-off: enough for the geometric
/// ratio `(1-p)/q` to fall below the scalar precision.
fn profile_length<T: Real>(p: T, q: T) -> usize {
    let ratio = (T::one() - p) / q;
    if ratio <= T::zero() {
        return 1;
    }
    let eps = T::epsilon() * T::epsilon();
    let n = (eps * (T::one() - ratio)).ln() / ratio.ln();
    n.ceil().to_usize().unwrap_or(MAX_PROFILE_PHASES).clamp(1, MAX_PROFILE_PHASES)
}

pub fn steady_state<T: Real>(
    params: &SystemParams<T>,
    ch: &ChannelPoint<T>,
    backoff: &BackoffConfig<T>,
) -> Result<HolSteadyState<T>> {
    let q = backoff.q;
    let (p, al, al0) = (ch.p, ch.alpha, ch.alpha0);
    let gap = recurrence_gap(p, q, ch.x)?;
    let d = normalizer_with_gap(params, ch, q, gap, backoff.cutoff);
    let one = T::one();
    let a = params.a;
    let tw = waiting_duration(params, p);
    let tc = params.t_c - a;
    let u = one - p * al * al0;

    let (k, terminal) = match backoff.cutoff {
        Cutoff::Finite(k) => (k, true),
        Cutoff::Infinite => (profile_length(p, q), false),
    };

    let mut b_s = Vec::with_capacity(k + 1);
    let mut b_w = Vec::with_capacity(k + 1);
    let mut b_col = Vec::with_capacity(k + 1);
    b_s.push(a * al0 * al * p / d);
    b_w.push(tw * al * p * (one - al * al0) / d);
    b_col.push(al * al * al0 * p * tc * (one - p) / d);

    let lost = one - p;
    // (1-p)^{i-1} q^{-i}, advanced by (1-p)/q per phase
    let mut geo = one / q;
    let mut lost_pow = lost;
    for i in 1..=k {
        // the last phase of a finite chain absorbs Col_K and loses the factor p
        let weight = if terminal && i == k { one } else { p };
        b_s.push(a * weight * u * geo / d);
        b_w.push(tw * weight * (one - al) * u * geo / d);
        b_col.push(al * weight * tc * u * lost_pow / d);
        geo = geo * lost / q;
        lost_pow = lost_pow * lost;
    }

    Ok(HolSteadyState {
        b_act: (params.t_d - a) * al * p / d,
        b_suc: params.t_suc() * al * p / d,
        b_s,
        b_w,
        b_col,
        normalizer: d,
        t_w: tw,
        cutoff: k,
    })
}

/// Offered load of one input queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfferedLoad<T> {
    pub rho: T,
    /// `rho > 1`: the queue cannot keep up.
    pub unstable: bool,
}

/// `rho = lambda D / (t_Suc alpha p)` for a per-node input rate `lambda`
/// in packets per `t_Suc`.
pub fn offered_load<T: Real>(
    params: &SystemParams<T>,
    ch: &ChannelPoint<T>,
    backoff: &BackoffConfig<T>,
    lambda: T,
) -> Result<OfferedLoad<T>> {
    if lambda < T::zero() {
        return Err(ModelError::InvalidParams(format!("input rate must be >= 0, got {lambda}")));
    }
    let d = chain_normalizer(params, ch, backoff)?;
    let rho = lambda * d / (params.t_suc() * ch.alpha * ch.p);
    Ok(OfferedLoad { rho, unstable: rho > T::one() })
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

    fn rts() -> SystemParams<f64> {
        SystemParams::preset(Mechanism::RtsCts, UnitMode::SlotUnits)
    }

    #[test]
    fn waiting_duration_examples() {
        assert_eq!(waiting_duration(&basic(), 1.0), 179.0);
        assert_eq!(waiting_duration(&basic(), 0.0), 174.0);
        assert_eq!(waiting_duration(&rts(), 0.5), 99.5);
    }

    #[test]
    fn non_recurrent_rejected() {
        let ch = ChannelPoint::at(&basic(), 0.7).unwrap(); // p ~ 0.497
        let b = BackoffConfig::infinite(0.5).unwrap();
        assert!(matches!(steady_state(&basic(), &ch, &b), Err(ModelError::NonRecurrent { .. })));
        let b = BackoffConfig::new(0.3, Cutoff::Finite(5)).unwrap();
        assert!(matches!(chain_normalizer(&basic(), &ch, &b), Err(ModelError::NonRecurrent { .. })));
    }

    #[test]
    fn short_chains_normalize() {
        let ch = ChannelPoint::at(&basic(), 0.2).unwrap();
        for k in 1..=4 {
            let b = BackoffConfig::new(0.5, Cutoff::Finite(k)).unwrap();
            let ss = steady_state(&basic(), &ch, &b).unwrap();
            assert_eq!(ss.b_s.len(), k + 1);
            assert_relative_eq!(ss.total(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn infinite_cutoff_normalizes() {
        let ch = ChannelPoint::at(&rts(), 0.1).unwrap();
        let ss = steady_state(&rts(), &ch, &BackoffConfig::infinite(0.3).unwrap()).unwrap();
        assert_relative_eq!(ss.total(), 1.0, epsilon = 1e-10);
        assert!(ss.cutoff > 3);
    }

    #[test]
    fn finite_normalizer_converges_to_infinite() {
        let p = basic();
        // (1-p)/q <= 0.9 with p + q > 1
        for &(x, q) in &[(0.05, 0.2), (0.3, 0.29), (0.01, 0.011), (1.0, 0.71)] {
            let ch = ChannelPoint::at(&p, x).unwrap();
            let inf = chain_normalizer(&p, &ch, &BackoffConfig::infinite(q).unwrap()).unwrap();
            let fin = chain_normalizer(&p, &ch, &BackoffConfig::new(q, Cutoff::Finite(400)).unwrap())
                .unwrap();
            assert!(((fin - inf) / inf).abs() < 1e-8, "x={x} q={q}");
        }
    }

    #[test]
    fn offered_load_zero_input() {
        let ch = ChannelPoint::at(&basic(), 0.01).unwrap();
        let b = BackoffConfig::infinite(0.2).unwrap();
        let load = offered_load(&basic(), &ch, &b, 0.0).unwrap();
        assert_eq!(load.rho, 0.0);
        assert!(!load.unstable);
        assert!(offered_load(&basic(), &ch, &b, -1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn normalization_holds(
            x in 1e-4f64..3.0,
            margin in 0.0f64..1.0,
            k in 1usize..60,
            mech in prop_oneof![Just(Mechanism::Basic), Just(Mechanism::RtsCts)],
        ) {
            let params = SystemParams::preset(mech, UnitMode::SlotUnits);
            let ch = ChannelPoint::at(&params, x).unwrap();
            let q = (1.0 - ch.p) + (ch.p - 1e-6) * margin + 1e-6;
            prop_assume!(q > 0.0 && q < 1.0 && ch.p + q > 1.0 + 1e-6);
            let b = BackoffConfig::new(q, Cutoff::Finite(k)).unwrap();
            let ss = steady_state(&params, &ch, &b).unwrap();
            prop_assert!((ss.total() - 1.0).abs() < 1e-9);
            for v in ss.b_s.iter().chain(&ss.b_w).chain(&ss.b_col) {
                prop_assert!(*v >= 0.0 && *v <= 1.0);
            }
        }
    }
}
