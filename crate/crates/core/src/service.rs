//! Service-time moments of the HOL packet and the Geo/G/1 mean delay.
//!
//! Closed forms assume an infinite cut-off. The second moment carries a
//! factor `[(1-p)/q^2]^{K-1}` that vanishes only for `q^2 > 1 - p`; below
//! that boundary the second moment, and with it the mean delay, diverges.

use crate::channel::ChannelPoint;
use crate::error::{ModelError, Result};
use crate::hol::waiting_duration;
use crate::params::SystemParams;
use crate::scalar::Real;

/// Sojourn counts (mini-slots, real valued) and probabilities entering the
/// closed-form moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentInputs<T> {
    /// Mini-slot duration; moments scale by `a` and `a^2`.
    pub a: T,
    pub t_a: T,
    pub t_s: T,
    pub t_c: T,
    pub t_w: T,
    pub p: T,
    pub q: T,
    pub alpha: T,
    pub alpha0: T,
    /// `p + q - 1` when known more precisely than by subtraction.
    pub exact_gap: Option<T>,
}

impl<T: Real> MomentInputs<T> {
    pub fn from_model(params: &SystemParams<T>, ch: &ChannelPoint<T>, q: T) -> Self {
        Self {
            a: params.a,
            t_a: params.act_slots(),
            t_s: params.suc_slots(),
            t_c: params.col_slots(),
            t_w: waiting_duration(params, ch.p) / params.a,
            p: ch.p,
            q,
            alpha: ch.alpha,
            alpha0: ch.alpha0,
            exact_gap: None,
        }
    }

    fn gap(&self) -> Result<T> {
        let gap = self.exact_gap.unwrap_or(self.p + self.q - T::one());
        if !(gap > T::zero()) {
            return Err(ModelError::NonRecurrent { p: self.p.as_f64(), q: self.q.as_f64(), x: None });
        }
        Ok(gap)
    }

    /// Second-moment convergence: `q^2 > 1 - p`.
    pub fn second_moment_finite(&self) -> bool {
        self.q * self.q > T::one() - self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SecondMoment<T> {
    Finite(T),
    Divergent,
}

impl<T: Real> SecondMoment<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            SecondMoment::Finite(v) => Some(v),
            SecondMoment::Divergent => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delay<T> {
    Finite(T),
    Unbounded,
}

impl<T: Real> Delay<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Delay::Finite(v) => Some(v),
            Delay::Unbounded => None,
        }
    }

    pub fn is_bounded(self) -> bool {
        matches!(self, Delay::Finite(_))
    }

    pub fn map(self, f: impl FnOnce(T) -> T) -> Self {
        match self {
            Delay::Finite(v) => Delay::Finite(f(v)),
            Delay::Unbounded => Delay::Unbounded,
        }
    }
}

/// Service moments plus the Geo/G/1 delay at a per-node input rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceMoments<T> {
    /// `E[X]`, time units of the parameter set.
    pub mean: T,
    /// `E[X^2]`, squared time units.
    pub second: SecondMoment<T>,
    /// Mean sojourn (waiting plus service), time units.
    pub pk_delay: Delay<T>,
    /// Arrivals per time unit at one buffer, `lambda / t_Suc`.
    pub lambda_prime: T,
}

impl<T: Real> ServiceMoments<T> {
    /// `rho = lambda' E[X]`.
    pub fn load(&self) -> T {
        self.lambda_prime * self.mean
    }
}

/// Mean service time for an infinite cut-off.
pub fn mean_service<T: Real>(m: &MomentInputs<T>) -> Result<T> {
    let gap = m.gap()?;
    let one = T::one();
    let (a, p, al, al0) = (m.a, m.p, m.alpha, m.alpha0);
    let u = one - al * al0 * p;
    let direct = m.t_a + m.t_s + al0 + m.t_w * (one - al * al0) + m.t_c * (one - p) / p;
    let backlog = (m.t_w * (one - al) * p + p) * u / (al * p * gap);
    Ok(a * (direct + backlog))
}

/// Coefficient of the `[(1-p)/q^2]^{K-1}` term of the second moment.
pub fn pk_poly_c<T: Real>(m: &MomentInputs<T>) -> Result<T> {
    let gap = m.gap()?;
    let one = T::one();
    let two = T::lit(2.0);
    let (a, p, q, al, al0) = (m.a, m.p, m.q, m.alpha, m.alpha0);
    let gap2 = p + q * q - one;
    let w = m.t_w * (one - al) + one;
    let num = two
        * a
        * a
        * w
        * w
        * (gap2 * (gap - q * p + q * p * p) - q * q * q * p * p)
        * (one - al * al0 * p);
    Ok(num / (al * al * q * q * p * p * gap * gap2))
}

/// Convergent part of the second moment, including the trailing `E[X]`.
pub fn pk_poly_d<T: Real>(m: &MomentInputs<T>) -> Result<T> {
    let gap = m.gap()?;
    let mean = mean_service(m)?;
    let one = T::one();
    let two = T::lit(2.0);
    let (a, p, q, al, al0) = (m.a, m.p, m.q, m.alpha, m.alpha0);
    let (ta, ts, tc, tw) = (m.t_a, m.t_s, m.t_c, m.t_w);
    let gap2 = p + q * q - one;
    let u = one - al * al0 * p;
    let w = tw - al * tw + one;
    let v = ts * p + tc - p * tc;

    let terms = [
        (ta + tc + one) * (ta + tc) * al * al0 * (one - p),
        (ta + tw) * (ta + tw - one) * (one - al0),
        two / (p * p) * u * (tc - tc * p - p) * v,
        (ta + tw + one) * (ta + tw) * (one - al) * al0,
        (ta + ts + one) * (ta + ts) * al * al0 * p,
        tc * (tc + one) * (one - p) / p * u,
        ts * (ts + one) * u,
        two * (ta * u + tc * al * al0 * (one - p) + tw * (one - al * al0) + al0 * (one - al * p))
            * (al * gap * v + tw * (one - al) * p + p)
            / (al * p * gap),
        two * w * ((tc + one) * (one - p) - q) * u / (al * gap * gap),
        two * w * v * u / (al * p * gap),
        two * w * w * q * u / (al * al * gap * gap2),
        tw * (tw + one) * (one - al) * u / (al * gap),
    ];
    let sum = terms.iter().fold(T::zero(), |acc, &t| acc + t);
    // the trailing E[X] is in mini-slots before rescaling
    Ok(a * a * sum + a * mean)
}

/// Second moment for an infinite cut-off.
pub fn second_moment<T: Real>(m: &MomentInputs<T>) -> Result<SecondMoment<T>> {
    m.gap()?;
    if !m.second_moment_finite() {
        return Ok(SecondMoment::Divergent);
    }
    // the C(p, q) term is multiplied by a vanishing power
    Ok(SecondMoment::Finite(pk_poly_d(m)?))
}

/// Closed-form `E[X]`, `E[X^2]` at an operating point, with the delay left
/// for [`with_delay`].
pub fn moments_closed_form<T: Real>(
    params: &SystemParams<T>,
    ch: &ChannelPoint<T>,
    q: T,
) -> Result<(T, SecondMoment<T>)> {
    let m = MomentInputs::from_model(params, ch, q);
    Ok((mean_service(&m)?, second_moment(&m)?))
}

/// Pollaczek-Khinchin mean sojourn of a Geo/G/1 queue:
/// `E[T] = E[X] + (l E[X^2] - l E[X]) / (2 (1 - l E[X]))`.
pub fn pk_delay<T: Real>(lambda_prime: T, mean: T, second: SecondMoment<T>) -> Delay<T> {
    let second = match second {
        SecondMoment::Finite(v) => v,
        SecondMoment::Divergent => return Delay::Unbounded,
    };
    if lambda_prime == T::zero() {
        return Delay::Finite(mean);
    }
    let load = lambda_prime * mean;
    if !(load < T::one()) {
        return Delay::Unbounded;
    }
    let two = T::lit(2.0);
    Delay::Finite(mean + (lambda_prime * second - lambda_prime * mean) / (two * (T::one() - load)))
}

/// Full service record for per-node input rate `lambda` (packets per
/// `t_Suc`).
pub fn service_moments<T: Real>(
    params: &SystemParams<T>,
    ch: &ChannelPoint<T>,
    q: T,
    lambda: T,
) -> Result<ServiceMoments<T>> {
    let (mean, second) = moments_closed_form(params, ch, q)?;
    Ok(with_delay(params, mean, second, lambda))
}

/// [`service_moments`] with the recurrence gap `p + q - 1` supplied by a
/// caller that carries it exactly.
pub fn service_moments_with_gap<T: Real>(
    params: &SystemParams<T>,
    ch: &ChannelPoint<T>,
    q: T,
    gap: T,
    lambda: T,
) -> Result<ServiceMoments<T>> {
    let m = MomentInputs { exact_gap: Some(gap), ..MomentInputs::from_model(params, ch, q) };
    Ok(with_delay(params, mean_service(&m)?, second_moment(&m)?, lambda))
}

pub fn with_delay<T: Real>(
    params: &SystemParams<T>,
    mean: T,
    second: SecondMoment<T>,
    lambda: T,
) -> ServiceMoments<T> {
    let lambda_prime = lambda / params.t_suc();
    // P-K is written in mini-slots; rescale time units around it
    let a = params.a;
    let slots_second = match second {
        SecondMoment::Finite(v) => SecondMoment::Finite(v / (a * a)),
        SecondMoment::Divergent => SecondMoment::Divergent,
    };
    let pk = pk_delay(lambda_prime * a, mean / a, slots_second).map(|v| v * a);
    ServiceMoments { mean, second, pk_delay: pk, lambda_prime }
}
