//! Self-consistent operating point of `n` nodes for a given retransmission
//! factor.
//!
//! The balance `x = (1 - rho) alpha0 alpha a lambda_hat / t_Suc + n rho (p + q - 1)/p`
//! is solved in the recurrence gap `y = p + q - 1` instead of `x`: with `q`
//! fixed, `p = 1 - q + y` and `x = -ln p`, and the near-cancellation of
//! `1 - p` against `q` is carried exactly. `rho` enters unclamped.

use log::{debug, warn};

use crate::channel::ChannelPoint;
use crate::error::{ModelError, Result};
use crate::hol::{offered_load, OfferedLoad};
use crate::params::{BackoffConfig, SystemParams};
use crate::roots::bisect;
use crate::scalar::Real;
use crate::service::{service_moments, service_moments_with_gap, Delay, ServiceMoments};
use crate::stability::{region_report, throughput_roots, RateBalance, RegionReport};

/// Log-spaced points of the coarse scan in `y`.
const SCAN_POINTS: usize = 400;
/// Smallest gap relative to `q` that the scan reaches.
const SCAN_FLOOR: f64 = 1e-15;
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Status {
    /// `q` lies in the bounded-delay region.
    Stable,
    /// `q` lies in the stable-throughput region but not the bounded-delay one.
    ThroughputOnlyStable,
    Unstable,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Stable => "stable",
            Status::ThroughputOnlyStable => "throughput_only",
            Status::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium<T> {
    pub x: T,
    pub channel: ChannelPoint<T>,
    /// Unclamped offered load; above 1 the queue is overloaded.
    pub rho: T,
    pub moments: ServiceMoments<T>,
    pub delay: Delay<T>,
    pub status: Status,
    pub iterations: usize,
    /// `|x - rhs(x)|` at the returned point.
    pub residual: T,
    /// Sign changes of the balance seen on the coarse scan.
    pub roots_seen: usize,
}

fn check_inputs<T: Real>(n: usize, lambda_hat: T, q: T) -> Result<()> {
    if n == 0 {
        return Err(ModelError::InvalidParams("node count must be >= 1".into()));
    }
    if !(lambda_hat >= T::zero()) || lambda_hat.is_infinite() {
        return Err(ModelError::InvalidParams(format!("aggregate input rate must be >= 0, got {lambda_hat}")));
    }
    BackoffConfig::infinite(q)?;
    Ok(())
}

/// Region-based status of `q` for the given population.
pub fn classify<T: Real>(report: Option<&RegionReport<T>>, q: T) -> Status {
    let Some(r) = report else { return Status::Unstable };
    if r.bounded.is_some_and(|rd| rd.contains(q)) {
        Status::Stable
    } else if r.stable.contains(q) {
        Status::ThroughputOnlyStable
    } else {
        Status::Unstable
    }
}

struct Balance<'a, T> {
    params: &'a SystemParams<T>,
    n: T,
    lambda_hat: T,
    q: T,
}

impl<T: Real> Balance<'_, T> {
    fn point(&self, y: T) -> Result<(ChannelPoint<T>, RateBalance<T>)> {
        let p = (T::one() - self.q + y).min(T::one());
        let ch = ChannelPoint::from_success(self.params, p)?;
        let bal = RateBalance::at(self.params, &ch, self.n, self.lambda_hat);
        Ok((ch, bal))
    }

    /// `rhs(x(y)) - x(y)`, normalized by `|x| + rhs` so that the sign scan is
    /// insensitive to the magnitude of the two sides.
    fn scaled_residual(&self, y: T) -> T {
        match self.point(y) {
            Ok((ch, bal)) => {
                let rhs = bal.attempt_rate(ch.p, y, self.n);
                (rhs - ch.x) / (rhs.abs() + ch.x + T::min_positive_value())
            }
            Err(_) => T::nan(),
        }
    }

    fn residual(&self, y: T) -> Result<T> {
        let (ch, bal) = self.point(y)?;
        Ok((ch.x - bal.attempt_rate(ch.p, y, self.n)).abs())
    }
}

#[allow(clippy::too_many_arguments)]
fn finish<T: Real>(
    params: &SystemParams<T>,
    n: usize,
    lambda_hat: T,
    q: T,
    ch: ChannelPoint<T>,
    gap: T,
    rho: T,
    iterations: usize,
    residual: T,
    roots_seen: usize,
) -> Result<Equilibrium<T>> {
    let lambda = lambda_hat / T::from_count(n);
    let moments = service_moments_with_gap(params, &ch, q, gap, lambda)?;
    let report = if lambda_hat > T::zero() { region_report(params, n, lambda_hat).ok() } else { None };
    let status = if lambda_hat == T::zero() { Status::Stable } else { classify(report.as_ref(), q) };
    let delay = if rho < T::one() { moments.pk_delay } else { Delay::Unbounded };
    Ok(Equilibrium { x: ch.x, channel: ch, rho, moments, delay, status, iterations, residual, roots_seen })
}

/// Fixed point of the attempt-rate balance with the smallest attempt rate.
///
/// A log-spaced scan of `y` from `q` downwards locates the first sign change,
/// which is then bisected to full precision. Several sign changes are logged.
pub fn solve<T: Real>(params: &SystemParams<T>, n: usize, lambda_hat: T, q: T) -> Result<Equilibrium<T>> {
    check_inputs(n, lambda_hat, q)?;
    if lambda_hat == T::zero() {
        let ch = ChannelPoint::at(params, T::zero())?;
        return finish(params, n, lambda_hat, q, ch, q, T::zero(), 0, T::zero(), 1);
    }
    let bal = Balance { params, n: T::from_count(n), lambda_hat, q };

    // y_j = q * floor^{j / SCAN_POINTS}, j = 0 at y = q (x = 0)
    let floor = T::lit(SCAN_FLOOR).max(T::epsilon() * T::lit(4.0));
    let at = |j: usize| q * floor.powf(T::from_count(j) / T::from_count(SCAN_POINTS));
    let mut prev_y = q;
    let mut prev_r = bal.scaled_residual(prev_y);
    let mut bracket = None;
    let mut sign_changes = 0;
    for j in 1..=SCAN_POINTS {
        let y = at(j);
        let r = bal.scaled_residual(y);
        if r.is_nan() || prev_r.is_nan() {
            prev_y = y;
            prev_r = r;
            continue;
        }
        if r.signum() != prev_r.signum() {
            sign_changes += 1;
            if bracket.is_none() {
                bracket = Some((y, prev_y));
            }
        }
        prev_y = y;
        prev_r = r;
    }
    if sign_changes > 1 {
        warn!("attempt-rate balance changes sign {sign_changes} times for q = {q}, n = {n}, lambda_hat = {lambda_hat}");
    }
    let Some((lo, hi)) = bracket else {
        let res = bal.residual(at(SCAN_POINTS)).unwrap_or(T::infinity());
        return Err(ModelError::NoConvergence { iterations: SCAN_POINTS, residual: res.as_f64() });
    };
    let found = bisect(|y| bal.scaled_residual(y), lo, hi, T::zero(), T::zero(), 400)
        .ok_or(ModelError::NoConvergence { iterations: SCAN_POINTS, residual: f64::NAN })?;
    let y = found.root;
    let (ch, rb) = bal.point(y)?;
    let residual = bal.residual(y)?;
    let iterations = SCAN_POINTS + found.iterations;
    debug!("equilibrium q = {q}: x = {}, y = {y}, residual = {residual}", ch.x);
    if !(residual < T::lit(RESIDUAL_TOL).max(T::tol(RESIDUAL_TOL) * ch.x)) {
        return Err(ModelError::NoConvergence { iterations, residual: residual.as_f64() });
    }
    let rho = rb.rho(ch.p, y);
    finish(params, n, lambda_hat, q, ch, y, rho, iterations, residual, sign_changes)
}

/// Queueing operating point on the small demand root `x_S`, where the
/// channel carries the offered throughput at the lowest contention.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint<T> {
    pub x: T,
    pub channel: ChannelPoint<T>,
    pub load: OfferedLoad<T>,
    pub moments: ServiceMoments<T>,
    pub delay: Delay<T>,
}

pub fn operating_point<T: Real>(
    params: &SystemParams<T>,
    n: usize,
    lambda_hat: T,
    q: T,
) -> Result<OperatingPoint<T>> {
    check_inputs(n, lambda_hat, q)?;
    let x = if lambda_hat == T::zero() {
        T::zero()
    } else {
        throughput_roots(params, params.demand(lambda_hat))?.small
    };
    let ch = ChannelPoint::at(params, x)?;
    let lambda = lambda_hat / T::from_count(n);
    let load = offered_load(params, &ch, &BackoffConfig::infinite(q)?, lambda)?;
    let moments = service_moments(params, &ch, q, lambda)?;
    let delay = if load.unstable { Delay::Unbounded } else { moments.pk_delay };
    Ok(OperatingPoint { x, channel: ch, load, moments, delay })
}

/// Independent solves over a grid of retransmission factors.
pub fn sweep_q<T: Real>(
    params: &SystemParams<T>,
    n: usize,
    lambda_hat: T,
    qs: &[T],
) -> Vec<Result<Equilibrium<T>>> {
    qs.iter().map(|&q| solve(params, n, lambda_hat, q)).collect()
}

/// Independent solves over a grid of aggregate input rates.
pub fn sweep_lambda<T: Real>(
    params: &SystemParams<T>,
    n: usize,
    lambdas: &[T],
    q: T,
) -> Vec<Result<Equilibrium<T>>> {
    lambdas.iter().map(|&l| solve(params, n, l, q)).collect()
}
