//! Throughput characteristic, its two demand roots, the `q <-> x` map `h`
//! and the stable-throughput and bounded-delay regions of `q`.

use std::fmt;

use serde::Serialize;

use crate::channel::ChannelPoint;
use crate::error::{ModelError, Result};
use crate::hol::waiting_duration;
use crate::params::{report_attempt_rate, SystemParams};
use crate::roots::{bisect, golden_max};
use crate::scalar::{collision_mass, Real};

const SCAN_POINTS: usize = 10_000;
const BISECT_TOL: f64 = 1e-12;
const BISECT_CAP: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputPoint<T> {
    pub x: T,
    pub lambda_out: T,
}

/// Normalized network throughput at attempt rate `x`: payload time per
/// mean channel cycle.
pub fn throughput<T: Real>(params: &SystemParams<T>, x: T) -> Result<T> {
    if x < T::zero() || x.is_nan() {
        return Err(ModelError::NegativeAttemptRate(x.as_f64()));
    }
    if x.is_infinite() {
        return Ok(T::zero());
    }
    let p = (-x).exp();
    let suc = x * p;
    let cycle = p * params.a + suc * params.t_s + collision_mass(x) * params.t_c;
    Ok(suc * params.e_p / cycle)
}

fn curve<T: Real>(params: &SystemParams<T>, x: T) -> T {
    throughput(params, x).unwrap_or(T::zero())
}

/// Upper end of the coarse grid: past it the curve is only collisions.
fn scan_limit<T: Real>(params: &SystemParams<T>) -> T {
    let mut hi = T::lit(10.0);
    let floor = T::lit(1e-6) * params.e_p / params.t_s;
    while curve(params, hi) > floor && hi < T::lit(700.0) {
        hi = hi * T::lit(2.0);
    }
    hi
}

/// Peak of the throughput curve: a coarse grid brackets the maximizer, then
/// golden-section search refines it.
pub fn max_throughput<T: Real>(params: &SystemParams<T>) -> ThroughputPoint<T> {
    let hi = scan_limit(params);
    // sqrt spacing resolves the peak, which sits well below hi
    let at = |i: usize| {
        let s = T::from_count(i) / T::from_count(SCAN_POINTS);
        hi * s * s
    };
    let mut best = 0;
    let mut best_v = T::zero();
    for i in 0..=SCAN_POINTS {
        let v = curve(params, at(i));
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    let lo = at(best.saturating_sub(1));
    let up = at((best + 1).min(SCAN_POINTS));
    let x = golden_max(|x| curve(params, x), lo, up, T::tol(1e-13));
    ThroughputPoint { x, lambda_out: curve(params, x) }
}

/// The two attempt rates at which the curve meets a demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputRoots<T> {
    pub demand: T,
    pub peak: ThroughputPoint<T>,
    /// `x_S`, on the rising side.
    pub small: T,
    /// `x_L`, on the falling side.
    pub large: T,
}

pub fn throughput_roots<T: Real>(params: &SystemParams<T>, demand: T) -> Result<ThroughputRoots<T>> {
    let peak = max_throughput(params);
    if !(demand < peak.lambda_out) {
        return Err(ModelError::NoRoots { demand: demand.as_f64(), max: peak.lambda_out.as_f64() });
    }
    if !(demand > T::zero()) {
        return Err(ModelError::InvalidParams(format!("demand must be positive, got {demand}")));
    }
    let g = |x: T| curve(params, x) - demand;
    let mut hi = peak.x * T::lit(2.0);
    while g(hi) > T::zero() {
        hi = hi * T::lit(2.0);
    }
    // the small root can sit near 1e-3 where the slope is about E_P / a,
    // so its tolerance is relative
    let tol = T::tol(BISECT_TOL);
    let none = || ModelError::NoRoots { demand: demand.as_f64(), max: peak.lambda_out.as_f64() };
    let small = bisect(g, T::zero(), peak.x, tol * peak.x.min(T::one()) * T::lit(1e-3), T::zero(), BISECT_CAP)
        .ok_or_else(none)?;
    let large = bisect(g, peak.x, hi, tol, T::zero(), BISECT_CAP).ok_or_else(none)?;
    Ok(ThroughputRoots { demand, peak, small: small.root, large: large.root })
}

/// Coefficients of the attempt-rate balance written as a quadratic in the
/// recurrence gap `y = p + q - 1` at a fixed channel point:
/// `quad_y y^2 + lin_y y + konst = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RateBalance<T> {
    pub quad_y: T,
    pub lin_y: T,
    pub konst: T,
    /// Fresh-packet attempt term `alpha0 alpha a lambda_hat / t_Suc`.
    pub fresh: T,
    /// `rho = per_d * D`.
    pub per_d: T,
    /// `D = head + backlog p / y`.
    pub head: T,
    pub backlog: T,
}

impl<T: Real> RateBalance<T> {
    pub fn at(params: &SystemParams<T>, ch: &ChannelPoint<T>, n: T, lambda_hat: T) -> Self {
        let one = T::one();
        let (a, p, al, al0) = (params.a, ch.p, ch.alpha, ch.alpha0);
        let tw = waiting_duration(params, p);
        let head = (tw - al0 * al * tw + params.t_s + a * al0 - params.t_c) * al * p
            + (params.t_c - a) * al;
        let backlog = (one - p * al0 * al) * (a + tw - al * tw);
        let fresh = al0 * al * a * lambda_hat / params.t_suc();
        let per_d = lambda_hat / (n * params.t_suc() * al * p);
        Self {
            quad_y: n * per_d * head / p,
            lin_y: fresh - fresh * per_d * head + n * per_d * backlog - ch.x,
            konst: -fresh * per_d * backlog * p,
            fresh,
            per_d,
            head,
            backlog,
        }
    }

    /// Right-hand side of the balance, `(1 - rho) fresh + n rho y / p`, with
    /// the `1/y` pole of `rho` cancelled analytically in the second term.
    pub fn attempt_rate(&self, p: T, y: T, n: T) -> T {
        let d = self.head + self.backlog * p / y;
        let rho = self.per_d * d;
        self.fresh - self.fresh * rho + n * self.per_d * (self.head * y / p + self.backlog)
    }

    pub fn rho(&self, p: T, y: T) -> T {
        self.per_d * (self.head + self.backlog * p / y)
    }

    /// Unique positive root in `y`; `konst < 0 < quad_y` rules out a
    /// second one.
    pub fn positive_root(&self) -> T {
        let (a2, a1, a0) = (self.quad_y, self.lin_y, self.konst);
        let disc = (a1 * a1 - T::lit(4.0) * a2 * a0).sqrt();
        if a1 > T::zero() {
            T::lit(-2.0) * a0 / (a1 + disc)
        } else {
            (disc - a1) / (T::lit(2.0) * a2)
        }
    }
}

/// Result of `h`: the retransmission factor at which an attempt rate is an
/// equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HValue<T> {
    pub q: T,
    /// The formula gave a value above 1 and `q` was set to 1.
    pub clamped: bool,
}

fn check_population<T: Real>(n: usize, lambda_hat: T) -> Result<()> {
    if n == 0 {
        return Err(ModelError::InvalidParams("node count must be >= 1".into()));
    }
    if !(lambda_hat > T::zero()) || lambda_hat.is_infinite() {
        return Err(ModelError::InvalidParams(format!(
            "aggregate input rate must be positive, got {lambda_hat}"
        )));
    }
    Ok(())
}

fn clamp_q<T: Real>(q: T) -> HValue<T> {
    if q > T::one() {
        HValue { q: T::one(), clamped: true }
    } else {
        HValue { q, clamped: false }
    }
}

/// `q = h(x)`: the retransmission factor for which `x` solves the
/// attempt-rate balance with `n` nodes and aggregate input `lambda_hat`
/// (packets per `t_Suc`).
///
/// Solved as the positive root of the balance's quadratic in `p + q - 1`,
/// so `1 - p + y` never loses the small gap to cancellation.
pub fn retransmission_factor_h<T: Real>(
    params: &SystemParams<T>,
    n: usize,
    lambda_hat: T,
    x: T,
) -> Result<HValue<T>> {
    check_population(n, lambda_hat)?;
    let ch = ChannelPoint::at(params, x)?;
    let bal = RateBalance::at(params, &ch, T::from_count(n), lambda_hat);
    let y = bal.positive_root();
    if !y.is_finite() {
        return Err(ModelError::ComplexRoot { x: x.as_f64(), discriminant: f64::NAN });
    }
    Ok(clamp_q(ch.p_t + y))
}

/// `h(x)` in its closed radical form, term for term. Kept next to
/// [`retransmission_factor_h`]: its `lambda_hat A(p)` term differs from the
/// balance equation by a factor `t_Suc`, which moves the small-`x` values by
/// a fraction of a percent.
pub fn h_printed<T: Real>(params: &SystemParams<T>, n: usize, lambda_hat: T, x: T) -> Result<HValue<T>> {
    check_population(n, lambda_hat)?;
    let ch = ChannelPoint::at(params, x)?;
    let one = T::one();
    let two = T::lit(2.0);
    let (a, p, al, al0) = (params.a, ch.p, ch.alpha, ch.alpha0);
    let (ts, tc, tsuc) = (params.t_s, params.t_c, params.t_suc());
    let nf = T::from_count(n);
    let tw = waiting_duration(params, p);
    let big_a = tw * (one - al * al0) + ts + a * al0 - tc + (tc - a) / p;
    let big_b = (nf - lambda_hat * big_a) * al * al0 * a * lambda_hat * p / nf
        + lambda_hat / al * (one - al * al0 * p) * (a + tw - tw * al)
        - x * p * tsuc;
    let lead = big_b / (two * lambda_hat * big_a);
    let disc = lead * lead
        + lambda_hat * a * al0 * p * (one - al * al0 * p) * (a + tw - al * tw) / (big_a * nf * tsuc);
    if disc < T::zero() || disc.is_nan() {
        return Err(ModelError::ComplexRoot { x: x.as_f64(), discriminant: disc.as_f64() });
    }
    Ok(clamp_q(ch.p_t + disc.sqrt() - lead))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RegionKind {
    StableThroughput,
    BoundedDelay,
    AttemptRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionInterval<T> {
    pub lo: T,
    pub hi: T,
    pub lo_closed: bool,
    pub hi_closed: bool,
    pub kind: RegionKind,
}

impl<T: Real> RegionInterval<T> {
    pub fn contains(&self, v: T) -> bool {
        let above = if self.lo_closed { v >= self.lo } else { v > self.lo };
        let below = if self.hi_closed { v <= self.hi } else { v < self.hi };
        above && below
    }

    pub fn contains_interior(&self, v: T) -> bool {
        v > self.lo && v < self.hi
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        let lo_ok = self.lo > other.lo || (self.lo == other.lo && (other.lo_closed || !self.lo_closed));
        let hi_ok = self.hi < other.hi || (self.hi == other.hi && (other.hi_closed || !self.hi_closed));
        lo_ok && hi_ok
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }
}

impl<T: Real> fmt::Display for RegionInterval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}

fn roots_for<T: Real>(params: &SystemParams<T>, lambda_hat: T) -> Result<ThroughputRoots<T>> {
    throughput_roots(params, params.demand(lambda_hat))
}

/// `R_T = [h(x_S), h(x_L)]`.
pub fn stable_region<T: Real>(
    params: &SystemParams<T>,
    n: usize,
    lambda_hat: T,
) -> Result<RegionInterval<T>> {
    check_population(n, lambda_hat)?;
    let r = roots_for(params, lambda_hat)?;
    stable_region_from(params, n, lambda_hat, &r)
}

fn stable_region_from<T: Real>(
    params: &SystemParams<T>,
    n: usize,
    lambda_hat: T,
    r: &ThroughputRoots<T>,
) -> Result<RegionInterval<T>> {
    Ok(RegionInterval {
        lo: retransmission_factor_h(params, n, lambda_hat, r.small)?.q,
        hi: retransmission_factor_h(params, n, lambda_hat, r.large)?.q,
        lo_closed: true,
        hi_closed: true,
        kind: RegionKind::StableThroughput,
    })
}

/// Large-population limit of `R_T`: `[1 - e^{-x_S}, 1 - e^{-x_L}]`.
pub fn stable_region_infinite<T: Real>(
    params: &SystemParams<T>,
    lambda_hat: T,
) -> Result<RegionInterval<T>> {
    let r = roots_for(params, lambda_hat)?;
    Ok(RegionInterval {
        lo: -(-r.small).exp_m1(),
        hi: -(-r.large).exp_m1(),
        lo_closed: true,
        hi_closed: true,
        kind: RegionKind::StableThroughput,
    })
}

/// `R_D = [sqrt(1 - e^{-x_S}), h(x_L))`.
pub fn bounded_delay_region<T: Real>(
    params: &SystemParams<T>,
    n: usize,
    lambda_hat: T,
) -> Result<RegionInterval<T>> {
    check_population(n, lambda_hat)?;
    let r = roots_for(params, lambda_hat)?;
    bounded_delay_region_from(params, n, lambda_hat, &r)
}

fn bounded_delay_region_from<T: Real>(
    params: &SystemParams<T>,
    n: usize,
    lambda_hat: T,
    r: &ThroughputRoots<T>,
) -> Result<RegionInterval<T>> {
    let lo = (-(-r.small).exp_m1()).sqrt();
    let hi = retransmission_factor_h(params, n, lambda_hat, r.large)?.q;
    if lo >= hi {
        return Err(ModelError::EmptyRegion { lo: lo.as_f64(), hi: hi.as_f64() });
    }
    Ok(RegionInterval { lo, hi, lo_closed: true, hi_closed: false, kind: RegionKind::BoundedDelay })
}

/// `[G_S, G_L]` in attempts per microsecond.
pub fn attempt_rate_interval<T: Real>(r: &ThroughputRoots<T>) -> RegionInterval<T> {
    RegionInterval {
        lo: report_attempt_rate(r.small),
        hi: report_attempt_rate(r.large),
        lo_closed: true,
        hi_closed: true,
        kind: RegionKind::AttemptRate,
    }
}

/// Everything the region report prints for one `(params, n, lambda_hat)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport<T> {
    pub roots: ThroughputRoots<T>,
    pub stable: RegionInterval<T>,
    /// `None` when the bounded-delay region is empty.
    pub bounded: Option<RegionInterval<T>>,
    pub attempt: RegionInterval<T>,
    pub stable_clamped: bool,
}

pub fn region_report<T: Real>(
    params: &SystemParams<T>,
    n: usize,
    lambda_hat: T,
) -> Result<RegionReport<T>> {
    check_population(n, lambda_hat)?;
    let roots = roots_for(params, lambda_hat)?;
    let stable = stable_region_from(params, n, lambda_hat, &roots)?;
    let stable_clamped = retransmission_factor_h(params, n, lambda_hat, roots.large)?.clamped;
    let bounded = match bounded_delay_region_from(params, n, lambda_hat, &roots) {
        Ok(r) => Some(r),
        Err(ModelError::EmptyRegion { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(RegionReport { attempt: attempt_rate_interval(&roots), roots, stable, bounded, stable_clamped })
}
