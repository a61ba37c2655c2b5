//! Protocol timing constants and backoff configuration.
//!
//! All durations are expressed in one time unit: mini-slots in
//! [`UnitMode::SlotUnits`] (so `a = 1`) or microseconds in
//! [`UnitMode::Microseconds`] (so `a = 50`). The attempt rate is always
//! carried as the dimensionless `x = aG`, attempts per mini-slot.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::scalar::Real;

/// Duration of one mini-slot in microseconds.
pub const SLOT_MICROS: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mechanism {
    #[serde(alias = "basic")]
    Basic,
    #[serde(alias = "rts", alias = "rtscts", alias = "rts_cts")]
    RtsCts,
}

impl Mechanism {
    pub fn label(self) -> &'static str {
        match self {
            Mechanism::Basic => "basic",
            Mechanism::RtsCts => "rts",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum UnitMode {
    /// Integer mini-slot counts, `a = 1`.
    #[default]
    #[serde(alias = "slots", alias = "slot")]
    SlotUnits,
    /// Raw microsecond values, `a = 50`.
    #[serde(alias = "us", alias = "micros")]
    Microseconds,
}

impl UnitMode {
    pub fn label(self) -> &'static str {
        match self {
            UnitMode::SlotUnits => "slots",
            UnitMode::Microseconds => "us",
        }
    }
}

/// Timing constants of one access mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams<T> {
    /// Mini-slot duration.
    pub a: T,
    /// DIFS duration.
    #[serde(rename = "T_D", alias = "t_d")]
    pub t_d: T,
    /// Successful transmission period, including the trailing DIFS.
    #[serde(rename = "T_S", alias = "t_s")]
    pub t_s: T,
    /// Collision period, including the trailing DIFS.
    #[serde(rename = "T_C", alias = "t_c")]
    pub t_c: T,
    /// Payload duration.
    #[serde(rename = "E_P", alias = "e_p")]
    pub e_p: T,
    pub mechanism: Mechanism,
    #[serde(default)]
    pub units: UnitMode,
}

impl<T: Real> SystemParams<T> {
    /// Builds and validates a parameter set.
    pub fn new(
        a: T,
        t_d: T,
        t_s: T,
        t_c: T,
        e_p: T,
        mechanism: Mechanism,
        units: UnitMode,
    ) -> Result<Self> {
        let params = Self { a, t_d, t_s, t_c, e_p, mechanism, units };
        params.validate()?;
        Ok(params)
    }

    /// The constants of the standard 802.11 FHSS parameter table.
    pub fn preset(mechanism: Mechanism, units: UnitMode) -> Self {
        let (a, t_d, t_s, t_c, e_p) = match (units, mechanism) {
            (UnitMode::SlotUnits, Mechanism::Basic) => (1.0, 3.0, 180.0, 175.0, 164.0),
            (UnitMode::SlotUnits, Mechanism::RtsCts) => (1.0, 3.0, 192.0, 9.0, 164.0),
            (UnitMode::Microseconds, Mechanism::Basic) => (50.0, 128.0, 8982.0, 8713.0, 8184.0),
            (UnitMode::Microseconds, Mechanism::RtsCts) => (50.0, 128.0, 9568.0, 417.0, 8184.0),
        };
        Self {
            a: T::lit(a),
            t_d: T::lit(t_d),
            t_s: T::lit(t_s),
            t_c: T::lit(t_c),
            e_p: T::lit(e_p),
            mechanism,
            units,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ModelError::InvalidParams(msg));
        let finite = [self.a, self.t_d, self.t_s, self.t_c, self.e_p]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return bad("all durations must be finite".into());
        }
        if self.a <= T::zero() {
            return bad(format!("a must be positive, got {}", self.a));
        }
        if !(self.t_s > self.t_d && self.t_d > self.a) {
            return bad(format!(
                "require T_S > T_D > a, got T_S={} T_D={} a={}",
                self.t_s, self.t_d, self.a
            ));
        }
        if self.t_c < self.a {
            return bad(format!("require T_C >= a, got T_C={}", self.t_c));
        }
        if !(self.e_p > T::zero() && self.e_p <= self.t_s) {
            return bad(format!("require 0 < E_P <= T_S, got E_P={}", self.e_p));
        }
        if self.units == UnitMode::SlotUnits {
            for (name, v) in [
                ("t_A", self.act_slots()),
                ("t_S", self.suc_slots()),
                ("t_C", self.col_slots()),
            ] {
                if (v - v.round()).abs() > T::tol(1e-9) {
                    return bad(format!("{name} = {v} is not an integer slot count"));
                }
            }
        }
        Ok(())
    }

    /// `t_Suc = T_S - T_D`, sojourn of the success state, in time units.
    #[inline]
    pub fn t_suc(&self) -> T {
        self.t_s - self.t_d
    }

    /// `t_A = (T_D - a)/a`, mini-slots of the action state.
    #[inline]
    pub fn act_slots(&self) -> T {
        (self.t_d - self.a) / self.a
    }

    /// `t_S = (T_S - T_D)/a`.
    #[inline]
    pub fn suc_slots(&self) -> T {
        (self.t_s - self.t_d) / self.a
    }

    /// `t_C = (T_C - a)/a`.
    #[inline]
    pub fn col_slots(&self) -> T {
        (self.t_c - self.a) / self.a
    }

    /// Converts a duration in this parameter set's time unit to milliseconds.
    pub fn to_millis(&self, v: T) -> T {
        match self.units {
            UnitMode::SlotUnits => v * self.a * T::lit(SLOT_MICROS) / T::lit(1000.0),
            UnitMode::Microseconds => v / T::lit(1000.0),
        }
    }

    /// Converts a duration in this parameter set's time unit to mini-slots.
    pub fn to_slots(&self, v: T) -> T {
        v / self.a
    }

    /// Normalized throughput target for an aggregate input rate `lambda_hat`
    /// given in packets per `t_Suc`.
    pub fn demand(&self, lambda_hat: T) -> T {
        lambda_hat * self.e_p / self.t_suc()
    }
}

/// Reports a dimensionless attempt rate `x = aG` as attempts per microsecond.
pub fn report_attempt_rate<T: Real>(x: T) -> T {
    x / T::lit(SLOT_MICROS)
}

/// Inverse of [`report_attempt_rate`].
pub fn attempt_rate_from_micros<T: Real>(g_per_us: T) -> T {
    g_per_us * T::lit(SLOT_MICROS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cutoff {
    Finite(usize),
    Infinite,
}

impl Cutoff {
    pub fn finite(self) -> Option<usize> {
        match self {
            Cutoff::Finite(k) => Some(k),
            Cutoff::Infinite => None,
        }
    }
}

impl fmt::Display for Cutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cutoff::Finite(k) => write!(f, "{k}"),
            Cutoff::Infinite => f.write_str("inf"),
        }
    }
}

/// Retransmission factor `q` and cut-off phase `K`. A phase-`i` backlogged
/// packet transmits with probability `q^i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackoffConfig<T> {
    pub q: T,
    pub cutoff: Cutoff,
}

impl<T: Real> BackoffConfig<T> {
    pub fn new(q: T, cutoff: Cutoff) -> Result<Self> {
        if !(q > T::zero() && q < T::one()) {
            return Err(ModelError::InvalidParams(format!("q must lie in (0, 1), got {q}")));
        }
        if cutoff == Cutoff::Finite(0) {
            return Err(ModelError::InvalidParams("cut-off phase K must be >= 1".into()));
        }
        Ok(Self { q, cutoff })
    }

    pub fn infinite(q: T) -> Result<Self> {
        Self::new(q, Cutoff::Infinite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_presets_match_table() {
        let b = SystemParams::<f64>::preset(Mechanism::Basic, UnitMode::SlotUnits);
        assert_eq!((b.a, b.t_d, b.t_s, b.t_c, b.e_p), (1.0, 3.0, 180.0, 175.0, 164.0));
        let r = SystemParams::<f64>::preset(Mechanism::RtsCts, UnitMode::SlotUnits);
        assert_eq!((r.a, r.t_d, r.t_s, r.t_c, r.e_p), (1.0, 3.0, 192.0, 9.0, 164.0));
        assert_eq!(b.t_suc(), 177.0);
        assert_eq!(r.t_suc(), 189.0);
        assert!(b.validate().is_ok() && r.validate().is_ok());
    }

    #[test]
    fn micro_presets_match_table() {
        let b = SystemParams::<f64>::preset(Mechanism::Basic, UnitMode::Microseconds);
        assert_eq!((b.a, b.t_d, b.t_s, b.t_c, b.e_p), (50.0, 128.0, 8982.0, 8713.0, 8184.0));
        let r = SystemParams::<f64>::preset(Mechanism::RtsCts, UnitMode::Microseconds);
        assert_eq!((r.t_s, r.t_c), (9568.0, 417.0));
        // non-integer DIFS exponent is allowed in microsecond mode
        assert!((b.act_slots() - 1.56).abs() < 1e-12);
        assert!(b.validate().is_ok());
    }

    #[test]
    fn slot_counts() {
        let b = SystemParams::<f64>::preset(Mechanism::Basic, UnitMode::SlotUnits);
        assert_eq!((b.act_slots(), b.suc_slots(), b.col_slots()), (2.0, 177.0, 174.0));
        let r = SystemParams::<f32>::preset(Mechanism::RtsCts, UnitMode::SlotUnits);
        assert_eq!((r.act_slots(), r.suc_slots(), r.col_slots()), (2.0, 189.0, 8.0));
    }

    #[test]
    fn validation_rejects_bad_orderings() {
        let mut p = SystemParams::<f64>::preset(Mechanism::Basic, UnitMode::SlotUnits);
        p.t_d = 200.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::<f64>::preset(Mechanism::Basic, UnitMode::SlotUnits);
        p.e_p = 181.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::<f64>::preset(Mechanism::Basic, UnitMode::SlotUnits);
        p.t_s = 180.5;
        assert!(matches!(p.validate(), Err(ModelError::InvalidParams(_))));
        assert!(SystemParams::new(0.0, 3.0, 180.0, 175.0, 164.0, Mechanism::Basic, UnitMode::SlotUnits).is_err());
    }

    #[test]
    fn attempt_rate_reporting() {
        assert_eq!(report_attempt_rate(0.0f64), 0.0);
        assert!((report_attempt_rate(2.1f64) - 0.042).abs() < 1e-15);
        assert!((report_attempt_rate(5.75f64) - 0.115).abs() < 1e-15);
        assert!((attempt_rate_from_micros(0.042f64) - 2.1).abs() < 1e-12);
    }

    #[test]
    fn backoff_validation() {
        assert!(BackoffConfig::new(0.0f64, Cutoff::Infinite).is_err());
        assert!(BackoffConfig::new(1.0f64, Cutoff::Infinite).is_err());
        assert!(BackoffConfig::new(0.5f64, Cutoff::Finite(0)).is_err());
        assert!(BackoffConfig::new(0.5f64, Cutoff::Finite(1)).is_ok());
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let p = SystemParams::<f64>::preset(Mechanism::RtsCts, UnitMode::SlotUnits);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"T_S\":192"));
        let back: SystemParams<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"a":1,"T_D":3,"T_S":180,"T_C":175,"E_P":164,"mechanism":"Basic","bogus":1}"#;
        assert!(serde_json::from_str::<SystemParams<f64>>(bad).is_err());
    }
}
