use dcf_core::SystemParams;
use thiserror::Error;

pub const DEFAULT_CUTOFF: usize = 40;
pub const DEFAULT_BATCHES: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid timing parameters: {0}")]
    Params(String),
    #[error("durations must be whole mini-slots, {name} = {value}")]
    NonIntegerSlots { name: &'static str, value: f64 },
    #[error("node count must be >= 1")]
    NoNodes,
    #[error("per-node arrival probability per mini-slot is {0}, outside [0, 1]")]
    ArrivalProbability(f64),
    #[error("retransmission factor must lie in (0, 1), got {0}")]
    RetransmissionFactor(f64),
    #[error("cut-off phase K must be >= 1")]
    Cutoff,
    #[error("horizon {horizon} must exceed warmup {warmup}")]
    Horizon { horizon: u64, warmup: u64 },
    #[error("need at least 10 batches and one slot per batch, got {0}")]
    Batches(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: SystemParams,
    pub n: usize,
    /// Aggregate input rate in packets per `t_Suc`.
    pub lambda_hat: f64,
    pub q: f64,
    /// Cut-off phase `K`.
    pub cutoff: usize,
    /// Total mini-slots simulated.
    pub horizon: u64,
    /// Leading mini-slots excluded from the statistics.
    pub warmup: u64,
    pub seed: u64,
    /// Per-node queue limit including the HOL packet; `None` is unbounded.
    pub buffer_capacity: Option<usize>,
    pub batches: usize,
    /// Keep a per-slot event trace.
    pub trace: bool,
}

impl SimConfig {
    /// Defaults: `K = 40`, 10% warmup, 20 batches, unbounded buffers.
    pub fn new(params: SystemParams, n: usize, lambda_hat: f64, q: f64, horizon: u64, seed: u64) -> Self {
        Self {
            params,
            n,
            lambda_hat,
            q,
            cutoff: DEFAULT_CUTOFF,
            horizon,
            warmup: horizon / 10,
            seed,
            buffer_capacity: None,
            batches: DEFAULT_BATCHES,
            trace: false,
        }
    }

    /// Per-node arrival probability per mini-slot, `(lambda_hat / n) a / t_Suc`.
    pub fn arrival_probability(&self) -> f64 {
        self.lambda_hat / self.n as f64 * self.params.a / self.params.t_suc()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params.validate().map_err(|e| ConfigError::Params(e.to_string()))?;
        self.slots()?;
        if self.n == 0 {
            return Err(ConfigError::NoNodes);
        }
        let pa = self.arrival_probability();
        if !(0.0..=1.0).contains(&pa) {
            return Err(ConfigError::ArrivalProbability(pa));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(ConfigError::RetransmissionFactor(self.q));
        }
        if self.cutoff == 0 {
            return Err(ConfigError::Cutoff);
        }
        if self.horizon <= self.warmup {
            return Err(ConfigError::Horizon { horizon: self.horizon, warmup: self.warmup });
        }
        if self.batches < 10 || self.batches as u64 > self.horizon - self.warmup {
            return Err(ConfigError::Batches(self.batches));
        }
        Ok(())
    }

    /// Integer mini-slot counts of the protocol timers.
    pub fn slots(&self) -> Result<Slots, ConfigError> {
        let p = &self.params;
        let whole = |name: &'static str, v: f64| -> Result<u64, ConfigError> {
            let r = v.round();
            if (v - r).abs() > 1e-9 || r < 0.0 {
                return Err(ConfigError::NonIntegerSlots { name, value: v });
            }
            Ok(r as u64)
        };
        Ok(Slots {
            difs_rest: whole("t_A", p.act_slots())?,
            success: whole("T_S/a", p.t_s / p.a)?,
            collision: whole("T_C/a", p.t_c / p.a)?,
            payload: whole("t_S", p.suc_slots())?,
        })
    }
}

/// Timer lengths in mini-slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slots {
    /// Idle slots a fresh or deferred packet must observe, `t_A`.
    pub difs_rest: u64,
    /// Busy period of a success, `T_S / a`.
    pub success: u64,
    /// Busy period of a collision, `T_C / a`.
    pub collision: u64,
    /// Slots after the attempt slot until delivery, `t_S`.
    pub payload: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use dcf_core::{Mechanism, UnitMode};

    fn cfg() -> SimConfig {
        SimConfig::new(SystemParams::preset(Mechanism::Basic, UnitMode::SlotUnits), 10, 0.3, 0.2, 10_000, 1)
    }

    #[test]
    fn defaults_validate() {
        let c = cfg();
        assert_eq!((c.cutoff, c.warmup, c.batches), (40, 1000, 20));
        c.validate().unwrap();
        let s = c.slots().unwrap();
        assert_eq!((s.difs_rest, s.success, s.collision, s.payload), (2, 180, 175, 177));
    }

    #[test]
    fn rejects_bad_configs() {
        let over = SimConfig { lambda_hat: 2000.0, n: 1, ..cfg() };
        assert!(matches!(over.validate(), Err(ConfigError::ArrivalProbability(_))));
        assert!(matches!(SimConfig { warmup: 10_000, ..cfg() }.validate(), Err(ConfigError::Horizon { .. })));
        assert!(matches!(SimConfig { n: 0, ..cfg() }.validate(), Err(ConfigError::NoNodes)));
        assert!(matches!(SimConfig { batches: 5, ..cfg() }.validate(), Err(ConfigError::Batches(5))));
        assert!(SimConfig { q: 1.0, ..cfg() }.validate().is_err());
        let us = SimConfig { params: SystemParams::preset(Mechanism::Basic, UnitMode::Microseconds), ..cfg() };
        assert!(matches!(us.validate(), Err(ConfigError::NonIntegerSlots { .. })));
    }
}
