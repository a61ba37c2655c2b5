use dcf_core::equilibrium::{operating_point, solve};
use dcf_core::{Delay, Equilibrium, ModelError, OperatingPoint};
use serde::Serialize;

use crate::config::{ConfigError, SimConfig};
use crate::engine::run;
use crate::stats::SimStats;

/// Analytic side of a comparison, all times in mini-slots.
#[derive(Debug, Clone)]
pub struct Analysis {
    /// Normalized throughput the network must carry.
    pub demand: f64,
    /// Queue at the low-contention demand root; the reference for the
    /// simulated service and sojourn times.
    pub operating: OperatingPoint,
    /// Fixed point of the attempt-rate balance at the configured `q`.
    pub balance: Result<Equilibrium, ModelError>,
    pub service_slots: f64,
    pub sojourn_slots: Delay<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativeErrors {
    pub throughput: f64,
    pub service: f64,
    /// `None` when the analytic delay is unbounded.
    pub sojourn: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub stats: SimStats,
    pub analysis: Result<Analysis, ModelError>,
}

impl Comparison {
    pub fn errors(&self) -> Option<RelativeErrors> {
        let a = self.analysis.as_ref().ok()?;
        let s = &self.stats;
        Some(RelativeErrors {
            throughput: relative(s.throughput.mean, a.demand),
            service: relative(s.mean_service, a.service_slots),
            sojourn: a.sojourn_slots.finite().map(|d| relative(s.mean_sojourn.mean, d)),
        })
    }

    /// Analytic mean sojourn at the operating point, mini-slots.
    pub fn predicted_sojourn(&self) -> Option<Delay<f64>> {
        self.analysis.as_ref().ok().map(|a| a.sojourn_slots)
    }
}

/// `(measured - predicted) / predicted`; zero when both are zero.
pub fn relative(measured: f64, predicted: f64) -> f64 {
    if predicted == 0.0 {
        if measured == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        (measured - predicted) / predicted
    }
}

pub fn analyse(config: &SimConfig) -> Result<Analysis, ModelError> {
    let p = &config.params;
    let operating = operating_point(p, config.n, config.lambda_hat, config.q)?;
    Ok(Analysis {
        demand: p.demand(config.lambda_hat),
        service_slots: p.to_slots(operating.moments.mean),
        sojourn_slots: operating.delay.map(|d| p.to_slots(d)),
        operating,
        balance: solve(p, config.n, config.lambda_hat, config.q),
    })
}

/// Runs the simulation and pairs it with the analytic prediction at the same
/// inputs. A failed analysis leaves the statistics intact.
pub fn measure_vs_analysis(config: &SimConfig) -> Result<Comparison, ConfigError> {
    let stats = run(config)?.stats;
    Ok(Comparison { stats, analysis: analyse(config) })
}
