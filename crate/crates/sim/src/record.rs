use serde::Serialize;

use crate::config::SimConfig;
use crate::stats::SimStats;

/// One CSV row per simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRecord {
    pub mechanism: &'static str,
    pub n: usize,
    pub lambda_hat: f64,
    pub q: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub seed: u64,
    pub horizon: u64,
    pub throughput: f64,
    pub throughput_ci: f64,
    pub mean_sojourn_slots: f64,
    pub mean_sojourn_ci: f64,
    pub mean_service: f64,
    pub collision_rate: f64,
}

impl SimRecord {
    pub const HEADER: [&'static str; 13] = [
        "mechanism",
        "n",
        "lambda_hat",
        "q",
        "K",
        "seed",
        "horizon",
        "throughput",
        "throughput_ci",
        "mean_sojourn_slots",
        "mean_sojourn_ci",
        "mean_service",
        "collision_rate",
    ];

    pub fn new(config: &SimConfig, stats: &SimStats) -> Self {
        Self {
            mechanism: config.params.mechanism.label(),
            n: config.n,
            lambda_hat: config.lambda_hat,
            q: config.q,
            k: config.cutoff,
            seed: config.seed,
            horizon: config.horizon,
            throughput: stats.throughput.mean,
            throughput_ci: stats.throughput.half_width,
            mean_sojourn_slots: stats.mean_sojourn.mean,
            mean_sojourn_ci: stats.mean_sojourn.half_width,
            mean_service: stats.mean_service,
            collision_rate: stats.collision_rate,
        }
    }
}
