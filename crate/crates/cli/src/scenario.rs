use std::path::{Path, PathBuf};

use dcf_core::{Mechanism, SystemParams, UnitMode};
use dcf_sim::SimConfig;
use serde::Deserialize;

use crate::args::{CurveArgs, GlobalArgs, SimulateArgs, Spacing, SweepArgs, SweepVar};
use crate::CliError;

/// JSON scenario file. Every key is optional; unknown keys are rejected.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mechanism: Option<Mechanism>,
    pub units: Option<UnitMode>,
    /// Custom timing constants: replaces the preset picked by `mechanism`
    /// and `units`.
    pub params: Option<SystemParams>,
    pub n: Option<usize>,
    #[serde(alias = "lambda")]
    pub lambda_hat: Option<f64>,
    pub q: Option<f64>,
    #[serde(rename = "K", alias = "k")]
    pub cutoff: Option<usize>,
    pub seed: Option<u64>,
    pub horizon: Option<u64>,
    pub warmup: Option<u64>,
    pub batches: Option<usize>,
    pub buffer_capacity: Option<usize>,
    pub replications: Option<usize>,
    pub sweep: Option<SweepSpec>,
    pub curve: Option<CurveSpec>,
    pub simulate: Option<bool>,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub points: Option<usize>,
    pub spacing: Option<Spacing>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("scenario {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Fully resolved inputs shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub params: SystemParams,
    pub n: usize,
    pub lambda_hat: f64,
    pub q: f64,
    pub cutoff: usize,
    pub seed: u64,
    pub horizon: u64,
    pub warmup: Option<u64>,
    pub batches: usize,
    pub buffer_capacity: Option<usize>,
    pub replications: usize,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

impl Settings {
    pub fn resolve(g: &GlobalArgs, s: &Scenario) -> Result<Self, CliError> {
        let mechanism = g.mechanism.map(Mechanism::from).or(s.mechanism).unwrap_or(Mechanism::Basic);
        let units = g.units.map(UnitMode::from).or(s.units).unwrap_or_default();
        let params = match s.params {
            Some(p) if g.mechanism.is_none() && g.units.is_none() => p,
            _ => SystemParams::preset(mechanism, units),
        };
        params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let settings = Self {
            params,
            n: g.n.or(s.n).unwrap_or(10),
            lambda_hat: g.lambda.or(s.lambda_hat).unwrap_or(0.3),
            q: g.q.or(s.q).unwrap_or(0.2),
            cutoff: g.k.or(s.cutoff).unwrap_or(dcf_sim::config::DEFAULT_CUTOFF),
            seed: g.seed.or(s.seed).unwrap_or(1),
            horizon: g.horizon.or(s.horizon).unwrap_or(10_000_000),
            warmup: g.warmup.or(s.warmup),
            batches: s.batches.unwrap_or(dcf_sim::config::DEFAULT_BATCHES),
            buffer_capacity: s.buffer_capacity,
            replications: s.replications.unwrap_or(1),
            out: g.out.clone().or_else(|| s.out.clone()),
            plot: g.plot.clone().or_else(|| s.plot.clone()),
            trace: s.trace.clone(),
        };
        if settings.n == 0 {
            return Err(CliError::Usage("--n must be >= 1".into()));
        }
        if !(settings.lambda_hat >= 0.0 && settings.lambda_hat.is_finite()) {
            return Err(CliError::Usage(format!("--lambda must be >= 0, got {}", settings.lambda_hat)));
        }
        if !(settings.q > 0.0 && settings.q < 1.0) {
            return Err(CliError::Usage(format!("--q must lie in (0, 1), got {}", settings.q)));
        }
        if settings.plot.is_some() && settings.out.is_none() {
            return Err(CliError::Usage("--plot needs --out so the script has a data file".into()));
        }
        Ok(settings)
    }

    pub fn with_sim_args(mut self, a: &SimulateArgs) -> Result<Self, CliError> {
        if let Some(r) = a.replications {
            self.replications = r;
        }
        if let Some(t) = &a.trace {
            self.trace = Some(t.clone());
        }
        if self.replications == 0 {
            return Err(CliError::Usage("--replications must be >= 1".into()));
        }
        Ok(self)
    }

    /// Simulator configuration for one replication.
    pub fn sim_config(&self, n: usize, lambda_hat: f64, q: f64, replication: usize) -> SimConfig {
        let mut c = SimConfig::new(self.params, n, lambda_hat, q, self.horizon, self.seed + replication as u64);
        c.cutoff = self.cutoff;
        c.batches = self.batches;
        c.buffer_capacity = self.buffer_capacity;
        if let Some(w) = self.warmup {
            c.warmup = w;
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl CurveGrid {
    pub fn resolve(a: &CurveArgs, s: &Scenario) -> Result<Self, CliError> {
        let c = s.curve.unwrap_or_default();
        let grid = Self {
            x_min: a.x_min.or(c.x_min).unwrap_or(1e-4),
            x_max: a.x_max.or(c.x_max).unwrap_or(10.0),
            points: a.points.or(c.points).unwrap_or(400),
            spacing: a.spacing.or(c.spacing).unwrap_or(Spacing::Log),
        };
        let ok = grid.x_min >= 0.0 && grid.x_max.is_finite() && grid.x_min <= grid.x_max;
        if !ok || (grid.spacing == Spacing::Log && grid.x_min <= 0.0) {
            return Err(CliError::Usage(format!(
                "invalid attempt-rate range [{}, {}] for {:?} spacing",
                grid.x_min, grid.x_max, grid.spacing
            )));
        }
        Ok(grid)
    }

    pub fn values(&self) -> Vec<f64> {
        let k = self.points;
        (0..k)
            .map(|i| {
                if k == 1 {
                    return self.x_min;
                }
                let t = i as f64 / (k - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.x_min + t * (self.x_max - self.x_min),
                    Spacing::Log => self.x_min * (self.x_max / self.x_min).powf(t),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub variable: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub simulate: bool,
}

impl SweepGrid {
    pub fn resolve(a: &SweepArgs, s: &Scenario) -> Result<Self, CliError> {
        let spec = s.sweep;
        let pick = |flag: Option<f64>, f: fn(&SweepSpec) -> f64, name: &str| {
            flag.or(spec.as_ref().map(f))
                .ok_or_else(|| CliError::Usage(format!("sweep needs --{name} or a scenario \"sweep\" block")))
        };
        let grid = Self {
            variable: a
                .variable
                .or(spec.map(|s| s.variable))
                .ok_or_else(|| CliError::Usage("sweep needs --var q|lambda|n".into()))?,
            start: pick(a.start, |s| s.start, "start")?,
            stop: pick(a.stop, |s| s.stop, "stop")?,
            step: pick(a.step, |s| s.step, "step")?,
            simulate: a.simulate || s.simulate.unwrap_or(false),
        };
        if !(grid.step > 0.0 && grid.step.is_finite()) {
            return Err(CliError::Usage(format!("sweep step must be > 0, got {}", grid.step)));
        }
        if !(grid.start.is_finite() && grid.stop.is_finite()) {
            return Err(CliError::Usage("sweep bounds must be finite".into()));
        }
        if grid.variable == SweepVar::N && (grid.start.fract() != 0.0 || grid.step.fract() != 0.0) {
            return Err(CliError::Usage("an n sweep needs integer start and step".into()));
        }
        Ok(grid)
    }

    /// `start + i step` up to `stop`; empty when `start > stop`.
    pub fn values(&self) -> Vec<f64> {
        let slack = self.step * 1e-9;
        let mut out = Vec::new();
        let mut i = 0u64;
        loop {
            // snap accumulated rounding so 0.1 + 4 * 0.1 prints as 0.5
            let v = ((self.start + i as f64 * self.step) * 1e12).round() / 1e12;
            if v > self.stop + slack {
                break;
            }
            out.push(v);
            i += 1;
        }
        out
    }
}
