use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dcf_core::{Mechanism, UnitMode};

#[derive(Debug, Parser)]
#[command(
    name = "dcf",
    version,
    about = "IEEE 802.11 DCF with probabilistic exponential backoff: throughput curves, \
             stability regions, delay sweeps and a seeded mini-slot simulator",
    after_help = "Flags override values from --scenario FILE, which override the defaults.\n\
                  CSV goes to --out or stdout; summaries go to stderr.\n\
                  Exit codes: 0 ok, 2 bad flags or scenario, 3 demand not carriable (no roots)."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MechanismArg {
    Basic,
    Rts,
}

impl From<MechanismArg> for Mechanism {
    fn from(m: MechanismArg) -> Self {
        match m {
            MechanismArg::Basic => Mechanism::Basic,
            MechanismArg::Rts => Mechanism::RtsCts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitsArg {
    Slots,
    Us,
}

impl From<UnitsArg> for UnitMode {
    fn from(u: UnitsArg) -> Self {
        match u {
            UnitsArg::Slots => UnitMode::SlotUnits,
            UnitsArg::Us => UnitMode::Microseconds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVar {
    Q,
    Lambda,
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Default, Clone, Args)]
pub struct GlobalArgs {
    /// Access mechanism [default: basic]
    #[arg(long, global = true, value_enum)]
    pub mechanism: Option<MechanismArg>,
    /// Time unit of the timing constants [default: slots]
    #[arg(long, global = true, value_enum)]
    pub units: Option<UnitsArg>,
    /// Number of nodes [default: 10]
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Aggregate input rate, packets per t_Suc [default: 0.3]
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Retransmission factor [default: 0.2]
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Cut-off backoff phase of the simulator [default: 40]
    #[arg(long = "K", global = true)]
    pub k: Option<usize>,
    /// Simulation seed [default: 1]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Simulated mini-slots [default: 10000000]
    #[arg(long, global = true)]
    pub horizon: Option<u64>,
    /// Mini-slots discarded before measuring [default: horizon / 10]
    #[arg(long, global = true)]
    pub warmup: Option<u64>,
    /// CSV output file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON scenario file
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Also write a gnuplot script that plots the CSV (needs --out)
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Network throughput versus attempt rate.
    #[command(after_help = "Columns: mechanism, units, G_per_us, x, lambda_out\n\
                            x is attempts per mini-slot, G_per_us = x / 50.")]
    Curve(CurveArgs),
    /// Stable-throughput and bounded-delay regions of q.
    #[command(after_help = "Columns: mechanism, units, n, lambda_hat, demand, lambda_max, x_max, \
                            x_S, x_L, G_S_per_us, G_L_per_us, RT_lo, RT_hi, RT_clamped, RD_lo, RD_hi, \
                            RT_inf_lo, RT_inf_hi\nRD_lo/RD_hi are empty when the bounded-delay region is empty.")]
    Regions,
    /// One row per grid point of q, lambda or n.
    #[command(after_help = "Columns: mechanism, units, n, lambda_hat, q, K, demand, status, x_eq, \
                            G_eq_per_us, rho_eq, eq_delay_slots, eq_delay_ms, x_S, G_S_per_us, rho, \
                            mean_service_slots, mean_service_ms, delay_slots, delay_ms, error\n\
                            With --simulate: seed, horizon, sim_throughput, sim_throughput_ci, \
                            sim_sojourn_slots, sim_sojourn_ms, sim_sojourn_ci, sim_mean_service, \
                            sim_collision_rate, sim_error\n\
                            *_eq columns are at the attempt-rate balance root, the rest at the \
                            low-contention demand root x_S. Unbounded delays read \"inf\".")]
    Sweep(SweepArgs),
    /// Run the simulator.
    #[command(after_help = "Columns: mechanism, n, lambda_hat, q, K, seed, horizon, throughput, \
                            throughput_ci, mean_sojourn_slots, mean_sojourn_ci, mean_service, \
                            collision_rate\nOne row per replication, seeds seed, seed+1, ...")]
    Simulate(SimulateArgs),
    /// Simulation against the analytic prediction at the same inputs.
    #[command(after_help = "Columns: mechanism, n, lambda_hat, q, K, seed, horizon, demand, status, \
                            sim_throughput, sim_throughput_ci, throughput_rel_err, mean_service_slots, \
                            sim_mean_service, service_rel_err, delay_slots, delay_ms, sim_sojourn_slots, \
                            sim_sojourn_ms, sim_sojourn_ci, sojourn_rel_err, delay_in_ci, x_eq, rho_eq, rho")]
    Compare(SimulateArgs),
}

#[derive(Debug, Default, Clone, Args)]
pub struct CurveArgs {
    /// Smallest attempt rate x, per mini-slot [default: 0.0001]
    #[arg(long)]
    pub x_min: Option<f64>,
    /// Largest attempt rate x, per mini-slot [default: 10]
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Number of grid points [default: 400]
    #[arg(long)]
    pub points: Option<usize>,
    /// Grid spacing [default: log]
    #[arg(long, value_enum)]
    pub spacing: Option<Spacing>,
}

#[derive(Debug, Default, Clone, Args)]
pub struct SweepArgs {
    /// Swept variable
    #[arg(long = "var", value_enum)]
    pub variable: Option<SweepVar>,
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Add simulation columns to every row
    #[arg(long)]
    pub simulate: bool,
}

#[derive(Debug, Default, Clone, Args)]
pub struct SimulateArgs {
    /// Independent runs with consecutive seeds [default: 1]
    #[arg(long)]
    pub replications: Option<usize>,
    /// Write a slot,event,node trace of the first run
    #[arg(long)]
    pub trace: Option<std::path::PathBuf>,
}
