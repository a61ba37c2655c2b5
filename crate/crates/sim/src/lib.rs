//! Mini-slot simulator of `n` IEEE 802.11 DCF nodes with probabilistic
//! exponential backoff and Bernoulli input buffers, plus its comparison
//! against the analytical model in `dcf-core`.
//!
//! Each run is sequential and deterministic in `(config, seed)`: ChaCha8
//! with stream 0 for arrivals and stream `i + 1` for node `i`.

pub mod compare;
pub mod config;
pub mod engine;
pub mod record;
pub mod stats;

pub use compare::{measure_vs_analysis, Analysis, Comparison, RelativeErrors};
pub use config::{ConfigError, SimConfig, Slots};
pub use engine::{run, EventCode, Mode, NodeState, SimOutput, TraceEvent};
pub use record::SimRecord;
pub use stats::{Estimate, SimStats};
