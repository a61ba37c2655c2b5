//! Analytical model of IEEE 802.11 DCF with probabilistic exponential
//! backoff: channel renewal quantities, the HOL packet chain, service-time
//! moments, Geo/G/1 delay, the stable-throughput and bounded-delay regions
//! of the retransmission factor, and the self-consistent operating point.
//!
//! Every model type is generic over the scalar through [`Real`]; the
//! aliases at the crate root fix it to `f64`.

// `!(a < b)` is used on purpose so that NaN inputs are rejected; the
// generic scalar has no compound-assignment bounds.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::assign_op_pattern)]

pub mod channel;
pub mod equilibrium;
pub mod error;
pub mod hol;
pub mod params;
pub mod pgf;
pub mod roots;
pub mod scalar;
pub mod service;
pub mod stability;

pub use error::{ModelError, Result};
pub use params::{Cutoff, Mechanism, UnitMode, SLOT_MICROS};
pub use scalar::Real;
pub use service::{Delay, SecondMoment};
pub use equilibrium::Status;
pub use stability::RegionKind;

pub type SystemParams = params::SystemParams<f64>;
pub type BackoffConfig = params::BackoffConfig<f64>;
pub type ChannelPoint = channel::ChannelPoint<f64>;
pub type HolSteadyState = hol::HolSteadyState<f64>;
pub type PgfSystem = pgf::PgfSystem<f64>;
pub type ServiceMoments = service::ServiceMoments<f64>;
pub type ThroughputPoint = stability::ThroughputPoint<f64>;
pub type ThroughputRoots = stability::ThroughputRoots<f64>;
pub type RegionInterval = stability::RegionInterval<f64>;
pub type RegionReport = stability::RegionReport<f64>;
pub type Equilibrium = equilibrium::Equilibrium<f64>;
pub type OperatingPoint = equilibrium::OperatingPoint<f64>;
