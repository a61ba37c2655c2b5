use thiserror::Error;

/// Failures of the analytical model. Payloads are stored as `f64` regardless
/// of the scalar type the model was evaluated in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("attempt rate must be non-negative, got {0}")]
    NegativeAttemptRate(f64),

    /// `p + q <= 1`: the HOL chain has no stationary distribution.
    #[error("HOL chain is not positive recurrent: p + q = {} <= 1 (p = {p}, q = {q})", p + q)]
    NonRecurrent { p: f64, q: f64, x: Option<f64> },

    #[error("singular generating-function recurrence at phase {phase} (z = {z})")]
    SingularPgf { phase: usize, z: f64 },

    #[error("demand {demand} is not below the maximum throughput {max}")]
    NoRoots { demand: f64, max: f64 },

    #[error("retransmission factor is complex at attempt rate x = {x} (discriminant {discriminant})")]
    ComplexRoot { x: f64, discriminant: f64 },

    #[error("bounded delay region is empty: lower bound {lo} >= upper bound {hi}")]
    EmptyRegion { lo: f64, hi: f64 },

    #[error("fixed point did not converge after {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
