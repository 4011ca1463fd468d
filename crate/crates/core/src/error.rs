use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid ball: {0}")]
    InvalidBall(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("nested integral I_{0} is not available in the integral table")]
    MissingIntegral(usize),

    #[error("quadrature did not converge for I_{m}: error estimate {error:e} exceeds tolerance {tolerance:e}")]
    QuadratureNonConvergence { m: usize, error: f64, tolerance: f64 },

    #[error("commutativity graph covers radius {radius}, walks at depth k={k} need radius >= {needed}")]
    InsufficientExtension { radius: usize, k: usize, needed: usize },

    #[error("ball has {nodes} nodes, above the Hilbert-space cap of {cap} qubits")]
    HilbertCapExceeded { nodes: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("integrator step size underflow at t={t} (h={h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("statevector norm drifted by {drift:e}, above the allowed {allowed:e}")]
    NormDrift { drift: f64, allowed: f64 },

    #[error("energies missing for {} ball(s): {}", .0.len(), .0.join(", "))]
    MissingEnergies(Vec<String>),

    #[error("no ball of class {0} is available for the ratio")]
    MissingClass(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: String, reason: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
