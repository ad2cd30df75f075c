//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by field construction, norm evaluation, solvers and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A mean-zero field was required but the zero mode is populated.
    #[error("field has nonzero mean (|mean| = {magnitude:.3e})")]
    NonZeroMean { magnitude: f64 },

    /// A divergence-free field was required.
    #[error("field is not divergence-free (max |n.u_n| = {residual:.3e})")]
    NotDivergenceFree { residual: f64 },

    /// Heat propagation backwards in time is not defined.
    #[error("negative time {t}")]
    NegativeTime { t: f64 },

    /// The operation needs strictly positive time.
    #[error("non-positive time {t}")]
    NonPositiveTime { t: f64 },

    /// The helical frame is undefined at the zero wavevector.
    #[error("zero wavevector has no helical frame")]
    ZeroWavevector,

    /// No lattice point has the requested squared radius.
    #[error("no lattice points with |n|^2 = {lambda_sq}")]
    EmptyShell { lambda_sq: i64 },

    /// Band edges must satisfy lo < hi.
    #[error("band radii out of order: {lo} >= {hi}")]
    UnorderedRadii { lo: f64, hi: f64 },

    /// A scalar exponent parameter is outside its admissible range.
    #[error("exponent {name} = {value} outside admissible range {range}")]
    BadExponent {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    /// The exponent pair of the paraproduct bound is inadmissible.
    #[error("exponent pair (a, kappa) = ({a}, {kappa}) violates 1/2 < a < 1, 0 < kappa < 1 - a")]
    BadExponents { a: f64, kappa: f64 },

    /// A trajectory with no samples cannot be measured.
    #[error("trajectory holds no samples")]
    EmptyTrajectory,

    /// Fields or trajectories live on incompatible meshes.
    #[error("mesh mismatch: {reason}")]
    MeshMismatch { reason: String },

    /// The fixed-point iteration is not contracting.
    #[error("iteration not contracting after {iterations} steps (last ratio {last_ratio:.3e})")]
    NoConvergence { iterations: usize, last_ratio: f64 },

    /// The time stepper blew up.
    #[error("energy grew {growth:.3e}x by t = {time:.6e}; step size too large for this data")]
    Instability { time: f64, growth: f64 },

    /// A solver or scenario configuration value is unusable.
    #[error("bad configuration: {reason}")]
    BadConfig { reason: String },

    /// Too few populated shells to fit a spectral decay rate.
    #[error("only {shells} populated shells, need at least 4 for a decay fit")]
    DegenerateFit { shells: usize },

    /// A scenario hypothesis failed before solving started.
    #[error("hypothesis '{hypothesis}' violated: measured {measured:.6e} vs bound {bound:.6e}")]
    ConditionViolated {
        hypothesis: String,
        measured: f64,
        bound: f64,
    },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Config text could not be tokenized.
    #[error("syntax error at line {line}, column {column}: {reason}")]
    Syntax {
        line: usize,
        column: usize,
        reason: String,
    },

    /// Config key/value failed validation.
    #[error("schema error: key '{key}': {reason}")]
    Schema { key: String, reason: String },

    /// Snapshot file does not start with the expected magic bytes.
    #[error("bad snapshot magic (expected NSLB1)")]
    BadMagic,

    /// Snapshot file ended before the declared payload.
    #[error("truncated snapshot payload: expected {expected} bytes, got {got}")]
    TruncatedPayload { expected: usize, got: usize },
}

impl Error {
    /// CLI exit code classification: 1 for failed verdicts, 2 for
    /// usage/config problems, 3 for runtime and numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConditionViolated { .. } => 1,
            Error::BadConfig { .. }
            | Error::Syntax { .. }
            | Error::Schema { .. }
            | Error::BadMagic
            | Error::TruncatedPayload { .. } => 2,
            _ => 3,
        }
    }
}
