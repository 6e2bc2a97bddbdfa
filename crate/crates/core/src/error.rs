use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the channel model.
///
/// Numeric payloads are carried as `f64` regardless of the working precision so
/// that diagnostics stay printable without generic bounds.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid planar array: {field} {reason}")]
    InvalidArray { field: &'static str, reason: String },

    #[error("evanescent wavenumber: kx={kx}, ky={ky} exceeds kappa={kappa}")]
    Evanescent { kx: f64, ky: f64, kappa: f64 },

    #[error("cell ({lx}, {ly}) does not intersect the unit disk")]
    CellOutsideDisk { lx: i64, ly: i64 },

    #[error(
        "quadrature did not converge after depth {depth}: best estimate {estimate}, error bound {error_bound}"
    )]
    Quadrature {
        estimate: f64,
        error_bound: f64,
        depth: usize,
    },

    #[error("spectral factor has no support on the upper hemisphere")]
    EmptySpectrum,

    #[error("invalid spectral factor: {0}")]
    InvalidSpectrum(String),

    #[error("operation requires a separable coupling matrix")]
    NotSeparable,

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("explicit correlation matrix of side {requested} exceeds the limit {limit}")]
    SizeLimit { requested: usize, limit: usize },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("power allocation trace {trace} exceeds the unit budget")]
    TraceViolation { trace: f64 },

    #[error("all eigenvalues are zero")]
    AllZeroEigenvalues,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
