use thiserror::Error;

/// Errors raised by the spectral calculus, the manifold types and the
/// geometric checks built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not self-adjoint: |a[{row}][{col}] - conj(a[{col}][{row}])| = {violation:e}")]
    NotSelfAdjoint { violation: f64, row: usize, col: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("function `{function}` is undefined at eigenvalue {eigenvalue:e}")]
    Domain { function: String, eigenvalue: f64 },

    #[error("matrix is not positive definite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("trace is {trace}, expected 1")]
    NotUnitTrace { trace: f64 },

    #[error("tangent vector at a state must be traceless, got trace {trace:e}")]
    NotTangent { trace: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("parameter index {index} out of range for a {dim}-parameter family")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("basis is not a basis of the self-adjoint operators: {reason}")]
    SingularBasis { reason: String },

    #[error("tangent vectors are based at different points")]
    BaseMismatch,

    #[error("chart evaluation failed at theta = {theta:?}: {source}")]
    Chart { theta: Vec<f64>, source: Box<Error> },

    #[error("Kraus operators are not trace preserving: |sum K^dag K - I| = {deviation:e}")]
    NotTracePreserving { deviation: f64 },

    #[error("curve step {step} moves {distance:.3} in Frobenius norm (limit {limit})")]
    CoarseCurve { step: usize, distance: f64, limit: f64 },

    #[error("coordinates are not affine for this connection (second derivative {residual:e})")]
    NotAffine { residual: f64 },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
