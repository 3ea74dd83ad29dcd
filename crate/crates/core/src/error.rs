use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular to working precision (pivot {pivot:e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("norm sequence overflowed at power {power}")]
    Overflow { power: usize },

    #[error("contour passes too close to the spectrum (resolvent norm {resolvent_norm:e} at node {node})")]
    ContourTooClose { node: usize, resolvent_norm: f64 },

    #[error("no spectral gap at zero: smallest nonzero eigenvalue {smallest:e} below {threshold:e}")]
    NoSpectralGap { smallest: f64, threshold: f64 },

    #[error("element is not in the subalgebra (membership residual {residual:e})")]
    NotInAlgebra { residual: f64 },

    #[error("subalgebra basis is invalid: {0}")]
    BadBasis(String),

    #[error("invalid commutative model: {0}")]
    BadModel(String),

    #[error("argument {value} outside the domain of {function}")]
    DomainError { function: &'static str, value: f64 },

    #[error("arrow violates the groupoid defining relation (residual {residual:e})")]
    RelationViolated { residual: f64 },

    #[error("arrows are not composable: source {source_unit} vs range {range_unit}")]
    NotComposable { source_unit: f64, range_unit: f64 },

    #[error("kernel support exceeds the convolution window (|mu| = {extent} > {limit})")]
    WindowOverflow { extent: f64, limit: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
