use thiserror::Error;

/// Errors raised by the numerical kernels, direction computations and line searches.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum YandError {
    #[error("gradient vanishes (norm {norm:e}); no level-set frame exists")]
    ZeroGradient { norm: f64 },

    #[error("matrix is not symmetric: max asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("matrix has no Cholesky factor (not positive definite)")]
    NotFactorized,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("evaluation point lies outside the objective's domain")]
    DomainViolation,

    #[error("tangent-tangent Hessian block is singular (min |eigenvalue| {min_eig:e})")]
    DegenerateTangentBlock { min_eig: f64 },

    #[error("Hessian is singular (min |eigenvalue| {min_eig:e})")]
    SingularHessian { min_eig: f64 },

    #[error("slice of the sublevel set is empty")]
    EmptySlice,

    #[error("slice-centroid estimates are only available in two dimensions (got {dim})")]
    UnsupportedDimension { dim: usize },

    #[error("no step in (0, {alpha_max}] has a finite objective value")]
    NoFiniteStep { alpha_max: f64 },

    #[error("not a descent direction: directional derivative {slope:e} >= 0")]
    NotDescent { slope: f64 },

    #[error("invalid line-search parameters: {0}")]
    InvalidParameters(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("rate diagnostics need a reference optimum (x* or f*)")]
    MissingReference,

    #[error("scaling matrix must be invertible with positive determinant")]
    SingularScaling,
}

pub type Result<T, E = YandError> = std::result::Result<T, E>;
