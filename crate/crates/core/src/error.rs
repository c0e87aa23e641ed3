use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid norm exponent q = {0} (need q >= 1 or infinity)")]
    InvalidExponent(f64),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("detailed balance violated: max |pi_i a_ij - pi_j a_ji| = {defect:e} (tolerance {tolerance:e})")]
    DetailedBalanceViolation { defect: f64, tolerance: f64 },

    #[error("pair matrices are not uniformly positive definite: c_M = {c_m:e}")]
    HypothesisH3Violation { c_m: f64 },

    #[error("negative data: {0}")]
    NegativeData(String),

    #[error(
        "newton iteration failed after {retries} dt halvings at t = {time}: residual {residual:e}"
    )]
    NewtonDivergence {
        time: f64,
        retries: usize,
        residual: f64,
    },

    #[error("accepted state has entry {min:e} below the nonnegativity tolerance")]
    NegativeStateUnrecoverable { min: f64 },

    #[error("meshes are not nested: fine {fine}, coarse {coarse}")]
    NonNestedMeshes { fine: usize, coarse: usize },

    #[error("mass mismatch between distributions: {0:e}")]
    MassMismatch(f64),

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("counterexample construction failed: {0}")]
    Counterexample(String),

    #[error("solver failure at {context}: {source}")]
    Study {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures raised before any computation (bad inputs or config).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::NewtonDivergence { .. } | Error::NegativeStateUnrecoverable { .. } => false,
            Error::Study { source, .. } => source.is_validation(),
            Error::Io(_) => false,
            _ => true,
        }
    }
}
