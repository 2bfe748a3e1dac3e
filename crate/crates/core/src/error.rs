use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid crack: {0}")]
    InvalidCrack(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("degenerate triangle {index} (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("value out of range: {0}")]
    Range(String),

    /// The field was evaluated on the crack closure without a side flag.
    #[error("point {point:?} lies on the crack; use a one-sided evaluation")]
    Branch { point: [f64; 3] },

    #[error("eigensolver did not converge after {iterations} iterations (best residuals {residuals:?})")]
    Convergence { iterations: usize, residuals: Vec<f64> },

    #[error("quadrature did not reach tolerance {tol:e} (error estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource(_) | Error::Convergence { .. } | Error::Quadrature { .. } => 3,
            Error::Io(_) | Error::Json(_) => 3,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidCrack(_) => "invalid_crack",
            Error::Resource(_) => "resource",
            Error::DegenerateTriangle { .. } => "degenerate_triangle",
            Error::Input(_) => "input",
            Error::Range(_) => "range",
            Error::Branch { .. } => "branch",
            Error::Convergence { .. } => "convergence",
            Error::Quadrature { .. } => "quadrature",
            Error::Factorization(_) => "factorization",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
