use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("Jacobi iteration did not converge within {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix is not positive definite: minimum eigenvalue {min_eigenvalue:.6e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix exponential overflow: norm {norm:.3e} exceeds scaling limit {limit:.3e}")]
    Overflow { norm: f64, limit: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("Dyson map is not invertible: smallest eigenvalue of η†η is {min_eigenvalue:.3e}")]
    SingularEta { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("singular coefficient at t = {t:.6} lies on or too close to the grid")]
    SingularityOnGrid { t: f64 },

    #[error("evaluation point t = {t:.6} is within the singularity margin of a pole")]
    SingularityTooClose { t: f64 },

    #[error("metric lost positivity at t = {t:.6} (minimum eigenvalue {min_eigenvalue:.3e})")]
    PositivityLost { t: f64, min_eigenvalue: f64 },

    #[error("trajectory has {nodes} nodes, at least {required} are required")]
    GridTooShort { nodes: usize, required: usize },

    #[error("quadrature error estimate {estimate:.3e} exceeds {limit:.3e}")]
    QuadratureTooCoarse { estimate: f64, limit: f64 },

    #[error("solution blew up at t = {t:.6} (|value| = {value:.3e})")]
    Blowup { t: f64, value: f64 },

    #[error("Fock truncation too small: tail mass {tail:.3e} beyond dimension {dim}")]
    TruncationTooSmall { tail: f64, dim: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

impl Error {
    /// Errors that signal a breakdown of the numerics rather than bad input.
    pub fn is_numerical_breakdown(&self) -> bool {
        matches!(
            self,
            Error::PositivityLost { .. }
                | Error::Blowup { .. }
                | Error::NoConvergence { .. }
                | Error::Overflow { .. }
                | Error::NonFinite
                | Error::Singular
                | Error::SingularEta { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::QuadratureTooCoarse { .. }
                | Error::TruncationTooSmall { .. }
        )
    }
}
