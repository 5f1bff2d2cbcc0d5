use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("element {element} is degenerate: {reason}")]
    DegenerateElement { element: usize, reason: String },

    #[error("no star center found for element {0}")]
    StarCenter(usize),

    #[error("stiffness is singular: {0}")]
    SingularStiffness(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("eigensolver did not converge after {iterations} iterations (residuals {residuals:?})")]
    NoConvergence { iterations: usize, residuals: Vec<f64> },

    #[error("negative eigenvalue {0}")]
    NegativeEigenvalue(f64),

    #[error("refinement of element {element} failed: {reason}")]
    Refinement { element: usize, reason: String },

    #[error("convergence fit failed: {0}")]
    Fit(String),

    #[error("adaptive step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
