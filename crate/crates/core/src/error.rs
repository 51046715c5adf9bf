use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state {state:?} is outside the cone of {system}: violates {violated}")]
    ConeViolation { system: String, violated: String, state: Vec<f64> },

    #[error("degenerate closure: {0}")]
    DegenerateClosure(String),

    #[error("no conjugate point: {0}")]
    NoSolution(String),

    #[error("hyperbolicity violated at {state:?}: eigenvalue {re} {im:+}i")]
    Hyperbolicity { state: Vec<f64>, re: f64, im: f64 },

    #[error("finite-difference stencil left the cone around {0:?}")]
    Stencil(Vec<f64>),

    #[error("elliptic branch restriction violated: {0}")]
    Branch(String),

    #[error("not admissible: {0}")]
    Admissibility(String),

    #[error("cell {cell} left the cone at step {step}: {detail}")]
    CellAbort { cell: usize, step: usize, detail: String },

    #[error("time step underflow (dt = {0:e})")]
    DtUnderflow(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
