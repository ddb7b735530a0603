use thiserror::Error;

pub type Result<T> = std::result::Result<T, QmsError>;

#[derive(Debug, Clone, Error)]
pub enum QmsError {
    #[error("Hamiltonian is not Hermitian (defect {0:e})")]
    InvalidHamiltonian(f64),

    #[error("generator is not ergodic: kernel singular value ratio {ratio:e}")]
    NotErgodic { ratio: f64 },

    #[error("state is not strictly positive (min eigenvalue {0:e})")]
    SingularState(f64),

    #[error("matrix is not in the traceless Hermitian tangent space (defect {0:e})")]
    NotTangent(f64),

    #[error("finite-difference step {step:e} leaves the positive cone (largest admissible {max:e})")]
    StepTooLarge { step: f64, max: f64 },

    #[error("generator spec parse error: {0}")]
    SpecParse(String),

    #[error("generator spec dimension error: {0}")]
    SpecDimension(String),

    #[error("simplex jets need {work:e} operations, limit is {limit:e}")]
    TooExpensive { work: f64, limit: f64 },

    #[error(transparent)]
    Core(#[from] flowmetric_core::Error),
}
