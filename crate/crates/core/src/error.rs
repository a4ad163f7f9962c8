use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("bad prime: {0}")]
    BadPrime(String),
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("missing symmetric role map: {0}")]
    MissingRoleMap(String),
    #[error("bad index: {0}")]
    BadIndex(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("graph is not chordal; induced cycle {0:?}")]
    NotChordal(Vec<usize>),
    #[error("graph has a directed cycle")]
    Cyclic,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid elimination ordering: {0}")]
    InvalidOrdering(String),
    #[error("linear forms do not form a basis of the dual space: {0}")]
    NotABasis(String),
    #[error("tangency condition violated: {0}")]
    Tangency(String),
    #[error("multiplicity condition fails: {0}")]
    Multiplicity(String),
    #[error("homaloidal PDE fails: {0}")]
    PdeFailure(String),
    #[error("model invariant violated: {0}")]
    Invariant(String),
    #[error("factorization claim does not reproduce its coordinate: {0}")]
    BadClaim(String),
    #[error("no trial produced a zero-dimensional system")]
    NotZeroDimensional,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("near-singular denominator {0}")]
    NearSingular(String),
    #[error("iterative fit did not converge after {iterations} iterations (projected gradient {gradient_norm:e})")]
    NonConvergence { iterations: usize, gradient_norm: f64 },
    #[error("empty data")]
    EmptyData,
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
