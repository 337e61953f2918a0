use thiserror::Error;

use crate::tree::VertexAddress;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid tree family: {0}")]
    InvalidFamily(String),

    #[error("invalid vertex address `{0}`")]
    InvalidAddress(String),

    #[error("invalid boundary point: {0}")]
    InvalidBoundaryPoint(String),

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("vertex {0} is not on the cut boundary")]
    NotOnBoundary(VertexAddress),

    #[error("cuts are not nested")]
    NotNested,

    #[error("invalid permutation `{0}`")]
    InvalidPermutation(String),

    #[error("invalid hierarchomorphism: {}", .0.join("; "))]
    InvalidElement(Vec<String>),

    #[error("interior vertex {0} has no image: element carries no interior map")]
    MissingInteriorMap(VertexAddress),

    #[error("lambda must lie in (0, 1), got {0}")]
    LambdaOutOfRange(f64),

    #[error("duplicate vertex {0} in context")]
    DuplicateVertex(VertexAddress),

    #[error("vertex {0} is not part of the Gram context")]
    MissingVertex(VertexAddress),

    #[error("Gram matrix is not numerically positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("not a connected subtree: {0}")]
    NotSubtree(String),

    #[error("singular subtree block in projection")]
    SingularBlock,

    #[error("vertex set is not closed under the element: {0} maps outside")]
    NotClosed(VertexAddress),

    #[error("series diverges at lambda = {0}")]
    Divergent(f64),

    #[error("critical exponent search cannot discriminate: {0}")]
    NonDiscriminating(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
