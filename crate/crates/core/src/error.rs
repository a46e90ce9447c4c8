use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid size for {family}: {value} (minimum {min})")]
    InvalidSize {
        family: &'static str,
        value: usize,
        min: usize,
    },

    #[error("{what} exceeds the size limit ({value} > {limit})")]
    SizeLimit {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge {index}: {message}")]
    InvalidEdge { index: usize, message: String },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("graph is disconnected: vertex {vertex} is unreachable from vertex 0")]
    Disconnected { vertex: usize },

    #[error("vertex {vertex} has no incident edges")]
    IsolatedVertex { vertex: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("incompatible inner product spaces in composition")]
    IncompatibleSpaces,

    #[error("operator is not self-adjoint (deviation {deviation:e})")]
    NotSelfAdjoint { deviation: f64 },

    #[error("map is not 1-Lipschitz (measured constant {constant})")]
    NotLipschitz { constant: f64 },

    #[error("map is not centered (mean norm {mean_norm:e})")]
    NotCentered { mean_norm: f64 },

    #[error("map is already centered; use center instead")]
    AlreadyCentered,

    #[error("the projection bound requires target dimension n >= 2, got {n}")]
    BoundInapplicable { n: usize },

    #[error("target dimension {n} out of range {min}..={max}")]
    DimensionOutOfRange { n: usize, min: usize, max: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
