use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("potential has no product structure")]
    MissingStructure,

    #[error("weight function vanished at coordinate {coord} (g = {value})")]
    WeightVanished { coord: usize, value: f64 },

    #[error("assembled matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    AsymmetricResult { asymmetry: f64 },

    #[error("weight matrix is singular at sample {point:?}")]
    SingularWeight { point: Vec<f64> },

    #[error("non-diagonal weights are only accepted by symmetry checks")]
    UnsupportedWeight,

    #[error("grid of {nodes} nodes exceeds the cap of {cap}")]
    GridTooLarge { nodes: usize, cap: usize },

    #[error("potential value {value} at node {node} would overflow the Gibbs weight")]
    OverflowGuard { node: usize, value: f64 },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("integral of weight entry {coord} is {value:e}, too small to normalise")]
    SingularMass { coord: usize, value: f64 },

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
