use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{name} = {value} is outside the admissible range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A closed-form kernel was evaluated on one of its poles.
    #[error("kernel singular: {denominator} vanishes")]
    Singular { denominator: &'static str },

    #[error("skeleton kernel singular: subtree sum of vertex {vertex} vanishes")]
    VanishingSubtreeSum { vertex: usize },

    #[error("quadrature failure: non-finite kernel value at node {node:?}")]
    NonFiniteKernel { node: Vec<f64> },

    #[error("noise field has {available} components, {needed} required")]
    ComponentCount { needed: usize, available: usize },

    #[error("noise field has {noise} bins but the grid has {grid}")]
    GridMismatch { noise: usize, grid: usize },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("inadmissible cut: {0}")]
    InadmissibleCut(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
