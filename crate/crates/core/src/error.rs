use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("k too large: {0}")]
    KTooLarge(String),

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("jacobi iteration did not converge within the sweep limit")]
    NoConvergence,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("too few points: {0}")]
    TooFewPoints(String),

    #[error("degenerate cloud: {0}")]
    DegenerateCloud(String),

    #[error("operation requires at least two classes")]
    SingleClass,

    #[error("no such edge: ({0}, {1})")]
    NoSuchEdge(usize, usize),

    #[error("disconnected supports: node {0} cannot reach node {1}")]
    DisconnectedSupports(usize, usize),

    #[error("k too small: {0}")]
    KTooSmall(String),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("class {0} has no nodes in the condensed graph")]
    ClassMissingInCondensed(usize),

    #[error("non-finite loss encountered {0}")]
    NonFiniteLoss(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("{metric}: {source}")]
    Metric {
        metric: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach the name of the metric that produced this error.
    pub fn in_metric(self, metric: &'static str) -> Self {
        Error::Metric {
            metric,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
