use thiserror::Error;

/// Every failure the library reports.
///
/// Variants are grouped by the layer that raises them. The CLI maps
/// [`Error::is_usage`] errors to a different exit code than numerical ones.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // chaos
    #[error("function value is not finite at quadrature node {node}")]
    NonFiniteQuadrature { node: f64 },
    #[error("no coefficient c_1..c_{truncation} exceeds the rank tolerance {tolerance:e}")]
    RankNotFound { truncation: usize, tolerance: f64 },
    #[error("operation requires Hermite rank d >= 1")]
    ZeroRank,
    #[error("level-0 coefficient {value:e} is not zero (tolerance {tolerance:e})")]
    NonzeroConstant { value: f64, tolerance: f64 },
    #[error("semigroup time must be >= 0, got {0}")]
    NegativeTime(f64),
    #[error("invalid expansion: {0}")]
    InvalidExpansion(String),
    #[error("unknown function spec `{0}`")]
    UnknownFunction(String),

    // covariance
    #[error("invalid covariance model: {0}")]
    InvalidModel(String),
    #[error("series sum_k |rho(k)|^{power} diverges for this model")]
    DivergentSeries { power: usize },
    #[error("critical regime with rank 1 is undefined (H = 1/2 is white noise)")]
    CriticalRankOne,

    // simulation
    #[error("covariance is not embeddable: min eigenvalue {min_eigenvalue:e} (n = {n})")]
    NotEmbeddable { n: usize, min_eigenvalue: f64 },
    #[error("replication {index}: {source}")]
    Replication {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    // partial sums
    #[error("expansion has non-zero mean part {0:e}; center the function first")]
    NonCenteredExpansion(f64),
    #[error("time {0} is outside [0, 1] or not covered by the path grid")]
    GridOutOfRange(f64),
    #[error("path of length {len} is too short, need {needed}")]
    PathTooShort { len: usize, needed: usize },

    // statistics
    #[error("condition (h1) fails: sum_k |rho(k)|^{rank} diverges")]
    ConditionH1Violated { rank: usize },
    #[error("sigma^2 = {value:e} is negative beyond its tail bound {tail_bound:e}")]
    NegativeVariance { value: f64, tail_bound: f64 },
    #[error("all samples are equal")]
    DegenerateSample,
    #[error("need at least {needed} replications, got {got}")]
    InsufficientReplications { needed: usize, got: usize },

    #[error("normalization {requested} conflicts with the {regime} regime, which needs {required}")]
    NormalizationMismatch { requested: String, required: String, regime: String },

    // plumbing
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by how the tool was invoked rather than by
    /// numerics or preconditions of the data.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Config(_) | Error::UnknownFunction(_) | Error::InvalidArgument(_) => true,
            Error::Replication { source, .. } => source.is_usage(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
