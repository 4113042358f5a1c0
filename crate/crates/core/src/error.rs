use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("linear program is {0}")]
    LpStatus(&'static str),

    #[error("{0}")]
    Parse(String),

    #[error("newick syntax error at byte {position}: {message}")]
    Newick { position: usize, message: String },

    #[error("duplicate taxon `{0}`")]
    DuplicateTaxon(String),

    #[error("unknown taxon `{0}`")]
    UnknownTaxon(String),

    #[error("tree is not equidistant (root-to-leaf lengths range over [{min}, {max}])")]
    NotEquidistant { min: f64, max: f64 },

    #[error("vector is not an ultrametric: {0}")]
    NotUltrametric(String),

    #[error("vector length {0} is not of the form N(N-1)/2")]
    NotPairCount(usize),

    #[error("star tree has no non-root internal node")]
    StarTree,

    #[error("{0} sites is too many for exhaustive search (limit {1})")]
    TooManySites(usize, usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
