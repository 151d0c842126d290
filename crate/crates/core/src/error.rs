use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("bit length {0} outside the supported range 0..=64")]
    InvalidLength(usize),

    #[error("bits set above the declared length {0}")]
    StrayBits(usize),

    #[error("linear system has no solution")]
    NoSolution,

    #[error("syndrome is not in the column space of the binning matrix")]
    InvalidSyndrome,

    #[error("unknown code `{0}`")]
    UnknownCode(String),

    #[error("malformed code file, line {line}: {message}")]
    MalformedCodeFile { line: usize, message: String },

    #[error("generator matrix is rank deficient: {rows} rows but rank {rank}")]
    RankDeficient { rows: usize, rank: usize },

    #[error("{what}: enumeration needs 2^{required} steps, budget is 2^{limit}")]
    BudgetExceeded {
        what: &'static str,
        required: usize,
        limit: usize,
    },

    #[error("both log-likelihood weights vanish, the test cannot separate the hypotheses")]
    DegenerateTest,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("out of scope: {0}")]
    ScopeViolation(String),

    #[error("spectrum cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
