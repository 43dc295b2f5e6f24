use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("matrix has rank {rank}, which exceeds the requested factorization size {max}")]
    RankExcess { rank: usize, max: usize },

    #[error("index error: {0}")]
    Index(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("ambiguous root selection, simple real roots {roots:?}")]
    AmbiguousRoot { roots: Vec<f64> },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
