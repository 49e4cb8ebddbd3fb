//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("mark grids do not match: {0} vs {1} nodes")]
    GridMismatch(usize, usize),

    #[error("size guard: {what} = {got} exceeds limit {limit}")]
    SizeGuard {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("activity {z} is not below the threshold {threshold}")]
    ActivityDiverged { z: f64, threshold: f64 },

    #[error("potential is not regular: {0}")]
    NotRegular(String),

    #[error("configuration is empty")]
    EmptyConfiguration,

    #[error("configurations are not disjoint")]
    NotDisjoint,

    #[error("non-finite drift at step {step}")]
    NonFiniteDrift { step: usize },

    #[error("config parse error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error("unknown config key: {0}")]
    UnknownKey(String),

    #[error("csv parse error at line {line}: {msg}")]
    CsvParse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
