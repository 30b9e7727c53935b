use std::io;

use thiserror::Error;

/// Errors produced while loading data or running probes.
///
/// Parse errors carry the 1-based line number of the offending input line.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: expected {expected} fields, found {found}")]
    MalformedLine {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: cannot parse `{token}` as a number")]
    InvalidNumber { line: usize, token: String },

    #[error("line {line}: non-finite value")]
    NonFinite { line: usize },

    #[error("line {line}: rating {value} outside [0, 1]")]
    RatingOutOfRange { line: usize, value: f64 },

    #[error("line {line}: duplicate word `{word}`")]
    DuplicateWord { line: usize, word: String },

    #[error("line {line}: expected {expected} vector components, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: {msg}")]
    BadLine { line: usize, msg: String },

    #[error("{0}")]
    Empty(&'static str),

    #[error("word `{0}` has a zero vector (no direction)")]
    ZeroVector(String),

    #[error("embedding tables and lexicon share no words")]
    EmptyIntersection,

    #[error("missing words in {space}: {}", words.join(", "))]
    MissingWords { space: String, words: Vec<String> },

    #[error("data has zero total variance")]
    ZeroVariance,

    #[error("input sequence is constant; correlation is undefined")]
    ConstantInput,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("labels contain a single class")]
    SingleClass,

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
