use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid sequence spec: {0}")]
    InvalidSpec(String),

    #[error("sequence is not strictly increasing and positive at index {index}")]
    NotMonotone { index: usize },

    #[error("index {index} is beyond the table of length {len} and no generator is given")]
    OutOfTable { index: usize, len: usize },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("budget exhausted before the bound was established (verified prefix up to {verified})")]
    BudgetExhausted { verified: usize },

    #[error("equation f(n) = {target} holds on a cofinal window; not finitely solvable")]
    NotFinitelySolvable { target: String },

    #[error("a trivial operator (eventually zero) is present at position {position}")]
    TrivialOperatorPresent { position: usize },

    #[error("no generator for table sequence; scanned prefix of length {scanned}")]
    BoundedProfile { scanned: usize },

    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u64),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("sort error: {0}")]
    Sort(String),

    #[error("formula outside the decidable fragment: {0}")]
    OutOfFragment(String),

    #[error("parts do not partition the set: {0}")]
    NotAPartition(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
