use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors are split into input problems and broken invariants. The CLI maps
/// the first group to exit code 1 and the second to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("row {row} is longer than the row above it ({len} > {prev})")]
    RowLengthIncrease { row: usize, len: usize, prev: usize },
    #[error("empty rows are not allowed (row {row})")]
    EmptyRow { row: usize },
    #[error("invalid pivot set: {0}")]
    Pivots(String),
    #[error("Le-rule violated at {0} box(es)")]
    LeRule(usize),
    #[error("phases: {0}")]
    Phases(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("tableau is not Schubert-positive")]
    NotSchubert,
    #[error("size guard: {whites} white vertices exceed the limit {limit}; pass force to override")]
    SizeGuard { whites: usize, limit: usize },
    #[error("non-real root of the Sato polynomial: {re} + {im}i")]
    NonRealRoot { re: f64, im: f64 },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// True for failures that indicate a bug or a broken structural invariant
    /// rather than bad input.
    pub fn is_invariant(&self) -> bool {
        matches!(self, Error::Invariant(_) | Error::NonRealRoot { .. })
    }
}
