//! Text formats: `.bell` functional files and correlation-matrix CSV.
//!
//! A `.bell` file is line oriented, with `#` starting a comment:
//!
//! ```text
//! scenario A:3,3 B:3,3
//! const -3
//! +1 PA(0|0)
//! -1/2 PB(1|0)
//! +1 P(0 0|0 1)
//! ```
//!
//! Coefficients are decimals or exact rationals `p/q`. Repeated terms add up.

mod correlation;
mod functional;
mod number;

pub use correlation::{parse_correlation_matrix, serialize_correlation_matrix};
pub use functional::{
    parse_document, parse_functional, serialize_functional, FunctionalDocument, Term, TermKind,
};
pub use number::{format_real, parse_real};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BellfmtError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: term `{term}` is outside the declared scenario ({detail})")]
    IndexOutOfRange {
        line: usize,
        term: String,
        detail: String,
    },
    #[error("no `scenario` line before the first term")]
    MissingScenario,
    #[error("line {line}: expected {expected} values, found {found}")]
    RaggedRows {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, field {field}: `{text}` is not a finite number")]
    NonNumeric {
        line: usize,
        field: usize,
        text: String,
    },
    #[error("matrix has {rows} rows of {cols} values; it must be square")]
    NotSquare { rows: usize, cols: usize },
    #[error("empty correlation matrix")]
    Empty,
}
