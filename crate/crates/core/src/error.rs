//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Formats a 0-based vertex set as 1-based for messages, matching the
/// numbering used by all file formats.
fn fmt_vertices(vs: &[usize]) -> String {
    let one_based: Vec<String> = vs.iter().map(|v| (v + 1).to_string()).collect();
    format!("{{{}}}", one_based.join(","))
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The graph is not chordal; `witness` is a chordless cycle of length >= 4
    /// (0-based vertices, in cycle order).
    #[error("graph is not chordal; chordless cycle {}", fmt_vertices(.witness))]
    NotChordal { witness: Vec<usize> },

    /// A clique or separator submatrix could not be inverted.
    #[error("singular block on vertices {}", fmt_vertices(.vertices))]
    SingularBlock { vertices: Vec<usize> },

    /// A clique or separator submatrix is not positive definite where the
    /// operation requires it.
    #[error("block on vertices {} is not positive definite", fmt_vertices(.vertices))]
    NotPositiveDefinite { vertices: Vec<usize> },

    /// Two clique blocks of a partially specified matrix disagree on a shared
    /// entry (0-based position).
    #[error("inconsistent overlap at entry ({}, {}): {left} vs {right}", .row + 1, .col + 1)]
    InconsistentOverlap {
        row: usize,
        col: usize,
        left: f64,
        right: f64,
    },

    #[error("matrix is not positive semidefinite: {0}")]
    NotPsd(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The estimator hit its outer-iteration limit; callers receive the
    /// partial result separately where applicable.
    #[error("did not converge within {outer} outer iterations (|C| = {constraint_norm:.3e})")]
    NotConverged { outer: usize, constraint_norm: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by unreadable or syntactically malformed input
    /// files rather than by the mathematics of the problem.
    pub fn is_io_or_parse(&self) -> bool {
        matches!(
            self,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Parse(_)
        )
    }

    /// True for numerical failures inside block factorizations.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularBlock { .. } | Error::NotPositiveDefinite { .. }
        )
    }
}
