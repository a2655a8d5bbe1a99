use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// A single violated instance invariant, located as precisely as possible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub row: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl Violation {
    pub(crate) fn global(message: impl Into<String>) -> Self {
        Self { row: None, column: None, message: message.into() }
    }

    pub(crate) fn at_row(row: usize, message: impl Into<String>) -> Self {
        Self { row: Some(row), column: None, message: message.into() }
    }

    pub(crate) fn at_cell(row: usize, column: usize, message: impl Into<String>) -> Self {
        Self { row: Some(row), column: Some(column), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Every violation found while validating a raw instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violations(pub Vec<Violation>);

impl Violations {
    pub fn messages(&self) -> Vec<String> {
        self.0.iter().map(|v| v.message.clone()).collect()
    }
}

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(Violations),
    #[error("empty collection")]
    EmptyCollection,
    #[error("photo index {index} out of range for {num_photos} photos")]
    PhotoOutOfRange { index: usize, num_photos: usize },
    #[error("location index {index} out of range for {num_locations} locations")]
    LocationOutOfRange { index: usize, num_locations: usize },
    #[error("posterior undefined for raw scores")]
    PosteriorUndefined,
    #[error("margin must be finite and non-negative, got {0}")]
    InvalidMargin(f64),
    #[error("invalid problem: {0}")]
    InvalidSpec(String),
    #[error("alternate location must differ from the true location {0}")]
    TrueLocationAsRival(usize),
    #[error("instance too large for exhaustive search: {num_photos} photos (limit {limit})")]
    TooLarge { num_photos: usize, limit: usize },
    #[error("invalid search limits: {0}")]
    InvalidLimits(String),
    #[error("cannot decode solution: {0}")]
    Decode(String),
    #[error("invalid generator parameters: {0}")]
    Generator(String),
    #[error("solver {solver} does not support {problem}")]
    UnsupportedSolver { solver: &'static str, problem: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
