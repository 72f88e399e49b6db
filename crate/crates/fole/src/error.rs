//! Crate-wide error type.

use std::fmt;
use thiserror::Error;

/// A location in a workspace source file.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub col_start: usize,
    pub col_end: usize,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, line: usize, col_start: usize, col_end: usize) -> Self {
        SourceSpan {
            file: file.into(),
            line,
            col_start,
            col_end,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col_start)
    }
}

/// One located diagnostic produced by the parser or the workspace checker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: SourceSpan,
    pub message: String,
}

impl Diagnostic {
    pub fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        Diagnostic {
            span,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown entity type `{0}`")]
    UnknownEntity(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("duplicate index name `{0}` in signature")]
    DuplicateIndex(String),
    #[error("duplicate entity type `{0}`")]
    DuplicateEntity(String),
    #[error("signature mismatch in {context}: expected {expected}, found {found}")]
    SignatureMismatch {
        context: String,
        expected: String,
        found: String,
    },
    #[error("invalid signature morphism: {0}")]
    InvalidSignatureMorphism(String),
    #[error("invalid schema morphism: {0}")]
    InvalidSchemaMorphism(String),
    #[error("invalid type domain: {0}")]
    InvalidTypeDomain(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("invalid structure morphism: {0}")]
    InvalidStructureMorphism(String),
    #[error("incompatible type domains: {0}")]
    IncompatibleDomain(String),
    #[error("tuple {tuple} does not match signature {signature}")]
    TupleMismatch { tuple: String, signature: String },
    #[error("model enumeration needs {needed} tuple slots but the budget is {budget}")]
    Budget { needed: usize, budget: usize },
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("{}", render_diagnostics(.0))]
    Diagnostics(Vec<Diagnostic>),
    #[error("csv {file} row {row}: {message}")]
    Csv {
        file: String,
        row: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn render_diagnostics(ds: &[Diagnostic]) -> String {
    ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
