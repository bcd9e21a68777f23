use thiserror::Error;

use crate::multiset::Multiset;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("invalid channel name `{0}`")]
    InvalidName(String),
    #[error("precondition violated: read set {read} is not included in {state}")]
    PreconditionViolated { read: Multiset, state: Multiset },
    #[error("expression is not in normal form: {0}")]
    NotNormalForm(String),
    #[error("choice needs at least one branch")]
    EmptyChoice,
    #[error("join pattern must be non-empty")]
    EmptyPattern,
    #[error("fresh name `{0}` already occurs in a continuation")]
    FreshNameClash(String),
    #[error("name `{0}` is reserved for observers")]
    ReservedName(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("resource exhausted: more than {limit} {what}")]
    ResourceExhausted { what: &'static str, limit: usize },
    #[error(transparent)]
    Term(#[from] TermError),
}
