use thiserror::Error;

use crate::model::RefactoringKind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("malformed signature `{0}`: {1}")]
    Signature(String, &'static str),
    #[error("malformed field name `{0}`")]
    FieldName(String),
    #[error("class name must not be empty")]
    EmptyClass,
    #[error("field name must not be empty")]
    EmptyField,
    #[error("unknown kind `{0}`")]
    UnknownKind(String),
    #[error("commit `{0}` is not a hex object id")]
    InvalidCommit(String),
    #[error("{kind} record has incompatible element `{element}`")]
    MemberMismatch { kind: RefactoringKind, element: String },
    #[error("{kind} requires source and target in {} classes", if *.expected_same { "the same" } else { "different" })]
    ClassMismatch { kind: RefactoringKind, expected_same: bool },
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unsupported refactoring operation `{0}`")]
    Unsupported(String),
    #[error("cannot parse `{text}`: {reason}")]
    Parse { text: String, reason: String },
    #[error("line {line}: {message}")]
    Line { line: u64, message: String },
    #[error("duplicate record id `{id}` on line {line}")]
    DuplicateId { id: String, line: u64 },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid timestamp `{0}`")]
    Timestamp(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("read failure: {0}")]
    Io(#[from] std::io::Error),
}

impl IngestError {
    pub fn is_io(&self) -> bool {
        matches!(self, IngestError::Io(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("composite references unknown record id `{0}`")]
    UnknownRecord(String),
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("malformed report: {0}")]
    Malformed(String),
    #[error("unsupported report schema_version `{found}` (expected `{expected}`)")]
    SchemaVersion { found: String, expected: &'static str },
}
