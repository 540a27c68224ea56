use thiserror::Error;

use crate::generator::GeneratorKind;

/// Errors raised by generator evaluation, enumeration, similarity and reduction.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid symptom name {0:?}: only ASCII letters, digits and '_' are allowed")]
    InvalidSymptom(String),

    #[error("invalid {kind} generator: {constraint}")]
    InvalidGenerator {
        kind: GeneratorKind,
        constraint: String,
    },

    #[error("disorder {0:?} has no criteria")]
    EmptySpec(String),

    #[error("{what}: {size} exceeds the cap of {cap}")]
    CapExceeded {
        what: String,
        size: String,
        cap: String,
    },

    #[error("deduplicating overlapping criteria needs more than {cap} rows")]
    DedupCapExceeded { cap: usize },

    #[error(
        "criteria of {disorder:?} share symptoms ({}); the profile count is not a plain product",
        .shared.join(", ")
    )]
    OverlappingCriteria {
        disorder: String,
        shared: Vec<String>,
    },

    #[error("profile matrix is empty")]
    EmptyMatrix,

    #[error("profiles belong to different symbol tables (width {left} vs {right})")]
    TableMismatch { left: usize, right: usize },

    #[error("symptom {0:?} is not in the symbol table")]
    UnknownSymptom(String),

    #[error("cannot force symptoms outside the generator domain: {}", .missing.join(", "))]
    Unsatisfiable { missing: Vec<String> },

    #[error("G3 generators are not reducible; they are passed through unchanged")]
    G3NotReducible,

    #[error("reduced {0:?} admits the empty profile and cannot be written as generators")]
    AdmitsEmptyProfile(String),

    #[error("oracle input too large: {size} exceeds {cap}")]
    OracleTooLarge { size: String, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
