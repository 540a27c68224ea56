//! Symptom profile generators for diagnostic criteria.
//!
//! A disorder is a list of criteria, each described by a compact generator.
//! This crate evaluates generators to symptom combinations, enumerates whole
//! disorders as binary profile matrices, compares disorders with the maximum
//! pairwise cosine similarity (MPCS) and reduces the MPCS_max search to a
//! handful of comparisons with conditional generators.

pub mod error;
pub mod generator;
pub mod limits;
pub mod oracle;
pub mod profile;
pub mod reducer;
pub mod similarity;
pub mod spec;
pub mod spec_io;
pub mod symptom;

pub use error::{Error, Result};
pub use generator::{Generator, GeneratorKind, Requirement};
pub use limits::Limits;
pub use spec::{Criterion, DisorderSpec};
pub use symptom::{Symptom, SymptomSet};
