//! Reading and writing disorder specifications.
//!
//! Two formats are supported:
//!
//! * the bracket notation (`.gen` files), e.g. `[{a, b, c}, 2]` for a G1
//!   criterion, with `#` comments and optional `#Label` tags;
//! * a canonical TOML file with an explicit `gen` tag per criterion.

mod canonical;
mod dsl;

use std::fmt;

pub use canonical::{parse_canonical, to_canonical};
pub use dsl::{parse_dsl, parse_generator_dsl, to_dsl};

use crate::generator::Generator;
use crate::spec::{Criterion, DisorderSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// 1-based; 0 when the finding has no position.
    pub line: usize,
    pub col: usize,
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        if self.line > 0 {
            write!(f, "{}:{}: ", self.line, self.col)?;
        }
        write!(f, "{sev}[{}]: {}", self.code, self.message)
    }
}

/// Errors and warnings found while reading a specification.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseDiagnostics {
    pub items: Vec<Diagnostic>,
}

impl ParseDiagnostics {
    pub fn error(&mut self, pos: (usize, usize), code: &'static str, message: impl Into<String>) {
        self.push(Severity::Error, pos, code, message);
    }

    pub fn warning(&mut self, pos: (usize, usize), code: &'static str, message: impl Into<String>) {
        self.push(Severity::Warning, pos, code, message);
    }

    fn push(&mut self, severity: Severity, pos: (usize, usize), code: &'static str, message: impl Into<String>) {
        self.items.push(Diagnostic {
            severity,
            line: pos.0,
            col: pos.1,
            code,
            message: message.into(),
        });
    }

    pub fn has_errors(&self) -> bool {
        self.items.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.items.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.items.iter().filter(|d| d.severity == Severity::Warning)
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl std::error::Error for ParseDiagnostics {}

impl fmt::Display for ParseDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.items {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

pub type ParseResult<T> = Result<(T, ParseDiagnostics), ParseDiagnostics>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Bracket notation.
    Dsl,
    /// TOML with explicit generator tags.
    Canonical,
}

impl Format {
    /// `.toml` is canonical; anything else is read as bracket notation.
    pub fn from_path(path: &std::path::Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Format::Canonical,
            _ => Format::Dsl,
        }
    }
}

/// Parses `text` in `format`. `fallback_name` is used when the text names no disorder.
pub fn parse(text: &str, format: Format, fallback_name: &str) -> ParseResult<DisorderSpec> {
    match format {
        Format::Dsl => dsl::parse_dsl_named(text, fallback_name),
        Format::Canonical => parse_canonical(text),
    }
}

/// Writes `d` with set elements sorted; list order and criterion order are kept.
pub fn serialize(d: &DisorderSpec, format: Format) -> String {
    match format {
        Format::Dsl => to_dsl(d),
        Format::Canonical => to_canonical(d),
    }
}

/// Validates parsed criteria into a spec, reporting each problem at its criterion.
fn build_spec(
    name: String,
    criteria: Vec<(Criterion, (usize, usize))>,
    diags: &mut ParseDiagnostics,
) -> Option<DisorderSpec> {
    if criteria.is_empty() {
        diags.error((0, 0), "empty-spec", format!("disorder {name:?} has no criteria"));
        return None;
    }
    for (i, (c, pos)) in criteria.iter().enumerate() {
        match c.generator.validate() {
            Ok(warnings) => {
                for w in warnings {
                    diags.warning(*pos, "zero-threshold", format!("criterion {}: {w}", describe(i, c)));
                }
            }
            Err(e) => diags.error(*pos, "invalid-generator", format!("criterion {}: {e}", describe(i, c))),
        }
    }
    if diags.has_errors() {
        return None;
    }
    let spec = match DisorderSpec::new(name, criteria.into_iter().map(|(c, _)| c).collect()) {
        Ok(s) => s,
        Err(e) => {
            diags.error((0, 0), "invalid-spec", e.to_string());
            return None;
        }
    };
    if !spec.disjoint_criteria() {
        let shared: Vec<String> = spec.overlapping_symptoms().iter().map(|s| s.to_string()).collect();
        diags.warning(
            (0, 0),
            "overlapping-criteria",
            format!(
                "criteria share symptoms ({}); profiles are deduplicated and counts need enumeration",
                shared.join(", ")
            ),
        );
    }
    Some(spec)
}

fn describe(i: usize, c: &Criterion) -> String {
    match &c.label {
        Some(l) => format!("{} ({l})", i + 1),
        None => format!("{}", i + 1),
    }
}

/// One generator, validated, as a one-criterion result.
fn build_generator(g: Generator, pos: (usize, usize), diags: &mut ParseDiagnostics) -> Option<Generator> {
    match g.validate() {
        Ok(warnings) => {
            for w in warnings {
                diags.warning(pos, "zero-threshold", w.to_string());
            }
            Some(g)
        }
        Err(e) => {
            diags.error(pos, "invalid-generator", e.to_string());
            None
        }
    }
}
