//! Profile generators: the five criterion templates and their set algebra.
//!
//! A generator describes one diagnostic criterion compactly. Evaluating it
//! yields every symptom combination that satisfies the criterion.

pub mod algebra;
mod eval;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symptom::SymptomSet;

pub use eval::{
    count_at_least, count_generator, eval_generator, eval_generator_with, necessary_symptoms,
    CompiledGenerator, MAX_GENERATOR_SYMBOLS,
};

/// The template a generator follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorKind {
    G0,
    G1,
    G2,
    G3,
    G4,
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GeneratorKind::G0 => "G0",
            GeneratorKind::G1 => "G1",
            GeneratorKind::G2 => "G2",
            GeneratorKind::G3 => "G3",
            GeneratorKind::G4 => "G4",
        };
        f.write_str(s)
    }
}

/// Per-list and total minimum counts of touched sets for a G4 generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Requirement {
    pub first: usize,
    pub second: usize,
    pub total: usize,
}

impl Requirement {
    pub fn new(first: usize, second: usize, total: usize) -> Self {
        Requirement {
            first,
            second,
            total,
        }
    }
}

/// A criterion generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Generator {
    /// G0 `[S]`: exactly the set `S`.
    Fixed(SymptomSet),
    /// G1 `[S, k]`: every subset of `S` with at least `k` symptoms.
    AtLeast { set: SymptomSet, k: usize },
    /// G2 `[S1, .., Sm, k]`: unions of nonempty subsets drawn from at least
    /// `k` distinct sets.
    SetCount { sets: Vec<SymptomSet>, k: usize },
    /// G3 `[L1, L2]`: one set from each list, unioned. An empty set in the
    /// second list lets a first-list set stand alone.
    Pairing {
        first: Vec<SymptomSet>,
        second: Vec<SymptomSet>,
    },
    /// G4 `[L1, L2, (r, s, t)]`: like G2 over both lists, touching at least
    /// `r` sets of the first list, `s` of the second and `t` in total.
    SplitSetCount {
        first: Vec<SymptomSet>,
        second: Vec<SymptomSet>,
        req: Requirement,
    },
}

/// Non-fatal findings about a generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorWarning {
    /// All thresholds are zero, so the empty profile satisfies the criterion.
    AdmitsEmptyProfile(GeneratorKind),
}

impl fmt::Display for GeneratorWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorWarning::AdmitsEmptyProfile(kind) => write!(
                f,
                "{kind} threshold of zero admits the empty profile; likely a transcription error"
            ),
        }
    }
}

impl Generator {
    pub fn kind(&self) -> GeneratorKind {
        match self {
            Generator::Fixed(_) => GeneratorKind::G0,
            Generator::AtLeast { .. } => GeneratorKind::G1,
            Generator::SetCount { .. } => GeneratorKind::G2,
            Generator::Pairing { .. } => GeneratorKind::G3,
            Generator::SplitSetCount { .. } => GeneratorKind::G4,
        }
    }

    /// Checks the template constraints and returns any warnings.
    pub fn validate(&self) -> Result<Vec<GeneratorWarning>> {
        let kind = self.kind();
        let invalid = |constraint: &str| Error::InvalidGenerator {
            kind,
            constraint: constraint.to_string(),
        };
        let mut warnings = Vec::new();
        match self {
            Generator::Fixed(set) => {
                if set.is_empty() {
                    return Err(invalid("the set must not be empty"));
                }
            }
            Generator::AtLeast { set, k } => {
                if set.is_empty() {
                    return Err(invalid("the set must not be empty"));
                }
                if *k > set.len() {
                    return Err(invalid(&format!(
                        "k ≤ |S| violated: k = {k}, |S| = {}",
                        set.len()
                    )));
                }
                if *k == 0 {
                    warnings.push(GeneratorWarning::AdmitsEmptyProfile(kind));
                }
            }
            Generator::SetCount { sets, k } => {
                if sets.is_empty() {
                    return Err(invalid("at least one set is required"));
                }
                check_sets(sets, "", &invalid)?;
                if *k > sets.len() {
                    return Err(invalid(&format!(
                        "k ≤ m violated: k = {k}, m = {}",
                        sets.len()
                    )));
                }
                if *k == 0 {
                    warnings.push(GeneratorWarning::AdmitsEmptyProfile(kind));
                }
            }
            Generator::Pairing { first, second } => {
                if first.is_empty() || second.is_empty() {
                    return Err(invalid("both lists must be nonempty"));
                }
                check_sets(first, "first list ", &invalid)?;
                check_distinct(second, "second list ", &invalid)?;
            }
            Generator::SplitSetCount { first, second, req } => {
                if first.is_empty() && second.is_empty() {
                    return Err(invalid("at least one set is required"));
                }
                check_sets(first, "first list ", &invalid)?;
                check_sets(second, "second list ", &invalid)?;
                if first.iter().any(|s| second.contains(s)) {
                    return Err(invalid("a set may not appear in both lists"));
                }
                let (n1, n2) = (first.len(), second.len());
                if req.first > n1 {
                    return Err(invalid(&format!(
                        "r ≤ n1 violated: r = {}, n1 = {n1}",
                        req.first
                    )));
                }
                if req.second > n2 {
                    return Err(invalid(&format!(
                        "s ≤ n2 violated: s = {}, n2 = {n2}",
                        req.second
                    )));
                }
                if req.total > n1 + n2 {
                    return Err(invalid(&format!(
                        "t ≤ n1 + n2 violated: t = {}, n1 + n2 = {}",
                        req.total,
                        n1 + n2
                    )));
                }
                if req.first == 0 && req.second == 0 && req.total == 0 {
                    warnings.push(GeneratorWarning::AdmitsEmptyProfile(kind));
                }
            }
        }
        Ok(warnings)
    }

    /// Every symptom mentioned anywhere in the generator, in written order.
    pub fn domain(&self) -> SymptomSet {
        let mut out = SymptomSet::new();
        for set in self.sets() {
            out.extend(set.iter().cloned());
        }
        out
    }

    /// All literal sets of the generator in written order.
    pub fn sets(&self) -> Box<dyn Iterator<Item = &SymptomSet> + '_> {
        match self {
            Generator::Fixed(set) | Generator::AtLeast { set, .. } => {
                Box::new(std::iter::once(set))
            }
            Generator::SetCount { sets, .. } => Box::new(sets.iter()),
            Generator::Pairing { first, second } | Generator::SplitSetCount { first, second, .. } => {
                Box::new(first.iter().chain(second.iter()))
            }
        }
    }

    /// Rewrites G0 `[S]` as the equivalent G1 `[S, |S|]`; other variants are unchanged.
    pub fn canonicalized(&self) -> Generator {
        match self {
            Generator::Fixed(set) => Generator::AtLeast {
                set: set.clone(),
                k: set.len(),
            },
            other => other.clone(),
        }
    }

    /// Writes the bracket notation, with set elements either as written or sorted.
    pub fn write_notation(&self, out: &mut impl fmt::Write, sorted: bool) -> fmt::Result {
        let set = |out: &mut dyn fmt::Write, s: &SymptomSet| -> fmt::Result {
            out.write_char('{')?;
            let names: Vec<&str> = if sorted {
                s.sorted().iter().map(|x| x.as_str()).collect()
            } else {
                s.iter().map(|x| x.as_str()).collect()
            };
            out.write_str(&names.join(", "))?;
            out.write_char('}')
        };
        let list = |out: &mut dyn fmt::Write, l: &[SymptomSet]| -> fmt::Result {
            out.write_char('[')?;
            for (i, s) in l.iter().enumerate() {
                if i > 0 {
                    out.write_str(", ")?;
                }
                set(out, s)?;
            }
            out.write_char(']')
        };
        out.write_char('[')?;
        match self {
            Generator::Fixed(s) => set(out, s)?,
            Generator::AtLeast { set: s, k } => {
                set(out, s)?;
                write!(out, ", {k}")?;
            }
            Generator::SetCount { sets, k } => {
                for s in sets {
                    set(out, s)?;
                    out.write_str(", ")?;
                }
                write!(out, "{k}")?;
            }
            Generator::Pairing { first, second } => {
                list(out, first)?;
                out.write_str(", ")?;
                list(out, second)?;
            }
            Generator::SplitSetCount { first, second, req } => {
                list(out, first)?;
                out.write_str(", ")?;
                list(out, second)?;
                write!(out, ", ({}, {}, {})", req.first, req.second, req.total)?;
            }
        }
        out.write_char(']')
    }

    /// The bracket notation with sorted set elements.
    pub fn to_canonical_string(&self) -> String {
        let mut s = String::new();
        self.write_notation(&mut s, true).expect("writing to a String");
        s
    }
}

fn check_sets(
    sets: &[SymptomSet],
    which: &str,
    invalid: &dyn Fn(&str) -> Error,
) -> Result<()> {
    if sets.iter().any(SymptomSet::is_empty) {
        return Err(invalid(&format!("{which}sets must be nonempty")));
    }
    check_distinct(sets, which, invalid)
}

fn check_distinct(
    sets: &[SymptomSet],
    which: &str,
    invalid: &dyn Fn(&str) -> Error,
) -> Result<()> {
    for (i, a) in sets.iter().enumerate() {
        if sets[..i].contains(a) {
            return Err(invalid(&format!("{which}contains the set {a} twice")));
        }
    }
    Ok(())
}

/// Bracket notation with set elements in written order.
impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_notation(f, false)
    }
}
