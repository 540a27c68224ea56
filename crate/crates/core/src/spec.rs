//! Disorders as ordered lists of criterion generators.

use crate::error::{Error, Result};
use crate::generator::{Generator, GeneratorWarning};
use crate::symptom::{Symptom, SymptomSet};

/// One diagnostic criterion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Criterion {
    pub label: Option<String>,
    pub generator: Generator,
}

impl Criterion {
    pub fn new(generator: Generator) -> Self {
        Criterion {
            label: None,
            generator,
        }
    }

    pub fn labeled(label: impl Into<String>, generator: Generator) -> Self {
        Criterion {
            label: Some(label.into()),
            generator,
        }
    }
}

/// A named disorder: its profiles are the union product of its criteria.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisorderSpec {
    name: String,
    criteria: Vec<Criterion>,
    disjoint_criteria: bool,
}

impl DisorderSpec {
    /// Validates every generator and records whether criterion domains are pairwise disjoint.
    pub fn new(name: impl Into<String>, criteria: Vec<Criterion>) -> Result<Self> {
        let name = name.into();
        if criteria.is_empty() {
            return Err(Error::EmptySpec(name));
        }
        for c in &criteria {
            c.generator.validate()?;
        }
        let disjoint_criteria = shared_symptoms(&criteria).is_empty();
        Ok(DisorderSpec {
            name,
            criteria,
            disjoint_criteria,
        })
    }

    /// Convenience constructor for unlabeled criteria.
    pub fn from_generators(name: impl Into<String>, generators: Vec<Generator>) -> Result<Self> {
        Self::new(name, generators.into_iter().map(Criterion::new).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn criteria(&self) -> &[Criterion] {
        &self.criteria
    }

    pub fn generators(&self) -> impl Iterator<Item = &Generator> {
        self.criteria.iter().map(|c| &c.generator)
    }

    pub fn disjoint_criteria(&self) -> bool {
        self.disjoint_criteria
    }

    /// Symptoms that occur in more than one criterion.
    pub fn overlapping_symptoms(&self) -> Vec<Symptom> {
        shared_symptoms(&self.criteria)
    }

    /// Every symptom of the disorder in first-seen written order.
    pub fn domain(&self) -> SymptomSet {
        let mut out = SymptomSet::new();
        for g in self.generators() {
            out.extend(g.domain().iter().cloned());
        }
        out
    }

    /// Warnings for every criterion, tagged with its position.
    pub fn warnings(&self) -> Vec<(usize, GeneratorWarning)> {
        self.criteria
            .iter()
            .enumerate()
            .flat_map(|(i, c)| {
                c.generator
                    .validate()
                    .unwrap_or_default()
                    .into_iter()
                    .map(move |w| (i, w))
            })
            .collect()
    }

    /// The same disorder with every G0 rewritten as G1 `[S, |S|]`.
    pub fn canonicalized(&self) -> DisorderSpec {
        DisorderSpec {
            name: self.name.clone(),
            criteria: self
                .criteria
                .iter()
                .map(|c| Criterion {
                    label: c.label.clone(),
                    generator: c.generator.canonicalized(),
                })
                .collect(),
            disjoint_criteria: self.disjoint_criteria,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

fn shared_symptoms(criteria: &[Criterion]) -> Vec<Symptom> {
    let mut seen = SymptomSet::new();
    let mut shared = SymptomSet::new();
    for c in criteria {
        for s in c.generator.domain().iter() {
            if !seen.insert(s.clone()) {
                shared.insert(s.clone());
            }
        }
    }
    shared.sorted().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> SymptomSet {
        SymptomSet::from_names(names).unwrap()
    }

    #[test]
    fn requires_a_criterion() {
        assert!(matches!(
            DisorderSpec::new("x", vec![]),
            Err(Error::EmptySpec(_))
        ));
    }

    #[test]
    fn disjointness_flag() {
        let d = DisorderSpec::from_generators(
            "d",
            vec![
                Generator::Fixed(set(&["a"])),
                Generator::AtLeast {
                    set: set(&["b", "c"]),
                    k: 1,
                },
            ],
        )
        .unwrap();
        assert!(d.disjoint_criteria());
        let o = DisorderSpec::from_generators(
            "o",
            vec![
                Generator::Fixed(set(&["a"])),
                Generator::AtLeast {
                    set: set(&["a", "c"]),
                    k: 1,
                },
            ],
        )
        .unwrap();
        assert!(!o.disjoint_criteria());
        assert_eq!(o.overlapping_symptoms(), vec![Symptom::new("a").unwrap()]);
    }

    #[test]
    fn invalid_generator_blocks_construction() {
        let bad = Generator::AtLeast {
            set: set(&["a"]),
            k: 2,
        };
        assert!(DisorderSpec::from_generators("x", vec![bad]).is_err());
    }
}
