//! Naive reference implementations.
//!
//! Everything here works on plain ordered sets of strings and follows the set
//! definitions literally: no bitsets, no symbol tables, no pruning. It is slow
//! on purpose and exists to cross-check the fast paths.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::limits::Limits;
use crate::similarity::Aggregation;
use crate::spec::DisorderSpec;
use crate::symptom::SymptomSet;

pub type NaiveSet = BTreeSet<String>;
pub type NaiveFamily = BTreeSet<NaiveSet>;
/// A collection of families, the input of `up`.
type Collection = BTreeSet<NaiveFamily>;

fn plain(s: &SymptomSet) -> NaiveSet {
    s.iter().map(|x| x.as_str().to_string()).collect()
}

fn ps(s: &NaiveSet) -> NaiveFamily {
    let mut out: NaiveFamily = BTreeSet::new();
    out.insert(BTreeSet::new());
    for x in s {
        let grown: Vec<NaiveSet> = out
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.insert(x.clone());
                r
            })
            .collect();
        out.extend(grown);
    }
    out
}

fn sf<T: Ord + Clone>(family: &BTreeSet<BTreeSet<T>>, m: usize) -> BTreeSet<BTreeSet<T>> {
    family.iter().filter(|r| r.len() >= m).cloned().collect()
}

fn ps_star(sets: &[NaiveSet]) -> Collection {
    sets.iter().map(|s| sf(&ps(s), 1)).collect()
}

/// Every sub-collection of a collection.
fn ps_collection(c: &Collection) -> BTreeSet<Collection> {
    let mut out: BTreeSet<Collection> = BTreeSet::new();
    out.insert(BTreeSet::new());
    for x in c {
        let grown: Vec<Collection> = out
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.insert(x.clone());
                r
            })
            .collect();
        out.extend(grown);
    }
    out
}

fn up(c: &Collection) -> NaiveFamily {
    let mut acc: NaiveFamily = BTreeSet::new();
    acc.insert(BTreeSet::new());
    for family in c {
        acc = acc
            .iter()
            .flat_map(|a| family.iter().map(move |r| a.union(r).cloned().collect()))
            .collect();
    }
    acc
}

fn up_star(cs: &BTreeSet<Collection>) -> NaiveFamily {
    cs.iter().flat_map(up).collect()
}

fn size_check(g: &Generator, limits: &Limits) -> Result<()> {
    let n = g.domain().len();
    let sets = g.sets().count();
    // the oracle materializes up to 2^n combinations and 2^sets sub-collections
    let bound = 1u128 << n.max(sets).min(127);
    if bound > limits.oracle_results as u128 {
        return Err(Error::OracleTooLarge {
            size: format!("2^{} candidates", n.max(sets)),
            cap: limits.oracle_results,
        });
    }
    Ok(())
}

/// Generator evaluation by direct composition of the set primitives.
pub fn naive_eval(g: &Generator, limits: &Limits) -> Result<BTreeSet<SymptomSet>> {
    g.validate()?;
    size_check(g, limits)?;
    let family = naive_family(g);
    family
        .into_iter()
        .map(|s| SymptomSet::from_names(s.iter()))
        .collect()
}

fn naive_family(g: &Generator) -> NaiveFamily {
    match g {
        Generator::Fixed(s) => BTreeSet::from([plain(s)]),
        Generator::AtLeast { set, k } => sf(&ps(&plain(set)), *k),
        Generator::SetCount { sets, k } => {
            let sets: Vec<NaiveSet> = sets.iter().map(plain).collect();
            up_star(&sf(&ps_collection(&ps_star(&sets)), *k))
        }
        Generator::Pairing { first, second } => {
            let l1: NaiveFamily = first.iter().map(plain).collect();
            let l2: NaiveFamily = second.iter().map(plain).collect();
            up(&BTreeSet::from([l1, l2]))
        }
        Generator::SplitSetCount { first, second, req } => {
            let l1: Vec<NaiveSet> = first.iter().map(plain).collect();
            let l2: Vec<NaiveSet> = second.iter().map(plain).collect();
            let x1 = sf(&ps_collection(&ps_star(&l1)), req.first);
            let x2 = sf(&ps_collection(&ps_star(&l2)), req.second);
            // up over two collections of collections: pairwise unions
            let mut joined: BTreeSet<Collection> = BTreeSet::new();
            for c1 in &x1 {
                for c2 in &x2 {
                    joined.insert(c1.union(c2).cloned().collect());
                }
            }
            up_star(&sf(&joined, req.total))
        }
    }
}

/// Every profile of a disorder: the union product of its criteria, deduplicated.
pub fn naive_profiles(d: &DisorderSpec, limits: &Limits) -> Result<NaiveFamily> {
    let mut acc: NaiveFamily = BTreeSet::from([BTreeSet::new()]);
    for g in d.generators() {
        g.validate()?;
        size_check(g, limits)?;
        let family = naive_family(g);
        let bound = acc.len() as u128 * family.len() as u128;
        if bound > limits.oracle_rows as u128 {
            return Err(Error::OracleTooLarge {
                size: format!("{bound} rows"),
                cap: limits.oracle_rows,
            });
        }
        acc = acc
            .iter()
            .flat_map(|a| family.iter().map(move |r| a.union(r).cloned().collect()))
            .collect();
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveMpcs {
    pub value: f64,
    pub phi_ab: f64,
    pub phi_ba: f64,
    pub comparisons: u64,
    /// First pair, scanning `A` then `B` in sorted order, whose cosine equals `value`.
    pub witness: Option<(NaiveSet, NaiveSet)>,
}

fn naive_cosine(a: &NaiveSet, b: &NaiveSet) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let shared = a.intersection(b).count() as f64;
    shared / ((a.len() * b.len()) as f64).sqrt()
}

/// MPCS by exhaustive double loops in both directions.
pub fn naive_mpcs(
    a: &DisorderSpec,
    b: &DisorderSpec,
    agg: Aggregation,
    limits: &Limits,
) -> Result<NaiveMpcs> {
    let pa = naive_profiles(a, limits)?;
    let pb = naive_profiles(b, limits)?;
    let pairs = pa.len() as u64 * pb.len() as u64;
    if pairs > limits.oracle_pairs {
        return Err(Error::OracleTooLarge {
            size: format!("{pairs} row pairs"),
            cap: limits.oracle_pairs as usize,
        });
    }
    naive_mpcs_rows(&pa, &pb, agg)
}

/// MPCS by exhaustive double loops over explicit rows.
pub fn naive_mpcs_rows(a: &NaiveFamily, b: &NaiveFamily, agg: Aggregation) -> Result<NaiveMpcs> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let mut comparisons = 0u64;
    let mut direction = |x: &NaiveFamily, y: &NaiveFamily| {
        let mut best_rows = Vec::with_capacity(x.len());
        for p in x {
            let mut best = 0.0f64;
            for q in y {
                comparisons += 1;
                best = best.max(naive_cosine(p, q));
            }
            best_rows.push(best);
        }
        match agg {
            Aggregation::Max => best_rows.iter().cloned().fold(0.0, f64::max),
            Aggregation::Mean => best_rows.iter().sum::<f64>() / best_rows.len() as f64,
        }
    };
    let phi_ab = direction(a, b);
    let phi_ba = direction(b, a);
    let value = phi_ab.max(phi_ba);
    let witness = match agg {
        Aggregation::Max => a
            .iter()
            .flat_map(|p| b.iter().map(move |q| (p, q)))
            .find(|(p, q)| naive_cosine(p, q) == value)
            .map(|(p, q)| (p.clone(), q.clone())),
        Aggregation::Mean => None,
    };
    Ok(NaiveMpcs {
        value,
        phi_ab,
        phi_ba,
        comparisons,
        witness,
    })
}

/// Size of the smallest combination of `g` containing `f`.
pub fn min_superset_size(g: &Generator, f: &SymptomSet, limits: &Limits) -> Result<usize> {
    let f = plain(f);
    let missing: Vec<String> = f
        .iter()
        .filter(|x| !plain(&g.domain()).contains(*x))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(Error::Unsatisfiable { missing });
    }
    g.validate()?;
    size_check(g, limits)?;
    naive_family(g)
        .iter()
        .filter(|p| f.is_subset(p))
        .map(BTreeSet::len)
        .min()
        .ok_or(Error::Unsatisfiable { missing: vec![] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{eval_generator, Requirement};

    fn set(names: &[&str]) -> SymptomSet {
        SymptomSet::from_names(names).unwrap()
    }

    #[test]
    fn corpus_counts() {
        let lim = Limits::default();
        let g2 = Generator::SetCount {
            sets: vec![set(&["a", "b"]), set(&["c", "d"]), set(&["e", "f"])],
            k: 2,
        };
        let g4 = Generator::SplitSetCount {
            first: vec![set(&["a", "b"]), set(&["c"])],
            second: vec![set(&["d"]), set(&["e", "f"])],
            req: Requirement::new(1, 0, 3),
        };
        assert_eq!(naive_eval(&g2, &lim).unwrap().len(), 54);
        assert_eq!(naive_eval(&g4, &lim).unwrap().len(), 33);
        for g in [&g2, &g4] {
            let fast: BTreeSet<SymptomSet> = eval_generator(g).unwrap().into_iter().collect();
            assert_eq!(naive_eval(g, &lim).unwrap(), fast);
        }
    }

    #[test]
    fn sentinel_and_identity() {
        let lim = Limits::default();
        let g3 = Generator::Pairing {
            first: vec![set(&["a"]), set(&["b"])],
            second: vec![SymptomSet::new()],
        };
        assert_eq!(
            naive_eval(&g3, &lim).unwrap(),
            BTreeSet::from([set(&["a"]), set(&["b"])])
        );
        let g0 = Generator::Fixed(set(&["x", "y"]));
        assert_eq!(naive_eval(&g0, &lim).unwrap(), BTreeSet::from([set(&["x", "y"])]));
    }

    #[test]
    fn min_superset_examples() {
        let lim = Limits::default();
        let g = Generator::AtLeast {
            set: set(&["a", "b", "c", "d", "e"]),
            k: 3,
        };
        assert_eq!(min_superset_size(&g, &set(&["d", "e"]), &lim).unwrap(), 3);
        let g0 = Generator::Fixed(set(&["a", "b"]));
        assert_eq!(min_superset_size(&g0, &SymptomSet::new(), &lim).unwrap(), 2);
        assert!(matches!(
            min_superset_size(&g0, &set(&["z"]), &lim),
            Err(Error::Unsatisfiable { .. })
        ));
    }

    #[test]
    fn too_large() {
        let names: Vec<String> = (0..24).map(|i| format!("s{i}")).collect();
        let g = Generator::AtLeast {
            set: SymptomSet::from_names(&names).unwrap(),
            k: 1,
        };
        assert!(matches!(
            naive_eval(&g, &Limits::default()),
            Err(Error::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn toy_mpcs_counts_both_directions() {
        let lim = Limits::default();
        let a = DisorderSpec::from_generators(
            "A",
            vec![Generator::AtLeast {
                set: set(&["a", "b", "c", "d", "e"]),
                k: 3,
            }],
        )
        .unwrap();
        let b = DisorderSpec::from_generators(
            "B",
            vec![Generator::AtLeast {
                set: set(&["d", "e", "f", "g", "h"]),
                k: 3,
            }],
        )
        .unwrap();
        let r = naive_mpcs(&a, &b, Aggregation::Max, &lim).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.comparisons, 2 * 256);
    }
}
