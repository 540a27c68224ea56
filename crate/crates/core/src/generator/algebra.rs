//! Set-algebra primitives on families of symptom sets.
//!
//! * `powerset`: every subset of a set, including the empty set.
//! * `size_filter`: members with at least `m` elements.
//! * `powerset_extended`: per input set, its nonempty subsets.
//! * `union_product`: one member from each family, unioned.
//! * `union_product_extended`: union of the union products of several groups.
//!
//! These operate on explicit families and are meant for small inputs. Whole
//! generators are evaluated through the bitmask engine in `eval`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::symptom::SymptomSet;

/// A duplicate-free family of symptom sets, iterated in graded-lexicographic order.
pub type Family = BTreeSet<SymptomSet>;

pub fn powerset(set: &SymptomSet) -> Result<Family> {
    powerset_with(set, &Limits::default())
}

pub fn powerset_with(set: &SymptomSet, limits: &Limits) -> Result<Family> {
    let n = set.len();
    if n > limits.powerset_symbols {
        return Err(Error::CapExceeded {
            what: "powerset".to_string(),
            size: format!("{n} symptoms"),
            cap: format!("{} symptoms", limits.powerset_symbols),
        });
    }
    let items: Vec<_> = set.iter().cloned().collect();
    Ok((0u64..1 << n)
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, s)| s.clone())
                .collect()
        })
        .collect())
}

pub fn size_filter(family: &Family, min_size: usize) -> Family {
    family
        .iter()
        .filter(|s| s.len() >= min_size)
        .cloned()
        .collect()
}

pub fn powerset_extended(sets: &[SymptomSet]) -> Result<Vec<Family>> {
    sets.iter()
        .map(|s| powerset(s).map(|p| size_filter(&p, 1)))
        .collect()
}

/// The union product. An empty list of families yields `{∅}`.
pub fn union_product(families: &[Family]) -> Family {
    let mut acc: Family = std::iter::once(SymptomSet::new()).collect();
    for family in families {
        acc = acc
            .iter()
            .flat_map(|a| family.iter().map(move |r| a.union(r)))
            .collect();
    }
    acc
}

pub fn union_product_extended(groups: &[Vec<Family>]) -> Family {
    groups.iter().flat_map(|g| union_product(g)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> SymptomSet {
        SymptomSet::from_names(names).unwrap()
    }

    fn fam(sets: &[&[&str]]) -> Family {
        sets.iter().map(|s| set(s)).collect()
    }

    #[test]
    fn powerset_of_three() {
        let p = powerset(&set(&["a", "b", "c"])).unwrap();
        assert_eq!(
            p,
            fam(&[
                &[],
                &["a"],
                &["b"],
                &["c"],
                &["a", "b"],
                &["a", "c"],
                &["b", "c"],
                &["a", "b", "c"]
            ])
        );
    }

    #[test]
    fn powerset_trivial_cases() {
        assert_eq!(powerset(&SymptomSet::new()).unwrap(), fam(&[&[]]));
        assert_eq!(powerset(&set(&["a"])).unwrap(), fam(&[&[], &["a"]]));
    }

    #[test]
    fn powerset_cap() {
        let names: Vec<String> = (0..25).map(|i| format!("s{i}")).collect();
        let big = SymptomSet::from_names(&names).unwrap();
        assert!(matches!(powerset(&big), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn size_filter_examples() {
        let c = fam(&[&["a"], &["a", "b"], &["a", "b", "c"], &["a", "b", "c", "d"]]);
        assert_eq!(
            size_filter(&c, 3),
            fam(&[&["a", "b", "c"], &["a", "b", "c", "d"]])
        );
        assert_eq!(size_filter(&c, 0), c);
        assert!(size_filter(&c, 5).is_empty());
    }

    #[test]
    fn powerset_extended_examples() {
        let out = powerset_extended(&[set(&["a", "b"]), set(&["c", "d"])]).unwrap();
        assert_eq!(
            out,
            vec![
                fam(&[&["a"], &["b"], &["a", "b"]]),
                fam(&[&["c"], &["d"], &["c", "d"]])
            ]
        );
        assert_eq!(powerset_extended(&[set(&["a"])]).unwrap(), vec![fam(&[&["a"]])]);
        // 2^3 - 1 nonempty subsets
        assert_eq!(powerset_extended(&[set(&["a", "b", "c"])]).unwrap()[0].len(), 7);
    }

    #[test]
    fn union_product_examples() {
        let out = union_product(&[fam(&[&["a", "b"], &["c"]]), fam(&[&["d", "e"], &["f"]])]);
        assert_eq!(
            out,
            fam(&[&["a", "b", "d", "e"], &["a", "b", "f"], &["c", "d", "e"], &["c", "f"]])
        );
        let x = fam(&[&["a"], &["b", "c"]]);
        assert_eq!(union_product(std::slice::from_ref(&x)), x);
        assert_eq!(union_product(&[fam(&[&["a"]]), fam(&[&["a"]])]), fam(&[&["a"]]));
    }

    #[test]
    fn union_product_extended_example() {
        let ab_c = fam(&[&["a", "b"], &["c"]]);
        let groups = vec![
            vec![ab_c.clone(), fam(&[&["d"]])],
            vec![ab_c, fam(&[&["e"]])],
        ];
        assert_eq!(
            union_product_extended(&groups),
            fam(&[&["a", "b", "d"], &["c", "d"], &["a", "b", "e"], &["c", "e"]])
        );
    }

    #[test]
    fn union_product_extended_collapses_collisions() {
        // {a} ∪ {b} and {a, b} ∪ {} give the same union in different groups
        let groups = vec![
            vec![fam(&[&["a"]]), fam(&[&["b"]])],
            vec![fam(&[&["a", "b"]])],
        ];
        let out = union_product_extended(&groups);
        assert_eq!(out, fam(&[&["a", "b"]]));
        // naive oracle: concatenate and dedup by hand
        let mut naive = Vec::new();
        for g in &groups {
            naive.extend(union_product(g));
        }
        naive.sort();
        naive.dedup();
        assert_eq!(out.into_iter().collect::<Vec<_>>(), naive);
    }

    #[test]
    fn union_product_order_insensitive() {
        let a = fam(&[&["a"], &["b"]]);
        let b = fam(&[&["c"], &["a", "d"]]);
        let c = fam(&[&["e"]]);
        assert_eq!(
            union_product(&[a.clone(), b.clone(), c.clone()]),
            union_product(&[c, a, b])
        );
    }
}
