mod common;

use std::collections::BTreeSet;

use common::{generator, pool, rng};
use num_bigint::BigUint;
use profgen_core::generator::algebra::union_product;
use profgen_core::generator::{
    count_at_least, count_generator, eval_generator, necessary_symptoms, Generator,
};
use profgen_core::oracle::naive_eval;
use profgen_core::reducer::force_symptoms;
use profgen_core::{Error, Limits, SymptomSet};
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn fast_evaluation_matches_reference() {
    let limits = Limits::default();
    let mut r = rng(1);
    for _ in 0..2_000 {
        let n = r.gen_range(1..=12);
        let g = generator(&mut r, &pool("s", n), &[0, 1, 2, 3, 4]);
        let fast = eval_generator(&g).unwrap();
        let naive = naive_eval(&g, &limits).unwrap();
        assert_eq!(fast, naive, "{g}");
        assert_eq!(count_generator(&g, &limits).unwrap(), BigUint::from(fast.len()), "{g}");
    }
}

#[test]
fn necessary_symptoms_are_the_common_core() {
    let mut r = rng(2);
    for _ in 0..2_000 {
        let g = generator(&mut r, &pool("s", 8), &[0, 1, 2, 3, 4]);
        let family = eval_generator(&g).unwrap();
        let mut iter = family.iter();
        let first = iter.next().unwrap().clone();
        let common = iter.fold(first, |acc, s| acc.intersection(s));
        assert_eq!(necessary_symptoms(&g).unwrap(), common, "{g}");
    }
}

#[test]
fn at_least_counts_match_enumeration() {
    for n in 0..=16u64 {
        let mut by_size = vec![0u64; n as usize + 1];
        for mask in 0u32..(1 << n) {
            by_size[mask.count_ones() as usize] += 1;
        }
        for k in 0..=n {
            let expected: u64 = by_size[k as usize..].iter().sum();
            assert_eq!(count_at_least(n, k), BigUint::from(expected), "n={n} k={k}");
        }
    }
}

#[test]
fn forcing_keeps_exactly_the_supersets() {
    let mut r = rng(3);
    let mut satisfiable = 0;
    for _ in 0..2_000 {
        let g = generator(&mut r, &pool("s", 9), &[0, 1, 2, 4]);
        let domain: Vec<_> = g.domain().iter().cloned().collect();
        let take = r.gen_range(0..=domain.len());
        let mut f: SymptomSet = domain.choose_multiple(&mut r, take).cloned().collect();
        if r.gen_bool(0.1) {
            f.insert(pool("s", 9).choose(&mut r).unwrap().clone());
        }
        let expected: BTreeSet<SymptomSet> = eval_generator(&g)
            .unwrap()
            .into_iter()
            .filter(|p| f.is_subset(p))
            .collect();
        match force_symptoms(&g, &f) {
            Ok(parts) => {
                let families: Vec<_> = parts.iter().map(|p| eval_generator(p).unwrap()).collect();
                assert_eq!(union_product(&families), expected, "{g} forcing {f}");
                satisfiable += 1;
            }
            Err(Error::Unsatisfiable { .. }) => assert!(expected.is_empty(), "{g} forcing {f}"),
            Err(e) => panic!("{g} forcing {f}: {e}"),
        }
    }
    assert!(satisfiable > 1_000);
}

#[test]
fn pairing_is_not_forced() {
    let g = Generator::Pairing {
        first: vec![SymptomSet::from_names(["a"]).unwrap()],
        second: vec![SymptomSet::new()],
    };
    let f = SymptomSet::from_names(["a"]).unwrap();
    assert!(matches!(force_symptoms(&g, &f), Err(Error::G3NotReducible)));
}
