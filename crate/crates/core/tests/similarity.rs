mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::{disorder, pool, rng};
use num_bigint::BigUint;
use profgen_core::oracle::{naive_mpcs, naive_profiles};
use profgen_core::profile::{count_profiles, enumerate_matrix, ProfileSpace, SymbolTable};
use profgen_core::reducer::{mpcs_max_conditional, ConditionalOptions};
use profgen_core::similarity::{mpcs, mpcs_max_streaming, Aggregation, Score};
use profgen_core::{Error, Limits, SymptomSet};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn enumeration_matches_reference_profiles() {
    let limits = Limits::default();
    let mut r = rng(10);
    for i in 0..300 {
        let criteria = r.gen_range(1..=3);
        let d = disorder(&mut r, &format!("D{i}"), &pool("s", 10), criteria, &[0, 1, 2, 3, 4]);
        let table = Arc::new(SymbolTable::intern(&[&d]));
        let m = enumerate_matrix(&d, table, &limits).unwrap();
        let rows: BTreeSet<SymptomSet> = (0..m.len()).map(|i| m.row_set(i)).collect();
        let naive: BTreeSet<SymptomSet> = naive_profiles(&d, &limits)
            .unwrap()
            .into_iter()
            .map(|p| SymptomSet::from_names(p.iter()).unwrap())
            .collect();
        assert_eq!(rows, naive);
        assert_eq!(rows.len(), m.len(), "rows are distinct");
        assert_eq!(count_profiles(&d, &limits).unwrap(), BigUint::from(m.len()));
    }
}

#[test]
fn brute_force_matches_reference_in_both_aggregations() {
    let limits = Limits::default();
    let mut r = rng(11);
    let symbols = pool("s", 9);
    for i in 0..150 {
        let (ca, cb) = (r.gen_range(1..=2), r.gen_range(1..=2));
        let a = disorder(&mut r, &format!("A{i}"), &symbols, ca, &[0, 1, 2, 3, 4]);
        let b = disorder(&mut r, &format!("B{i}"), &symbols, cb, &[0, 1, 2, 3, 4]);
        let table = Arc::new(SymbolTable::intern(&[&a, &b]));
        let ma = enumerate_matrix(&a, table.clone(), &limits).unwrap();
        let mb = enumerate_matrix(&b, table, &limits).unwrap();
        for agg in [Aggregation::Max, Aggregation::Mean] {
            let fast = mpcs(&ma, &mb, agg).unwrap();
            let naive = naive_mpcs(&a, &b, agg, &limits).unwrap();
            assert!((fast.value - naive.value).abs() < 1e-12, "{agg}: {a:?} {b:?}");
            assert!((fast.phi_ab - naive.phi_ab).abs() < 1e-12);
            assert!((fast.phi_ba - naive.phi_ba).abs() < 1e-12);
            assert_eq!(fast.comparisons, BigUint::from(naive.comparisons / if agg == Aggregation::Max { 2 } else { 1 }));
        }
    }
}

#[test]
fn streaming_matches_materialized() {
    let limits = Limits::default();
    let mut r = rng(12);
    let symbols = pool("s", 12);
    for i in 0..100 {
        let a = disorder(&mut r, &format!("A{i}"), &symbols, 3, &[0, 1, 2, 3, 4]);
        let b = disorder(&mut r, &format!("B{i}"), &symbols, 2, &[0, 1, 2, 3, 4]);
        let table = Arc::new(SymbolTable::intern(&[&a, &b]));
        let ma = enumerate_matrix(&a, table.clone(), &limits).unwrap();
        let mb = enumerate_matrix(&b, table.clone(), &limits).unwrap();
        let space = ProfileSpace::new(&a, table, &limits).unwrap();
        let whole = mpcs(&ma, &mb, Aggregation::Max).unwrap();
        let streamed = mpcs_max_streaming(&space, &mb).unwrap();
        assert_eq!(whole.value, streamed.value);
        assert_eq!(whole.witness.unwrap().score, streamed.witness.unwrap().score);
    }
}

#[test]
fn conditional_matches_brute_force() {
    let limits = Limits::default();
    let mut r = rng(13);
    let symbols = pool("s", 12);
    let mut checked = [0usize; 2];
    for i in 0..400 {
        let with_pairing = i % 4 == 0;
        let kinds: &[u8] = if with_pairing { &[0, 1, 2, 3, 4] } else { &[0, 1, 2, 4] };
        let (ca, cb) = (r.gen_range(1..=3), r.gen_range(1..=3));
        let a = disorder(&mut r, &format!("A{i}"), &symbols, ca, kinds);
        let b = disorder(&mut r, &format!("B{i}"), &symbols, cb, kinds);
        let report = match mpcs_max_conditional(&a, &b, &ConditionalOptions::default()) {
            Ok(rep) => rep,
            Err(Error::AdmitsEmptyProfile(_)) => continue,
            Err(e) => panic!("{e}: {a:?} {b:?}"),
        };
        let table = Arc::new(SymbolTable::intern(&[&a, &b]));
        let ma = enumerate_matrix(&a, table.clone(), &limits).unwrap();
        let mb = enumerate_matrix(&b, table, &limits).unwrap();
        let brute = mpcs(&ma, &mb, Aggregation::Max).unwrap();
        assert!(
            (report.result.value - brute.value).abs() <= 1e-12,
            "{} vs {}: {a:?} {b:?}",
            report.result.value,
            brute.value
        );
        assert!(report.comparisons_after <= brute.comparisons);
        let has_pairing = a.generators().chain(b.generators()).any(|g| g.kind() == profgen_core::GeneratorKind::G3);
        checked[has_pairing as usize] += 1;
    }
    assert!(checked[0] > 200 && checked[1] > 40, "{checked:?}");
}

proptest! {
    #[test]
    fn exact_scores_order_like_their_values(
        s1 in 0u32..40, l1 in 1u32..40, r1 in 1u32..40,
        s2 in 0u32..40, l2 in 1u32..40, r2 in 1u32..40,
    ) {
        let a = Score::new(s1.min(l1).min(r1), l1, r1);
        let b = Score::new(s2.min(l2).min(r2), l2, r2);
        let (x, y) = (a.value(), b.value());
        if a < b { prop_assert!(x <= y); }
        if a == b { prop_assert_eq!(x, y); }
    }
}
