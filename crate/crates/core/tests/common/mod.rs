//! Random generators and disorders for property tests.
#![allow(dead_code)]

use profgen_core::generator::{Generator, Requirement};
use profgen_core::spec::{Criterion, DisorderSpec};
use profgen_core::symptom::{Symptom, SymptomSet};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pool(prefix: &str, n: usize) -> Vec<Symptom> {
    (0..n).map(|i| Symptom::new(&format!("{prefix}{i}")).unwrap()).collect()
}

fn subset(rng: &mut TestRng, symbols: &[Symptom], min: usize, max: usize) -> SymptomSet {
    let n = rng.gen_range(min..=max.min(symbols.len()));
    symbols.choose_multiple(rng, n).cloned().collect()
}

/// `m` nonempty sets, pairwise distinct, drawn from `symbols`; disjoint unless `overlap`.
fn sets(rng: &mut TestRng, symbols: &[Symptom], m: usize, overlap: bool) -> Vec<SymptomSet> {
    let mut out: Vec<SymptomSet> = Vec::new();
    let mut free: Vec<Symptom> = symbols.to_vec();
    free.shuffle(rng);
    for _ in 0..m {
        let s = if overlap {
            subset(rng, symbols, 1, 3)
        } else {
            if free.is_empty() {
                break;
            }
            let take = rng.gen_range(1..=free.len().min(3));
            free.drain(..take).collect()
        };
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// A random valid generator using only `symbols` (at most 12 of them).
///
/// `kinds` restricts the variants, as indices 0..=4.
pub fn generator(rng: &mut TestRng, symbols: &[Symptom], kinds: &[u8]) -> Generator {
    assert!(!symbols.is_empty() && symbols.len() <= 12);
    let overlap = rng.gen_bool(0.2);
    match *kinds.choose(rng).unwrap() {
        0 => Generator::Fixed(subset(rng, symbols, 1, 5)),
        1 => {
            let set = subset(rng, symbols, 1, 6);
            let k = rng.gen_range(0..=set.len());
            Generator::AtLeast { set, k }
        }
        2 => {
            let m = rng.gen_range(2..=4);
            let s = sets(rng, symbols, m, overlap);
            if s.len() < 2 {
                let set = s.into_iter().next().unwrap();
                let k = rng.gen_range(0..=set.len());
                return Generator::AtLeast { set, k };
            }
            let k = rng.gen_range(0..=s.len());
            Generator::SetCount { sets: s, k }
        }
        3 => {
            let m = rng.gen_range(2..=5);
            let all = sets(rng, symbols, m, overlap);
            let cut = rng.gen_range(1..=all.len().max(1)).min(all.len());
            let first = all[..cut].to_vec();
            let mut second = all[cut..].to_vec();
            if second.is_empty() || rng.gen_bool(0.3) {
                second.push(SymptomSet::new());
            }
            Generator::Pairing { first, second }
        }
        _ => {
            let m = rng.gen_range(1..=5);
            let all = sets(rng, symbols, m, overlap);
            let cut = rng.gen_range(0..=all.len());
            let (first, second) = (all[..cut].to_vec(), all[cut..].to_vec());
            let (n1, n2) = (first.len(), second.len());
            let req = Requirement::new(
                rng.gen_range(0..=n1),
                rng.gen_range(0..=n2),
                rng.gen_range(0..=n1 + n2),
            );
            Generator::SplitSetCount { first, second, req }
        }
    }
}

/// A disorder whose criteria have pairwise disjoint domains, drawn from `symbols`.
pub fn disorder(
    rng: &mut TestRng,
    name: &str,
    symbols: &[Symptom],
    criteria: usize,
    kinds: &[u8],
) -> DisorderSpec {
    let mut free = symbols.to_vec();
    free.shuffle(rng);
    let per = (free.len() / criteria).max(1);
    let mut out = Vec::new();
    for (i, chunk) in free.chunks(per).take(criteria).enumerate() {
        let g = generator(rng, chunk, kinds);
        let label = ["A", "B", "C", "D+E", "F"][i % 5];
        out.push(if rng.gen_bool(0.5) {
            Criterion::labeled(label, g)
        } else {
            Criterion::new(g)
        });
    }
    DisorderSpec::new(name, out).unwrap()
}
