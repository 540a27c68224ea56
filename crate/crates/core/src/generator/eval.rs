use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::algebra::Family;
use super::{Generator, GeneratorKind};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::symptom::{Symptom, SymptomSet};

/// Most distinct symptoms a single generator may mention (one `u64` mask).
pub const MAX_GENERATOR_SYMBOLS: usize = 64;

#[derive(Debug, Clone)]
enum Shape {
    Fixed(u64),
    /// G1, G2 and G4. G1 is G2 over singleton sets.
    Slots {
        sets: Vec<u64>,
        in_second: Vec<bool>,
        need_first: usize,
        need_second: usize,
        need_total: usize,
    },
    Pairing {
        first: Vec<u64>,
        second: Vec<u64>,
    },
}

/// A generator translated to bitmasks over its own local symbol order.
///
/// Local bit `i` is the `i`-th symptom of [`Generator::domain`].
#[derive(Debug, Clone)]
pub struct CompiledGenerator {
    kind: GeneratorKind,
    symbols: Vec<Symptom>,
    shape: Shape,
}

impl CompiledGenerator {
    pub fn new(g: &Generator) -> Result<Self> {
        let symbols: Vec<Symptom> = g.domain().iter().cloned().collect();
        if symbols.len() > MAX_GENERATOR_SYMBOLS {
            return Err(Error::CapExceeded {
                what: format!("{} generator", g.kind()),
                size: format!("{} distinct symptoms", symbols.len()),
                cap: format!("{MAX_GENERATOR_SYMBOLS} symptoms"),
            });
        }
        let index: HashMap<&Symptom, usize> =
            symbols.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mask = |set: &SymptomSet| set.iter().fold(0u64, |m, s| m | 1 << index[s]);
        let shape = match g {
            Generator::Fixed(set) => Shape::Fixed(mask(set)),
            Generator::AtLeast { set, k } => {
                let sets: Vec<u64> = set.iter().map(|s| 1u64 << index[s]).collect();
                Shape::Slots {
                    in_second: vec![false; sets.len()],
                    sets,
                    need_first: 0,
                    need_second: 0,
                    need_total: *k,
                }
            }
            Generator::SetCount { sets, k } => Shape::Slots {
                sets: sets.iter().map(mask).collect(),
                in_second: vec![false; sets.len()],
                need_first: 0,
                need_second: 0,
                need_total: *k,
            },
            Generator::Pairing { first, second } => Shape::Pairing {
                first: first.iter().map(mask).collect(),
                second: second.iter().map(mask).collect(),
            },
            Generator::SplitSetCount { first, second, req } => Shape::Slots {
                sets: first.iter().chain(second).map(mask).collect(),
                in_second: first
                    .iter()
                    .map(|_| false)
                    .chain(second.iter().map(|_| true))
                    .collect(),
                need_first: req.first,
                need_second: req.second,
                need_total: req.total,
            },
        };
        drop(index);
        Ok(CompiledGenerator {
            kind: g.kind(),
            symbols,
            shape,
        })
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    /// Local symbol order.
    pub fn symbols(&self) -> &[Symptom] {
        &self.symbols
    }

    pub fn domain_mask(&self) -> u64 {
        if self.symbols.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.symbols.len()) - 1
        }
    }

    /// Local mask of `set`, or `None` if it mentions a symptom outside the domain.
    pub fn mask_of(&self, set: &SymptomSet) -> Option<u64> {
        set.iter().try_fold(0u64, |m, s| {
            self.symbols.iter().position(|x| x == s).map(|i| m | 1 << i)
        })
    }

    /// The symptom set for a local mask, in local order.
    pub fn set_of(&self, mask: u64) -> SymptomSet {
        self.symbols
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, s)| s.clone())
            .collect()
    }

    /// True if no symptom occurs in two literal sets (the empty G3 sentinel aside).
    pub fn sets_disjoint(&self) -> bool {
        let all: Vec<u64> = match &self.shape {
            Shape::Fixed(_) => return true,
            Shape::Slots { sets, .. } => sets.clone(),
            Shape::Pairing { first, second } => first.iter().chain(second).copied().collect(),
        };
        let mut seen = 0u64;
        for m in all {
            if seen & m != 0 {
                return false;
            }
            seen |= m;
        }
        true
    }

    /// Number of selection tuples before duplicate unions collapse. Saturates.
    pub fn tuple_count(&self) -> u128 {
        match &self.shape {
            Shape::Fixed(_) => 1,
            Shape::Pairing { first, second } => (first.len() as u128) * (second.len() as u128),
            Shape::Slots {
                sets,
                in_second,
                need_first,
                need_second,
                need_total,
            } => {
                let n1 = in_second.iter().filter(|x| !**x).count();
                let n2 = sets.len() - n1;
                // table[c1][c2]: tuples touching c1 first-list and c2 second-list sets
                let mut table = vec![vec![0u128; n2 + 1]; n1 + 1];
                table[0][0] = 1;
                for (m, second) in sets.iter().zip(in_second) {
                    let ways = (1u128 << m.count_ones()) - 1;
                    let mut next = vec![vec![0u128; n2 + 1]; n1 + 1];
                    for c1 in 0..=n1 {
                        for c2 in 0..=n2 {
                            let cur = table[c1][c2];
                            if cur == 0 {
                                continue;
                            }
                            next[c1][c2] = next[c1][c2].saturating_add(cur);
                            let (t1, t2) = if *second { (c1, c2 + 1) } else { (c1 + 1, c2) };
                            next[t1][t2] = next[t1][t2].saturating_add(cur.saturating_mul(ways));
                        }
                    }
                    table = next;
                }
                let mut total = 0u128;
                for (c1, row) in table.iter().enumerate() {
                    for (c2, v) in row.iter().enumerate() {
                        if c1 >= *need_first && c2 >= *need_second && c1 + c2 >= *need_total {
                            total = total.saturating_add(*v);
                        }
                    }
                }
                total
            }
        }
    }

    /// Visits every selection tuple's union. Duplicates are possible when sets overlap.
    pub fn for_each(&self, f: &mut dyn FnMut(u64)) {
        match &self.shape {
            Shape::Fixed(m) => f(*m),
            Shape::Pairing { first, second } => {
                for a in first {
                    for b in second {
                        f(a | b);
                    }
                }
            }
            Shape::Slots {
                sets,
                in_second,
                need_first,
                need_second,
                need_total,
            } => {
                let n = sets.len();
                // remaining[i] = (first-list, second-list) slots at positions >= i
                let mut remaining = vec![(0usize, 0usize); n + 1];
                for i in (0..n).rev() {
                    let (r1, r2) = remaining[i + 1];
                    remaining[i] = if in_second[i] { (r1, r2 + 1) } else { (r1 + 1, r2) };
                }
                let search = SlotSearch {
                    sets,
                    in_second,
                    remaining: &remaining,
                    need: (*need_first, *need_second, *need_total),
                };
                search.run(0, 0, 0, 0, f);
            }
        }
    }

    /// Distinct combinations in canonical local order.
    pub fn combinations(&self, limits: &Limits) -> Result<Vec<u64>> {
        let bound = self.tuple_count();
        if bound > limits.combinations as u128 {
            return Err(Error::CapExceeded {
                what: format!("{} generator", self.kind),
                size: format!("{bound} combinations"),
                cap: limits.combinations.to_string(),
            });
        }
        let mut out = Vec::with_capacity(bound as usize);
        self.for_each(&mut |m| out.push(m));
        out.sort_unstable_by(|a, b| canonical_cmp(*a, *b));
        out.dedup();
        Ok(out)
    }

    /// Membership test: is the local `mask` one of the generator's combinations?
    pub fn accepts(&self, mask: u64) -> bool {
        match &self.shape {
            Shape::Fixed(m) => mask == *m,
            Shape::Pairing { first, second } => first
                .iter()
                .any(|a| second.iter().any(|b| a | b == mask)),
            Shape::Slots {
                sets,
                in_second,
                need_first,
                need_second,
                need_total,
            } => {
                if mask & !self.domain_mask() != 0 {
                    return false;
                }
                // a set counts iff it meets the mask; taking every met set
                // covers the whole mask and maximizes all counts
                let (mut h1, mut h2) = (0, 0);
                for (m, second) in sets.iter().zip(in_second) {
                    if m & mask != 0 {
                        if *second {
                            h2 += 1;
                        } else {
                            h1 += 1;
                        }
                    }
                }
                h1 >= *need_first && h2 >= *need_second && h1 + h2 >= *need_total
            }
        }
    }

    /// Local bits present in every combination.
    ///
    /// G1, G2 and G4 families are upward closed within the domain, so a symbol
    /// is necessary exactly when the domain without it is rejected.
    pub fn necessary_mask(&self) -> u64 {
        match &self.shape {
            Shape::Fixed(m) => *m,
            Shape::Pairing { first, second } => first
                .iter()
                .flat_map(|a| second.iter().map(move |b| a | b))
                .fold(self.domain_mask(), |acc, m| acc & m),
            Shape::Slots { .. } => {
                let full = self.domain_mask();
                (0..self.symbols.len())
                    .map(|i| 1u64 << i)
                    .filter(|bit| !self.accepts(full & !bit))
                    .fold(0, |acc, bit| acc | bit)
            }
        }
    }

    /// Exact number of distinct combinations.
    pub fn count(&self, limits: &Limits) -> Result<BigUint> {
        if self.sets_disjoint() {
            Ok(BigUint::from(self.tuple_count()))
        } else {
            Ok(BigUint::from(self.combinations(limits)?.len()))
        }
    }
}

struct SlotSearch<'a> {
    sets: &'a [u64],
    in_second: &'a [bool],
    remaining: &'a [(usize, usize)],
    need: (usize, usize, usize),
}

impl SlotSearch<'_> {
    fn run(&self, i: usize, acc: u64, c1: usize, c2: usize, f: &mut dyn FnMut(u64)) {
        let (r1, r2) = self.remaining[i];
        let (n1, n2, nt) = self.need;
        if c1 + r1 < n1 || c2 + r2 < n2 || c1 + c2 + r1 + r2 < nt {
            return;
        }
        if i == self.sets.len() {
            f(acc);
            return;
        }
        self.run(i + 1, acc, c1, c2, f);
        let m = self.sets[i];
        let (d1, d2) = if self.in_second[i] { (0, 1) } else { (1, 0) };
        let mut sub = m;
        while sub != 0 {
            self.run(i + 1, acc | sub, c1 + d1, c2 + d2, f);
            sub = (sub - 1) & m;
        }
    }
}

/// Graded-lexicographic order on masks: fewer bits first, then the set whose
/// lowest differing bit is present sorts first.
pub(crate) fn canonical_cmp(a: u64, b: u64) -> Ordering {
    a.count_ones().cmp(&b.count_ones()).then_with(|| {
        if a == b {
            Ordering::Equal
        } else {
            let d = a ^ b;
            if a & d & d.wrapping_neg() != 0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        }
    })
}

pub fn eval_generator(g: &Generator) -> Result<Family> {
    eval_generator_with(g, &Limits::default())
}

/// Every symptom combination of `g`, duplicate-free.
pub fn eval_generator_with(g: &Generator, limits: &Limits) -> Result<Family> {
    g.validate()?;
    let compiled = CompiledGenerator::new(g)?;
    let masks = compiled.combinations(limits)?;
    Ok(masks.into_iter().map(|m| compiled.set_of(m)).collect())
}

/// Symptoms present in every combination of `g`.
pub fn necessary_symptoms(g: &Generator) -> Result<SymptomSet> {
    g.validate()?;
    let compiled = CompiledGenerator::new(g)?;
    Ok(compiled.set_of(compiled.necessary_mask()))
}

/// Exact number of distinct combinations of `g`.
///
/// Uses the closed-form tuple count when the literal sets are pairwise
/// disjoint, otherwise enumerates and deduplicates.
pub fn count_generator(g: &Generator, limits: &Limits) -> Result<BigUint> {
    g.validate()?;
    CompiledGenerator::new(g)?.count(limits)
}

/// Number of subsets of an `n`-set with at least `k` elements: Σ_{i=k}^{n} C(n, i).
pub fn count_at_least(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut binom = BigUint::one();
    let mut total = BigUint::zero();
    for i in 0..=n {
        if i >= k {
            total += &binom;
        }
        binom = binom * (n - i) / (i + 1);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::Requirement;

    fn set(names: &[&str]) -> SymptomSet {
        SymptomSet::from_names(names).unwrap()
    }

    fn fam(sets: &[&[&str]]) -> Family {
        sets.iter().map(|s| set(s)).collect()
    }

    #[test]
    fn g0_is_identity() {
        let g = Generator::Fixed(set(&["a", "b", "c", "d"]));
        assert_eq!(eval_generator(&g).unwrap(), fam(&[&["a", "b", "c", "d"]]));
    }

    #[test]
    fn g1_table_example() {
        let g = Generator::AtLeast {
            set: set(&["a", "b", "c"]),
            k: 2,
        };
        assert_eq!(
            eval_generator(&g).unwrap(),
            fam(&[&["a", "b"], &["a", "c"], &["b", "c"], &["a", "b", "c"]])
        );
    }

    #[test]
    fn g1_full_threshold_is_g0() {
        let s = set(&["x", "y", "z"]);
        let g = Generator::AtLeast { set: s.clone(), k: 3 };
        assert_eq!(eval_generator(&g).unwrap(), fam(&[&["x", "y", "z"]]));
    }

    #[test]
    fn g1_zero_threshold_includes_empty() {
        let g = Generator::AtLeast {
            set: set(&["a", "b"]),
            k: 0,
        };
        let out = eval_generator(&g).unwrap();
        assert_eq!(out.len(), 4);
        assert!(out.contains(&SymptomSet::new()));
    }

    #[test]
    fn g2_counts() {
        let g = Generator::SetCount {
            sets: vec![set(&["a", "b"]), set(&["c", "d"]), set(&["e", "f"])],
            k: 2,
        };
        assert_eq!(eval_generator(&g).unwrap().len(), 54);
        assert_eq!(count_generator(&g, &Limits::default()).unwrap(), BigUint::from(54u32));
    }

    #[test]
    fn g3_table_example_and_sentinel() {
        let g = Generator::Pairing {
            first: vec![set(&["a", "b"]), set(&["c"])],
            second: vec![set(&["d", "e"]), set(&["f"])],
        };
        assert_eq!(
            eval_generator(&g).unwrap(),
            fam(&[&["a", "b", "d", "e"], &["a", "b", "f"], &["c", "d", "e"], &["c", "f"]])
        );
        let alone = Generator::Pairing {
            first: vec![set(&["a"]), set(&["b"]), set(&["c"])],
            second: vec![SymptomSet::new()],
        };
        assert_eq!(eval_generator(&alone).unwrap(), fam(&[&["a"], &["b"], &["c"]]));
    }

    #[test]
    fn g4_counts() {
        let g = Generator::SplitSetCount {
            first: vec![set(&["a", "b"]), set(&["c"])],
            second: vec![set(&["d"]), set(&["e", "f"])],
            req: Requirement::new(1, 0, 3),
        };
        assert_eq!(eval_generator(&g).unwrap().len(), 33);
        assert_eq!(count_generator(&g, &Limits::default()).unwrap(), BigUint::from(33u32));
    }

    #[test]
    fn overlapping_sets_collapse() {
        // {a} from the first set and {a} from the second give one combination
        let g = Generator::SetCount {
            sets: vec![set(&["a"]), set(&["a", "b"])],
            k: 1,
        };
        let out = eval_generator(&g).unwrap();
        assert_eq!(out, fam(&[&["a"], &["b"], &["a", "b"]]));
        assert_eq!(count_generator(&g, &Limits::default()).unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn invalid_generator_is_rejected() {
        let g = Generator::SetCount {
            sets: vec![set(&["a"])],
            k: 2,
        };
        assert!(matches!(eval_generator(&g), Err(Error::InvalidGenerator { .. })));
    }

    #[test]
    fn cap_is_enforced() {
        let names: Vec<String> = (0..30).map(|i| format!("s{i}")).collect();
        let g = Generator::AtLeast {
            set: SymptomSet::from_names(&names).unwrap(),
            k: 1,
        };
        assert!(matches!(eval_generator(&g), Err(Error::CapExceeded { .. })));
        // the closed form still counts it
        assert_eq!(
            count_generator(&g, &Limits::default()).unwrap(),
            BigUint::from((1u64 << 30) - 1)
        );
    }

    #[test]
    fn necessary_symptom_examples() {
        let g0 = Generator::Fixed(set(&["a", "b"]));
        assert_eq!(necessary_symptoms(&g0).unwrap(), set(&["a", "b"]));
        let g1 = Generator::AtLeast {
            set: set(&["a", "b", "c"]),
            k: 2,
        };
        assert_eq!(necessary_symptoms(&g1).unwrap(), SymptomSet::new());
        let g2 = Generator::SetCount {
            sets: vec![set(&["a"]), set(&["b", "c"])],
            k: 2,
        };
        assert_eq!(necessary_symptoms(&g2).unwrap(), set(&["a"]));
    }

    #[test]
    fn necessary_mask_agrees_with_intersection_fold() {
        let gens = [
            Generator::SplitSetCount {
                first: vec![set(&["a", "b"]), set(&["c"])],
                second: vec![set(&["d"]), set(&["e", "f"])],
                req: Requirement::new(2, 1, 3),
            },
            Generator::SetCount {
                sets: vec![set(&["a"]), set(&["a", "b"]), set(&["c"])],
                k: 3,
            },
            Generator::Pairing {
                first: vec![set(&["a", "b"]), set(&["a", "c"])],
                second: vec![set(&["d"]), SymptomSet::new()],
            },
        ];
        for g in &gens {
            let c = CompiledGenerator::new(g).unwrap();
            let mut fold = c.domain_mask();
            c.for_each(&mut |m| fold &= m);
            assert_eq!(c.necessary_mask(), fold, "{g}");
        }
    }

    #[test]
    fn count_at_least_examples() {
        assert_eq!(count_at_least(3, 1), BigUint::from(7u32));
        assert_eq!(count_at_least(5, 3), BigUint::from(16u32));
        assert_eq!(count_at_least(10, 0), BigUint::from(1024u32));
        assert_eq!(count_at_least(3, 4), BigUint::zero());
    }

    #[test]
    fn accepts_matches_enumeration() {
        let g = Generator::SplitSetCount {
            first: vec![set(&["a", "b"]), set(&["c"])],
            second: vec![set(&["d"]), set(&["e", "f"])],
            req: Requirement::new(1, 0, 3),
        };
        let c = CompiledGenerator::new(&g).unwrap();
        let members = c.combinations(&Limits::default()).unwrap();
        for mask in 0..1u64 << 6 {
            assert_eq!(c.accepts(mask), members.contains(&mask), "mask {mask:06b}");
        }
    }

    #[test]
    fn canonical_order_on_masks() {
        let mut v = vec![0b110, 0b011, 0b101, 0b111, 0b001];
        v.sort_by(|a, b| canonical_cmp(*a, *b));
        assert_eq!(v, vec![0b001, 0b011, 0b101, 0b110, 0b111]);
    }
}
