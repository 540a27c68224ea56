//! Conditional generators: shrink two disorders to the few profiles that can
//! attain their MPCS_max.
//!
//! Symptoms in both domains are forced into every profile, symptoms unique to
//! one side are cut down to a minimal canonical filler, and symptoms governed
//! by a G3 generator on either side are left alone.

use std::sync::Arc;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::generator::{CompiledGenerator, Generator, Requirement};
use crate::limits::Limits;
use crate::oracle;
use crate::profile::{count_profiles, enumerate_matrix, necessary_profile, ProfileMatrix, SymbolTable};
use crate::similarity::{comparison_count, mpcs, Aggregation, MpcsResult};
use crate::spec::{Criterion, DisorderSpec};
use crate::symptom::{Symptom, SymptomSet};

/// The three symptom ranges of a disorder pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    /// In both domains and outside every G3 generator: maximized.
    pub shared: SymptomSet,
    /// Only in `A`'s domain, outside every G3 generator: minimized.
    pub minimize_a: SymptomSet,
    pub minimize_b: SymptomSet,
    /// Mentioned by a G3 generator of either disorder.
    pub untouched: SymptomSet,
    pub necessary_a: SymptomSet,
    pub necessary_b: SymptomSet,
    pub forced_a: SymptomSet,
    pub forced_b: SymptomSet,
}

fn g3_domain(d: &DisorderSpec) -> SymptomSet {
    d.generators()
        .filter(|g| matches!(g, Generator::Pairing { .. }))
        .flat_map(|g| g.domain().iter().cloned().collect::<Vec<_>>())
        .collect()
}

pub fn segment(a: &DisorderSpec, b: &DisorderSpec) -> Result<Segmentation> {
    let untouched = g3_domain(a).union(&g3_domain(b));
    let (dom_a, dom_b) = (a.domain(), b.domain());
    let shared = dom_a.intersection(&dom_b).difference(&untouched);
    let minimize_a = dom_a.difference(&dom_b).difference(&untouched);
    let minimize_b = dom_b.difference(&dom_a).difference(&untouched);
    let necessary_a = necessary_profile(a)?;
    let necessary_b = necessary_profile(b)?;
    Ok(Segmentation {
        forced_a: shared.union(&necessary_a),
        forced_b: shared.union(&necessary_b),
        shared,
        minimize_a,
        minimize_b,
        untouched,
        necessary_a,
        necessary_b,
    })
}

fn union_all<'a>(sets: impl IntoIterator<Item = &'a SymptomSet>) -> SymptomSet {
    let mut out = SymptomSet::new();
    for s in sets {
        out.extend(s.iter().cloned());
    }
    out
}

/// Rewrites `g` so that its joint evaluation is exactly the combinations of
/// `g` that contain `f`. The returned generators have disjoint domains.
pub fn force_symptoms(g: &Generator, f: &SymptomSet) -> Result<Vec<Generator>> {
    let dom = g.domain();
    let missing: Vec<String> = f
        .iter()
        .filter(|s| !dom.contains(s))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Unsatisfiable { missing });
    }
    let mut out = Vec::new();
    if !f.is_empty() && !matches!(g, Generator::Fixed(_)) {
        out.push(Generator::Fixed(f.clone()));
    }
    match g {
        Generator::Fixed(_) => out.push(g.clone()),
        Generator::Pairing { .. } => return Err(Error::G3NotReducible),
        Generator::AtLeast { set, k } => {
            let rest = set.difference(f);
            if !rest.is_empty() {
                out.push(Generator::AtLeast {
                    set: rest,
                    k: k.saturating_sub(f.len()),
                });
            }
        }
        Generator::SetCount { sets, k } => {
            let (hosts, others): (Vec<_>, Vec<_>) =
                sets.iter().cloned().partition(|s| !s.is_disjoint(f));
            push_free(&mut out, &hosts, &others, f);
            if !others.is_empty() {
                out.push(Generator::SetCount {
                    k: k.saturating_sub(hosts.len()),
                    sets: others,
                });
            }
        }
        Generator::SplitSetCount { first, second, req } => {
            let (h1, o1): (Vec<_>, Vec<_>) = first.iter().cloned().partition(|s| !s.is_disjoint(f));
            let (h2, o2): (Vec<_>, Vec<_>) =
                second.iter().cloned().partition(|s| !s.is_disjoint(f));
            let hosts: Vec<SymptomSet> = h1.iter().chain(&h2).cloned().collect();
            let others: Vec<SymptomSet> = o1.iter().chain(&o2).cloned().collect();
            push_free(&mut out, &hosts, &others, f);
            let r = req.first.saturating_sub(h1.len());
            let s = req.second.saturating_sub(h2.len());
            let t = req.total.saturating_sub(h1.len() + h2.len());
            match (o1.is_empty(), o2.is_empty()) {
                (true, true) => {}
                (false, true) => out.push(Generator::SetCount { sets: o1, k: r.max(t) }),
                (true, false) => out.push(Generator::SetCount { sets: o2, k: s.max(t) }),
                (false, false) => out.push(Generator::SplitSetCount {
                    first: o1,
                    second: o2,
                    req: Requirement::new(r, s, t),
                }),
            }
        }
    }
    Ok(out)
}

/// Unforced members of host sets that no other set mentions are optional.
fn push_free(out: &mut Vec<Generator>, hosts: &[SymptomSet], others: &[SymptomSet], f: &SymptomSet) {
    let free = union_all(hosts)
        .difference(f)
        .difference(&union_all(others));
    if !free.is_empty() {
        out.push(Generator::AtLeast { set: free, k: 0 });
    }
}

/// Replaces every free choice of non-kept symptoms by one minimal canonical
/// filler: fewest symptoms, then lexicographically smallest names.
///
/// Symptoms in `untouched` are not minimized; one representative is kept for
/// each attainable pattern of them. Several representatives come back as a
/// G3 `[[reps], [{}]]`.
pub fn minimize_fillers(
    gs: &[Generator],
    keep: &SymptomSet,
    untouched: &SymptomSet,
    limits: &Limits,
) -> Result<Vec<Generator>> {
    let alts = alternatives(gs, keep, untouched, limits)?;
    if alts.iter().any(SymptomSet::is_empty) {
        if alts.len() == 1 {
            return Ok(Vec::new());
        }
        return Err(Error::AdmitsEmptyProfile("filler choice".to_string()));
    }
    Ok(vec![choice_generator(alts)])
}

fn choice_generator(mut alts: Vec<SymptomSet>) -> Generator {
    if alts.len() == 1 {
        Generator::Fixed(alts.pop().expect("one element"))
    } else {
        Generator::Pairing {
            first: alts,
            second: vec![SymptomSet::new()],
        }
    }
}

/// Every minimal representative of a generator list, sorted and deduplicated.
fn alternatives(
    gs: &[Generator],
    keep: &SymptomSet,
    untouched: &SymptomSet,
    limits: &Limits,
) -> Result<Vec<SymptomSet>> {
    let mut acc = vec![SymptomSet::new()];
    for g in gs {
        let reps = piece_alternatives(g, keep, untouched, limits)?;
        acc = acc
            .iter()
            .flat_map(|a| reps.iter().map(move |r| a.union(r)))
            .collect();
    }
    acc.sort();
    acc.dedup();
    Ok(acc)
}

fn cap_error(what: &str, limits: &Limits) -> Error {
    Error::CapExceeded {
        what: what.to_string(),
        size: "the candidate search".to_string(),
        cap: format!("{} checks", limits.combinations),
    }
}

fn piece_alternatives(
    g: &Generator,
    keep: &SymptomSet,
    untouched: &SymptomSet,
    limits: &Limits,
) -> Result<Vec<SymptomSet>> {
    let dom = g.domain();
    let keep_here = dom.intersection(keep);
    match g {
        Generator::Fixed(s) => {
            return if keep_here.is_subset(s) {
                Ok(vec![s.clone()])
            } else {
                Err(unsatisfiable(&keep_here))
            }
        }
        Generator::Pairing { .. } => return Err(Error::G3NotReducible),
        _ => {}
    }
    let c = CompiledGenerator::new(g)?;
    let local = |s: &SymptomSet| c.mask_of(s).expect("subset of the domain");
    let kept = local(&keep_here);
    let open = dom.difference(keep);
    let pattern_bits = bits(local(&open.intersection(untouched)));
    let free = open.difference(untouched);
    let fillers: &[Symptom] = free.sorted();
    let filler_bits: Vec<u64> = fillers
        .iter()
        .map(|s| local(&std::iter::once(s.clone()).collect()))
        .collect();
    let all_fillers = filler_bits.iter().fold(0, |m, b| m | b);

    if pattern_bits.len() >= 63 || 1u64 << pattern_bits.len() > limits.combinations {
        return Err(cap_error("untouched-symptom patterns", limits));
    }
    let mut budget = limits.combinations;
    let mut out = Vec::new();
    for p in 0u64..1 << pattern_bits.len() {
        let tau = pattern_bits
            .iter()
            .enumerate()
            .filter(|(i, _)| p >> i & 1 == 1)
            .fold(0, |m, (_, b)| m | b);
        let base = kept | tau;
        // upward closure: a pattern is attainable iff it is with every filler present
        if !c.accepts(base | all_fillers) {
            continue;
        }
        let filler = min_filler(&c, base, &filler_bits, &mut budget)
            .ok_or_else(|| cap_error("filler search", limits))?;
        out.push(c.set_of(base | filler));
    }
    if out.is_empty() {
        return Err(unsatisfiable(&keep_here));
    }
    Ok(out)
}

fn unsatisfiable(keep: &SymptomSet) -> Error {
    Error::Unsatisfiable {
        missing: keep.sorted_names(),
    }
}

fn bits(mask: u64) -> Vec<u64> {
    (0..64).map(|i| 1u64 << i).filter(|b| mask & b != 0).collect()
}

/// Smallest accepted filler, lexicographic among equal sizes. `None` once the
/// check budget runs out.
fn min_filler(c: &CompiledGenerator, base: u64, fillers: &[u64], budget: &mut u64) -> Option<u64> {
    let n = fillers.len();
    for size in 0..=n {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            if *budget == 0 {
                return None;
            }
            *budget -= 1;
            let m = idx.iter().fold(0, |m, &i| m | fillers[i]);
            if c.accepts(base | m) {
                return Some(m);
            }
            // next combination in lexicographic order
            let Some(pos) = (0..size).rev().find(|&i| idx[i] < n - size + i) else {
                break;
            };
            idx[pos] += 1;
            for i in pos + 1..size {
                idx[i] = idx[i - 1] + 1;
            }
        }
    }
    // unreachable for attainable patterns: all fillers were checked above
    Some(fillers.iter().fold(0, |m, b| m | b))
}

/// A reduced disorder pair with its segmentation.
#[derive(Debug, Clone)]
pub struct ConditionalPair {
    pub reduced_a: DisorderSpec,
    pub reduced_b: DisorderSpec,
    pub segmentation: Segmentation,
}

enum Group {
    Choice(Vec<SymptomSet>),
    Verbatim(Criterion),
}

fn reject_overlap(d: &DisorderSpec) -> Result<()> {
    if d.disjoint_criteria() {
        Ok(())
    } else {
        Err(Error::OverlappingCriteria {
            disorder: d.name().to_string(),
            shared: d.overlapping_symptoms().iter().map(|s| s.to_string()).collect(),
        })
    }
}

/// Builds the conditional generator pair `A**`, `B**`.
pub fn conditional_pair(a: &DisorderSpec, b: &DisorderSpec, limits: &Limits) -> Result<ConditionalPair> {
    reject_overlap(a)?;
    reject_overlap(b)?;
    let seg = segment(a, b)?;
    let reduced_a = reduce_side(a, &seg.forced_a, &seg.untouched, limits)?;
    let reduced_b = reduce_side(b, &seg.forced_b, &seg.untouched, limits)?;
    Ok(ConditionalPair {
        reduced_a,
        reduced_b,
        segmentation: seg,
    })
}

fn reduce_side(
    d: &DisorderSpec,
    forced: &SymptomSet,
    untouched: &SymptomSet,
    limits: &Limits,
) -> Result<DisorderSpec> {
    let mut fixed = SymptomSet::new();
    let mut groups = Vec::new();
    for c in d.criteria() {
        if let Generator::Pairing { .. } = c.generator {
            groups.push(Group::Verbatim(c.clone()));
            continue;
        }
        let keep = c.generator.domain().intersection(forced);
        let pieces = force_symptoms(&c.generator, &keep)?;
        let mut alts = alternatives(&pieces, &keep, untouched, limits)?;
        if alts.len() == 1 {
            fixed.extend(alts.pop().expect("one element").iter().cloned());
        } else {
            groups.push(Group::Choice(alts));
        }
    }
    // a choice that may be empty has no G3 form on its own: fold it into the
    // fixed part or into another choice
    loop {
        let Some(i) = groups
            .iter()
            .position(|g| matches!(g, Group::Choice(alts) if alts.iter().any(SymptomSet::is_empty)))
        else {
            break;
        };
        let Group::Choice(alts) = &groups[i] else { unreachable!() };
        if !fixed.is_empty() {
            let merged = alts.iter().map(|r| fixed.union(r)).collect();
            groups[i] = Group::Choice(merged);
            fixed = SymptomSet::new();
            continue;
        }
        let Some(j) = (0..groups.len()).find(|&j| j != i && matches!(groups[j], Group::Choice(_)))
        else {
            return Err(Error::AdmitsEmptyProfile(d.name().to_string()));
        };
        let (lo, hi) = (i.min(j), i.max(j));
        let Group::Choice(second) = groups.remove(hi) else { unreachable!() };
        let Group::Choice(first) = &groups[lo] else { unreachable!() };
        let mut merged: Vec<SymptomSet> = first
            .iter()
            .flat_map(|x| second.iter().map(move |y| x.union(y)))
            .collect();
        merged.sort();
        merged.dedup();
        groups[lo] = Group::Choice(merged);
    }
    let mut criteria = Vec::new();
    if !fixed.is_empty() {
        criteria.push(Criterion::new(Generator::Fixed(fixed)));
    }
    for g in groups {
        criteria.push(match g {
            Group::Choice(alts) => Criterion::new(choice_generator(alts)),
            Group::Verbatim(c) => c,
        });
    }
    if criteria.is_empty() {
        return Err(Error::AdmitsEmptyProfile(d.name().to_string()));
    }
    DisorderSpec::new(d.name(), criteria)
}

#[derive(Debug, Clone, Default)]
pub struct ConditionalOptions {
    pub limits: Limits,
    /// Profile counts to use instead of counting, e.g. published figures.
    pub published_a: Option<BigUint>,
    pub published_b: Option<BigUint>,
    /// Re-check the value against the brute-force oracle when both disorders are small.
    pub verify: bool,
}

#[derive(Debug, Clone)]
pub struct ReductionReport {
    pub segmentation: Segmentation,
    pub reduced_a: DisorderSpec,
    pub reduced_b: DisorderSpec,
    pub matrix_a: ProfileMatrix,
    pub matrix_b: ProfileMatrix,
    pub result: MpcsResult,
    /// Full-matrix comparisons; `None` when a count is unavailable.
    pub comparisons_before: Option<BigUint>,
    pub comparisons_after: BigUint,
    /// Oracle agreement within 1e-12; `None` if not requested or too large.
    pub verified: Option<bool>,
}

/// MPCS_max computed on the reduced pair.
pub fn mpcs_max_conditional(
    a: &DisorderSpec,
    b: &DisorderSpec,
    opts: &ConditionalOptions,
) -> Result<ReductionReport> {
    let limits = &opts.limits;
    let pair = conditional_pair(a, b, limits)?;
    let table = Arc::new(SymbolTable::intern(&[a, b]));
    let matrix_a = enumerate_matrix(&pair.reduced_a, table.clone(), limits)?.with_reduced(true);
    let matrix_b = enumerate_matrix(&pair.reduced_b, table, limits)?.with_reduced(true);
    let result = mpcs(&matrix_a, &matrix_b, Aggregation::Max)?;
    let count = |d: &DisorderSpec, published: &Option<BigUint>| match published {
        Some(n) => Some(n.clone()),
        None => count_profiles(d, limits).ok(),
    };
    let comparisons_before = match (count(a, &opts.published_a), count(b, &opts.published_b)) {
        (Some(x), Some(y)) => Some(comparison_count(&x, &y)),
        _ => None,
    };
    let verified = if opts.verify {
        match oracle::naive_mpcs(a, b, Aggregation::Max, limits) {
            Ok(naive) => Some((naive.value - result.value).abs() <= 1e-12),
            Err(Error::OracleTooLarge { .. }) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(ReductionReport {
        comparisons_after: BigUint::from(matrix_a.len()) * BigUint::from(matrix_b.len()),
        segmentation: pair.segmentation,
        reduced_a: pair.reduced_a,
        reduced_b: pair.reduced_b,
        matrix_a,
        matrix_b,
        result,
        comparisons_before,
        verified,
    })
}
