//! Cosine similarity on binary profiles and the MPCS aggregate.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{and_count, Profile, ProfileMatrix, ProfileSpace};
use crate::symptom::SymptomSet;

/// How per-row best matches are combined into one direction's value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Mean,
    Max,
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Mean => "mean",
            Aggregation::Max => "max",
        })
    }
}

/// A cosine kept as integers: `shared / sqrt(left * right)`.
///
/// Comparisons and equality are exact on the value, so ties are real ties:
/// `1/sqrt(1*4)` equals `2/sqrt(4*4)`.
#[derive(Debug, Clone, Copy)]
pub struct Score {
    pub shared: u32,
    pub left: u32,
    pub right: u32,
}

impl Score {
    pub const ZERO: Score = Score {
        shared: 0,
        left: 0,
        right: 0,
    };

    pub fn new(shared: u32, left: u32, right: u32) -> Self {
        Score {
            shared,
            left,
            right,
        }
    }

    /// The squared cosine as a reduced fraction; `(0, 1)` for an empty operand.
    pub fn squared(&self) -> (u128, u128) {
        if self.shared == 0 {
            return (0, 1);
        }
        let num = self.shared as u128 * self.shared as u128;
        let den = self.left as u128 * self.right as u128;
        let g = gcd(num, den);
        (num / g, den / g)
    }

    /// Equal exact values map to the same float regardless of the operand sizes.
    pub fn value(&self) -> f64 {
        let (n, d) = self.squared();
        (n as f64).sqrt() / (d as f64).sqrt()
    }
}

impl Score {
    fn raw(&self) -> (u128, u128) {
        if self.shared == 0 {
            (0, 1)
        } else {
            (
                self.shared as u128 * self.shared as u128,
                self.left as u128 * self.right as u128,
            )
        }
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = self.raw();
        let (c, d) = other.raw();
        (a * d).cmp(&(c * b))
    }
}

impl PartialEq for Score {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Score {}

impl std::hash::Hash for Score {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.squared().hash(state);
    }
}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The most similar pair found by max aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub a_index: usize,
    pub b_index: usize,
    pub a: SymptomSet,
    pub b: SymptomSet,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpcsResult {
    pub value: f64,
    pub aggregation: Aggregation,
    pub witness: Option<Witness>,
    pub comparisons: BigUint,
    pub phi_ab: f64,
    pub phi_ba: f64,
}

/// Cosine of two binary profiles; zero if either is empty.
pub fn cosine(p: &Profile, q: &Profile) -> Result<f64> {
    let shared = p.intersection_count(q)?;
    Ok(Score::new(shared, p.ones(), q.ones()).value())
}

/// Best cosine of `p` against every row of `m`, with the first row attaining it.
pub fn max_cosine(p: &Profile, m: &ProfileMatrix) -> Result<(f64, usize)> {
    if m.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    check_width(p.width(), m.table().len())?;
    let (score, j) = best_in(p.words(), p.ones(), m);
    Ok((score.value(), j))
}

fn check_width(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::TableMismatch { left, right })
    }
}

/// First row of `m` with the highest score against `row`.
///
/// With `row` fixed, `shared² / o` orders the candidates; it is compared by
/// cross-multiplication.
fn best_in(row: &[u64], ones: u32, m: &ProfileMatrix) -> (Score, usize) {
    let ms = m.ones_slice();
    let (mut best_sq, mut best_o, mut best) = (0u64, 1u64, (0u32, ms[0], 0usize));
    let mut consider = |j: usize, shared: u32, o: u32| {
        let sq = shared as u64 * shared as u64;
        if sq * best_o > best_sq * o as u64 {
            (best_sq, best_o, best) = (sq, o as u64, (shared, o, j));
        }
    };
    if m.stride() == 1 {
        let r = row[0];
        for (j, (&w, &o)) in m.data().iter().zip(ms).enumerate() {
            consider(j, (r & w).count_ones(), o);
        }
    } else {
        for (j, (other, &o)) in m.data().chunks_exact(m.stride()).zip(ms).enumerate() {
            consider(j, and_count(row, other), o);
        }
    }
    let (shared, o, j) = best;
    (Score::new(shared, ones, o), j)
}

const BLOCK: usize = 256;

/// A score with its row in `A` and row in `B`.
type Best = (Score, usize, usize);

fn better(x: Best, y: Best) -> Best {
    match y.0.cmp(&x.0) {
        Ordering::Greater => y,
        Ordering::Less => x,
        Ordering::Equal => {
            if (y.1, y.2) < (x.1, x.2) {
                y
            } else {
                x
            }
        }
    }
}

fn max_pass(a: &ProfileMatrix, b: &ProfileMatrix) -> Best {
    (0..a.len().div_ceil(BLOCK))
        .into_par_iter()
        .map(|blk| {
            let mut best: Best = (Score::ZERO, usize::MAX, usize::MAX);
            for i in blk * BLOCK..((blk + 1) * BLOCK).min(a.len()) {
                let (s, j) = best_in(a.row(i), a.ones(i), b);
                best = better(best, (s, i, j));
            }
            best
        })
        .reduce(|| (Score::ZERO, usize::MAX, usize::MAX), better)
}

/// Per-row best matches of `a` against `b`, in row order.
fn row_maxima(a: &ProfileMatrix, b: &ProfileMatrix) -> Vec<f64> {
    (0..a.len())
        .into_par_iter()
        .with_min_len(BLOCK)
        .map(|i| best_in(a.row(i), a.ones(i), b).0.value())
        .collect()
}

/// Pairwise summation, so the result does not depend on thread scheduling.
pub fn tree_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (l, r) = xs.split_at(n / 2);
            tree_sum(l) + tree_sum(r)
        }
    }
}

/// Maximum pairwise cosine similarity between two matrices on one table.
///
/// Max aggregation is symmetric, so one pass of `|A|·|B|` comparisons serves
/// both directions. Mean aggregation runs both directions.
pub fn mpcs(a: &ProfileMatrix, b: &ProfileMatrix, agg: Aggregation) -> Result<MpcsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    check_width(a.table().len(), b.table().len())?;
    if a.table().names() != b.table().names() {
        return Err(Error::TableMismatch {
            left: a.table().len(),
            right: b.table().len(),
        });
    }
    let pairs = BigUint::from(a.len()) * BigUint::from(b.len());
    match agg {
        Aggregation::Max => {
            let (score, i, j) = max_pass(a, b);
            let value = score.value();
            Ok(MpcsResult {
                value,
                aggregation: agg,
                witness: Some(Witness {
                    a_index: i,
                    b_index: j,
                    a: a.row_set(i),
                    b: b.row_set(j),
                    score,
                }),
                comparisons: pairs,
                phi_ab: value,
                phi_ba: value,
            })
        }
        Aggregation::Mean => {
            let phi_ab = tree_sum(&row_maxima(a, b)) / a.len() as f64;
            let phi_ba = tree_sum(&row_maxima(b, a)) / b.len() as f64;
            Ok(MpcsResult {
                value: phi_ab.max(phi_ba),
                aggregation: agg,
                witness: None,
                comparisons: pairs * 2u32,
                phi_ab,
                phi_ba,
            })
        }
    }
}

/// MPCS_max with `A` streamed from its odometer instead of materialized.
///
/// Witness indices refer to the odometer position in `a` and the row of `b`.
pub fn mpcs_max_streaming(a: &ProfileSpace, b: &ProfileMatrix) -> Result<MpcsResult> {
    if b.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    check_width(a.table().len(), b.table().len())?;
    let total = a.tuple_count();
    if total == 0 {
        return Err(Error::EmptyMatrix);
    }
    let chunk = 1u128 << 12;
    let (score, i, j) = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut best = (Score::ZERO, usize::MAX, usize::MAX);
            let mut pos = (c * chunk) as usize;
            a.for_each_in(c * chunk, (c + 1) * chunk, &mut |row| {
                let ones = row.iter().map(|w| w.count_ones()).sum();
                let (s, j) = best_in(row, ones, b);
                best = better(best, (s, pos, j));
                pos += 1;
            });
            best
        })
        .reduce(|| (Score::ZERO, usize::MAX, usize::MAX), better);
    let mut a_row = None;
    a.for_each_in(i as u128, i as u128 + 1, &mut |r| {
        a_row = Some(a.table().set_of(r))
    });
    let value = score.value();
    Ok(MpcsResult {
        value,
        aggregation: Aggregation::Max,
        witness: Some(Witness {
            a_index: i,
            b_index: j,
            a: a_row.expect("index in range"),
            b: b.row_set(j),
            score,
        }),
        comparisons: BigUint::from(total) * BigUint::from(b.len()),
        phi_ab: value,
        phi_ba: value,
    })
}

/// Similarity of two maximum profiles.
pub fn mpcs_mp(a: &Profile, b: &Profile) -> Result<f64> {
    cosine(a, b)
}

/// Number of cosine computations for a brute-force MPCS_max.
pub fn comparison_count(count_a: &BigUint, count_b: &BigUint) -> BigUint {
    count_a * count_b
}
