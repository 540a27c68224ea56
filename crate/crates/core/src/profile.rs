//! Binary profile matrices: symbol tables, bitset profiles, enumeration and export.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::{count_generator, necessary_symptoms, CompiledGenerator};
use crate::limits::Limits;
use crate::spec::DisorderSpec;
use crate::symptom::{Symptom, SymptomSet};

/// Column order shared by every matrix that is compared together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    names: Vec<Symptom>,
    index: HashMap<Symptom, usize>,
}

impl SymbolTable {
    /// Builds a table from symptoms in the given order; repeats are ignored.
    pub fn from_symptoms<'a>(symptoms: impl IntoIterator<Item = &'a Symptom>) -> Self {
        let mut table = SymbolTable {
            names: Vec::new(),
            index: HashMap::new(),
        };
        for s in symptoms {
            if !table.index.contains_key(s) {
                table.index.insert(s.clone(), table.names.len());
                table.names.push(s.clone());
            }
        }
        table
    }

    /// Union of the disorders' domains in first-seen order: disorders as
    /// listed, then criteria, sets and elements as written.
    pub fn intern(disorders: &[&DisorderSpec]) -> Self {
        let all: Vec<Symptom> = disorders
            .iter()
            .flat_map(|d| d.domain().iter().cloned().collect::<Vec<_>>())
            .collect();
        Self::from_symptoms(all.iter())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[Symptom] {
        &self.names
    }

    pub fn index_of(&self, s: &Symptom) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Number of `u64` words per row.
    pub fn words(&self) -> usize {
        self.names.len().div_ceil(64).max(1)
    }

    pub fn profile(&self, set: &SymptomSet) -> Result<Profile> {
        let mut words = vec![0u64; self.words()];
        for s in set {
            let i = self
                .index_of(s)
                .ok_or_else(|| Error::UnknownSymptom(s.to_string()))?;
            words[i / 64] |= 1 << (i % 64);
        }
        Ok(Profile::from_words(words, self.len()))
    }

    /// Symptoms of a row in column order.
    pub fn set_of(&self, row: &[u64]) -> SymptomSet {
        iter_bits(row).map(|i| self.names[i].clone()).collect()
    }

    fn covers(&self, set: &SymptomSet) -> Result<()> {
        match set.iter().find(|s| !self.index.contains_key(*s)) {
            Some(s) => Err(Error::UnknownSymptom(s.to_string())),
            None => Ok(()),
        }
    }
}

fn iter_bits(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(w, &word)| {
        let mut rest = word;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + b)
            }
        })
    })
}

/// One binary symptom vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Profile {
    words: Vec<u64>,
    width: usize,
    ones: u32,
}

impl Profile {
    pub fn from_words(words: Vec<u64>, width: usize) -> Self {
        let ones = words.iter().map(|w| w.count_ones()).sum();
        Profile { words, width, ones }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ones(&self) -> u32 {
        self.ones
    }

    pub fn contains(&self, column: usize) -> bool {
        column < self.width && self.words[column / 64] >> (column % 64) & 1 == 1
    }

    /// Popcount of the intersection. Profiles must share a table.
    pub fn intersection_count(&self, other: &Profile) -> Result<u32> {
        if self.width != other.width {
            return Err(Error::TableMismatch {
                left: self.width,
                right: other.width,
            });
        }
        Ok(and_count(&self.words, &other.words))
    }
}

#[inline]
pub(crate) fn and_count(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

/// Graded-lexicographic order over column indices: fewer symptoms first,
/// then the row holding the lowest differing column first.
pub fn row_cmp(a: &[u64], b: &[u64]) -> Ordering {
    let pa: u32 = a.iter().map(|w| w.count_ones()).sum();
    let pb: u32 = b.iter().map(|w| w.count_ones()).sum();
    pa.cmp(&pb).then_with(|| {
        for (x, y) in a.iter().zip(b) {
            let d = x ^ y;
            if d != 0 {
                return if x & d & d.wrapping_neg() != 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                };
            }
        }
        Ordering::Equal
    })
}

/// Duplicate-free rows over one symbol table, sorted by [`row_cmp`].
#[derive(Debug, Clone)]
pub struct ProfileMatrix {
    table: Arc<SymbolTable>,
    stride: usize,
    data: Vec<u64>,
    ones: Vec<u32>,
    name: String,
    reduced: bool,
}

impl ProfileMatrix {
    /// Sorts and deduplicates `data`, a flat buffer of rows `table.words()` wide.
    pub fn from_flat(table: Arc<SymbolTable>, name: impl Into<String>, data: Vec<u64>) -> Self {
        let stride = table.words();
        let mut rows: Vec<&[u64]> = data.chunks_exact(stride).collect();
        rows.par_sort_unstable_by(|a, b| row_cmp(a, b));
        rows.dedup();
        let sorted: Vec<u64> = rows.concat();
        let ones = sorted
            .chunks_exact(stride)
            .map(|r| r.iter().map(|w| w.count_ones()).sum())
            .collect();
        ProfileMatrix {
            table,
            stride,
            data: sorted,
            ones,
            name: name.into(),
            reduced: false,
        }
    }

    pub fn from_sets(
        table: Arc<SymbolTable>,
        name: impl Into<String>,
        sets: &[SymptomSet],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(sets.len() * table.words());
        for s in sets {
            data.extend_from_slice(table.profile(s)?.words());
        }
        Ok(Self::from_flat(table, name, data))
    }

    pub fn with_reduced(mut self, reduced: bool) -> Self {
        self.reduced = reduced;
        self
    }

    pub fn table(&self) -> &Arc<SymbolTable> {
        &self.table
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn len(&self) -> usize {
        self.ones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ones.is_empty()
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn ones(&self, i: usize) -> u32 {
        self.ones[i]
    }

    pub(crate) fn ones_slice(&self) -> &[u32] {
        &self.ones
    }

    pub(crate) fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn profile(&self, i: usize) -> Profile {
        Profile {
            words: self.row(i).to_vec(),
            width: self.table.len(),
            ones: self.ones[i],
        }
    }

    pub fn row_set(&self, i: usize) -> SymptomSet {
        self.table.set_of(self.row(i))
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.data.chunks_exact(self.stride)
    }

    /// Bitwise OR of all rows.
    pub fn or_fold(&self) -> Vec<u64> {
        let mut acc = vec![0u64; self.stride];
        for r in self.rows() {
            acc.iter_mut().zip(r).for_each(|(a, w)| *a |= w);
        }
        acc
    }

    /// Writes the header and 0/1 rows as CSV with LF line endings.
    pub fn write_csv(&self, sink: &mut dyn Write) -> Result<usize> {
        write_header(&self.table, sink)?;
        for r in self.rows() {
            write_row(r, self.table.len(), sink)?;
        }
        Ok(self.len())
    }

    /// Writes the rows prefixed by a label column, without a header.
    pub fn write_labeled_rows(&self, label: &str, sink: &mut dyn Write) -> Result<usize> {
        let label = csv_field(label);
        for r in self.rows() {
            write!(sink, "{label},")?;
            write_row(r, self.table.len(), sink)?;
        }
        Ok(self.len())
    }
}

/// Quotes a CSV field when it contains a delimiter, quote or line break.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header for labeled output: a `disorder` column, then the symptoms.
pub fn write_labeled_header(table: &SymbolTable, sink: &mut dyn Write) -> Result<()> {
    write!(sink, "disorder,")?;
    write_header(table, sink)
}

/// One labeled row, e.g. a maximum profile.
pub fn write_labeled_profile(
    label: &str,
    profile: &Profile,
    table: &SymbolTable,
    sink: &mut dyn Write,
) -> Result<()> {
    write!(sink, "{},", csv_field(label))?;
    write_row(profile.words(), table.len(), sink)
}

fn write_header(table: &SymbolTable, sink: &mut dyn Write) -> Result<()> {
    let header: Vec<&str> = table.names().iter().map(Symptom::as_str).collect();
    writeln!(sink, "{}", header.join(","))?;
    Ok(())
}

fn write_row(row: &[u64], width: usize, sink: &mut dyn Write) -> Result<()> {
    let mut line = String::with_capacity(width * 2);
    for i in 0..width {
        if i > 0 {
            line.push(',');
        }
        line.push(if row[i / 64] >> (i % 64) & 1 == 1 { '1' } else { '0' });
    }
    line.push('\n');
    sink.write_all(line.as_bytes())?;
    Ok(())
}

/// Writes the maximum profile as a one-row CSV.
pub fn write_mp_csv(profile: &Profile, table: &SymbolTable, sink: &mut dyn Write) -> Result<()> {
    write_header(table, sink)?;
    write_row(profile.words(), table.len(), sink)
}

/// Per-criterion combinations of a disorder, mapped onto a symbol table.
///
/// Rows are addressed by an odometer index: the first criterion is the most
/// significant digit and each criterion's combinations are in canonical order.
#[derive(Debug, Clone)]
pub struct ProfileSpace {
    table: Arc<SymbolTable>,
    stride: usize,
    parts: Vec<Vec<u64>>,
    radix: Vec<usize>,
    disjoint: bool,
    name: String,
}

impl ProfileSpace {
    pub fn new(d: &DisorderSpec, table: Arc<SymbolTable>, limits: &Limits) -> Result<Self> {
        table.covers(&d.domain())?;
        let stride = table.words();
        let mut parts = Vec::new();
        let mut radix = Vec::new();
        for g in d.generators() {
            let compiled = CompiledGenerator::new(g)?;
            let global: Vec<usize> = compiled
                .symbols()
                .iter()
                .map(|s| table.index_of(s).expect("covered above"))
                .collect();
            let mut rows: Vec<Vec<u64>> = compiled
                .combinations(limits)?
                .into_iter()
                .map(|m| {
                    let mut row = vec![0u64; stride];
                    for (bit, &col) in global.iter().enumerate() {
                        if m >> bit & 1 == 1 {
                            row[col / 64] |= 1 << (col % 64);
                        }
                    }
                    row
                })
                .collect();
            rows.sort_by(|a, b| row_cmp(a, b));
            radix.push(rows.len());
            parts.push(rows.concat());
        }
        Ok(ProfileSpace {
            table,
            stride,
            parts,
            radix,
            disjoint: d.disjoint_criteria(),
            name: d.name().to_string(),
        })
    }

    pub fn table(&self) -> &Arc<SymbolTable> {
        &self.table
    }

    /// Number of odometer positions; saturates at `u128::MAX`.
    pub fn tuple_count(&self) -> u128 {
        self.radix
            .iter()
            .fold(1u128, |acc, &r| acc.saturating_mul(r as u128))
    }

    /// Calls `f` with each row in odometer positions `start..end`.
    pub fn for_each_in(&self, start: u128, end: u128, f: &mut dyn FnMut(&[u64])) {
        let end = end.min(self.tuple_count());
        if start >= end {
            return;
        }
        let n = self.radix.len();
        let mut digits = vec![0usize; n];
        let mut rest = start;
        for i in (0..n).rev() {
            digits[i] = (rest % self.radix[i] as u128) as usize;
            rest /= self.radix[i] as u128;
        }
        let mut row = vec![0u64; self.stride];
        for _ in start..end {
            row.iter_mut().for_each(|w| *w = 0);
            for (i, &d) in digits.iter().enumerate() {
                let part = &self.parts[i][d * self.stride..(d + 1) * self.stride];
                row.iter_mut().zip(part).for_each(|(w, p)| *w |= p);
            }
            f(&row);
            for i in (0..n).rev() {
                digits[i] += 1;
                if digits[i] < self.radix[i] {
                    break;
                }
                digits[i] = 0;
            }
        }
    }

    /// Streams every row once, in odometer order. Overlapping criteria can
    /// repeat rows here; [`ProfileSpace::materialize`] deduplicates.
    pub fn iter(&self) -> impl Iterator<Item = Profile> + '_ {
        let total = self.tuple_count();
        let width = self.table.len();
        let chunk = 1u128 << 12;
        (0..total.div_ceil(chunk)).flat_map(move |c| {
            let mut buf = Vec::new();
            self.for_each_in(c * chunk, (c + 1) * chunk, &mut |r| {
                buf.push(Profile::from_words(r.to_vec(), width))
            });
            buf
        })
    }

    /// Builds the sorted, duplicate-free matrix.
    pub fn materialize(&self, limits: &Limits) -> Result<ProfileMatrix> {
        let total = self.tuple_count();
        if total > limits.rows as u128 {
            return Err(if self.disjoint {
                Error::CapExceeded {
                    what: format!("profile matrix of {}", self.name),
                    size: format!("{total} rows"),
                    cap: format!("{} rows", limits.rows),
                }
            } else {
                Error::DedupCapExceeded { cap: limits.rows }
            });
        }
        let chunk = 1u128 << 14;
        let chunks: Vec<Vec<u64>> = (0..total.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut buf = Vec::new();
                self.for_each_in(c * chunk, (c + 1) * chunk, &mut |r| {
                    buf.extend_from_slice(r)
                });
                buf
            })
            .collect();
        let mut data = chunks.concat();
        if !self.disjoint {
            let mut seen = HashSet::new();
            let mut unique = Vec::with_capacity(data.len());
            for r in data.chunks_exact(self.stride) {
                if seen.insert(r) {
                    unique.extend_from_slice(r);
                }
            }
            data = unique;
        }
        Ok(ProfileMatrix::from_flat(self.table.clone(), &self.name, data))
    }
}

/// Every profile of `d` as a sorted matrix over `table`.
pub fn enumerate_matrix(
    d: &DisorderSpec,
    table: Arc<SymbolTable>,
    limits: &Limits,
) -> Result<ProfileMatrix> {
    ProfileSpace::new(d, table, limits)?.materialize(limits)
}

/// Exact profile count as the product of per-criterion counts.
pub fn count_profiles(d: &DisorderSpec, limits: &Limits) -> Result<BigUint> {
    if !d.disjoint_criteria() {
        return Err(Error::OverlappingCriteria {
            disorder: d.name().to_string(),
            shared: d
                .overlapping_symptoms()
                .iter()
                .map(|s| s.to_string())
                .collect(),
        });
    }
    d.generators().try_fold(BigUint::one(), |acc, g| {
        Ok(acc * count_generator(g, limits)?)
    })
}

/// The maximum profile: every symptom of the disorder's domain.
pub fn max_profile(d: &DisorderSpec, table: &SymbolTable) -> Result<Profile> {
    table.profile(&d.domain())
}

/// Symptoms present in every profile: the union of per-criterion necessary symptoms.
pub fn necessary_profile(d: &DisorderSpec) -> Result<SymptomSet> {
    let mut out = SymptomSet::new();
    for g in d.generators() {
        out.extend(necessary_symptoms(g)?.iter().cloned());
    }
    Ok(out)
}

/// Membership test: `p` lies in the domain and, for every criterion, its
/// restriction to that criterion's domain is one of the criterion's combinations.
///
/// Exact when criteria are disjoint.
pub fn is_profile(d: &DisorderSpec, p: &SymptomSet) -> Result<bool> {
    if !p.is_subset(&d.domain()) {
        return Ok(false);
    }
    for g in d.generators() {
        let c = CompiledGenerator::new(g)?;
        let local = c
            .mask_of(&p.intersection(&g.domain()))
            .expect("restricted to the domain");
        if !c.accepts(local) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Writes the full profile matrix of `d` as CSV. Nothing is written if
/// enumeration fails.
pub fn export_matrix(
    d: &DisorderSpec,
    table: Arc<SymbolTable>,
    sink: &mut dyn Write,
    limits: &Limits,
) -> Result<usize> {
    enumerate_matrix(d, table, limits)?.write_csv(sink)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::Generator;

    fn set(names: &[&str]) -> SymptomSet {
        SymptomSet::from_names(names).unwrap()
    }

    fn flu() -> DisorderSpec {
        DisorderSpec::from_generators(
            "flu",
            vec![
                Generator::Fixed(set(&["Cough", "Runny_Nose", "Hoarse", "Headache", "Fatigue"])),
                Generator::SetCount {
                    sets: vec![set(&["Fever"]), set(&["Chills"]), set(&["Nausea"])],
                    k: 2,
                },
            ],
        )
        .unwrap()
    }

    fn cold() -> DisorderSpec {
        DisorderSpec::from_generators(
            "cold",
            vec![
                Generator::Fixed(set(&["Cough", "Runny_Nose", "Hoarse"])),
                Generator::AtLeast {
                    set: set(&["Headache", "Fatigue"]),
                    k: 1,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn intern_uses_first_seen_order() {
        let (f, c) = (flu(), cold());
        let t = SymbolTable::intern(&[&f, &c]);
        let names: Vec<&str> = t.names().iter().map(Symptom::as_str).collect();
        assert_eq!(
            names,
            ["Cough", "Runny_Nose", "Hoarse", "Headache", "Fatigue", "Fever", "Chills", "Nausea"]
        );
        assert_eq!(SymbolTable::intern(&[&c]).len(), 5);
    }

    #[test]
    fn flu_and_cold_rows() {
        let (f, c) = (flu(), cold());
        let t = Arc::new(SymbolTable::intern(&[&f, &c]));
        let lim = Limits::default();
        let fm = enumerate_matrix(&f, t.clone(), &lim).unwrap();
        let cm = enumerate_matrix(&c, t.clone(), &lim).unwrap();
        assert_eq!(fm.len(), 4);
        assert_eq!(cm.len(), 3);
        assert_eq!(count_profiles(&f, &lim).unwrap(), BigUint::from(4u32));
        let mp = max_profile(&f, &t).unwrap();
        assert_eq!(fm.or_fold(), mp.words());
        assert_eq!(mp.ones(), 8);
        assert_eq!(max_profile(&c, &t).unwrap().ones(), 5);
    }

    #[test]
    fn row_order_is_graded_lex_on_columns() {
        let mut v: Vec<[u64; 1]> = vec![[0b110], [0b011], [0b1], [0b101]];
        v.sort_by(|a, b| row_cmp(a, b));
        assert_eq!(v, vec![[0b1], [0b011], [0b101], [0b110]]);
        // multiword rows compare the low word first
        assert_eq!(row_cmp(&[1, 0], &[0, 1]), Ordering::Less);
    }

    #[test]
    fn csv_layout() {
        let c = cold();
        let t = Arc::new(SymbolTable::intern(&[&c]));
        let mut out = Vec::new();
        let n = export_matrix(&c, t, &mut out, &Limits::default()).unwrap();
        assert_eq!(n, 3);
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "Cough,Runny_Nose,Hoarse,Headache,Fatigue\n1,1,1,1,0\n1,1,1,0,1\n1,1,1,1,1\n"
        );
    }

    #[test]
    fn overlapping_criteria_deduplicate() {
        let d = DisorderSpec::from_generators(
            "o",
            vec![
                Generator::AtLeast {
                    set: set(&["a", "b"]),
                    k: 1,
                },
                Generator::AtLeast {
                    set: set(&["b", "c"]),
                    k: 1,
                },
            ],
        )
        .unwrap();
        let t = Arc::new(SymbolTable::intern(&[&d]));
        let lim = Limits::default();
        let space = ProfileSpace::new(&d, t, &lim).unwrap();
        assert_eq!(space.tuple_count(), 9);
        let m = space.materialize(&lim).unwrap();
        // {b} alone, {a,b}, {b,c}, {a,c}, {a,b,c}
        assert_eq!(m.len(), 5);
        assert!(matches!(
            count_profiles(&d, &lim),
            Err(Error::OverlappingCriteria { .. })
        ));
        let tight = Limits {
            rows: 4,
            ..Limits::default()
        };
        assert!(matches!(
            space.materialize(&tight),
            Err(Error::DedupCapExceeded { .. })
        ));
    }

    #[test]
    fn stream_matches_matrix_and_chunking() {
        let f = flu();
        let t = Arc::new(SymbolTable::intern(&[&f]));
        let lim = Limits::default();
        let space = ProfileSpace::new(&f, t, &lim).unwrap();
        let streamed: Vec<Profile> = space.iter().collect();
        let mut piecewise = Vec::new();
        for i in 0..space.tuple_count() {
            space.for_each_in(i, i + 1, &mut |r| piecewise.push(r.to_vec()));
        }
        assert_eq!(
            streamed.iter().map(|p| p.words().to_vec()).collect::<Vec<_>>(),
            piecewise
        );
        let m = space.materialize(&lim).unwrap();
        let mut sorted: Vec<Vec<u64>> = piecewise.clone();
        sorted.sort_by(|a, b| row_cmp(a, b));
        assert_eq!(sorted, m.rows().map(<[u64]>::to_vec).collect::<Vec<_>>());
    }

    #[test]
    fn membership_and_necessary() {
        let f = flu();
        let base = set(&["Cough", "Runny_Nose", "Hoarse", "Headache", "Fatigue"]);
        assert!(is_profile(&f, &base.union(&set(&["Fever", "Nausea"]))).unwrap());
        assert!(!is_profile(&f, &base.union(&set(&["Fever"]))).unwrap());
        assert!(!is_profile(&f, &base.union(&set(&["Fever", "Nausea", "X"]))).unwrap());
        assert_eq!(necessary_profile(&f).unwrap(), base);
    }

    #[test]
    fn cross_table_is_an_error() {
        let a = Profile::from_words(vec![1], 3);
        let b = Profile::from_words(vec![1], 4);
        assert!(matches!(
            a.intersection_count(&b),
            Err(Error::TableMismatch { .. })
        ));
    }

    #[test]
    fn unknown_symptom() {
        let t = SymbolTable::intern(&[&cold()]);
        assert!(matches!(
            t.profile(&set(&["Fever"])),
            Err(Error::UnknownSymptom(_))
        ));
    }
}
