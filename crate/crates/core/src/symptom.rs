//! Symptom names and order-insensitive symptom sets.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};

/// A validated symptom name.
///
/// Names are case-sensitive and restricted to ASCII letters, digits and `_`,
/// so they never need quoting in CSV or in the generator notation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symptom(Arc<str>);

impl Symptom {
    pub fn new(name: &str) -> Result<Self> {
        if is_valid_name(name) {
            Ok(Symptom(Arc::from(name)))
        } else {
            Err(Error::InvalidSymptom(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// True if `name` is nonempty and uses only `[A-Za-z0-9_]`.
pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

impl fmt::Debug for Symptom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&*self.0, f)
    }
}

impl fmt::Display for Symptom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Symptom {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// A finite set of symptoms.
///
/// Equality, hashing and ordering ignore element order. The order in which
/// elements were inserted is remembered anyway: it decides column order when
/// a symbol table is built from a written specification.
///
/// The `Ord` impl is the graded-lexicographic order used for all canonical
/// output: smaller sets first, then lexicographic on the sorted names.
#[derive(Clone, Default)]
pub struct SymptomSet {
    items: Vec<Symptom>,
    sorted: Vec<Symptom>,
}

impl SymptomSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set from validated names, keeping the first occurrence of duplicates.
    pub fn from_names<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = SymptomSet::new();
        for name in names {
            set.insert(Symptom::new(name.as_ref())?);
        }
        Ok(set)
    }

    /// Inserts `s`; returns false if it was already present.
    pub fn insert(&mut self, s: Symptom) -> bool {
        match self.sorted.binary_search(&s) {
            Ok(_) => false,
            Err(pos) => {
                self.sorted.insert(pos, s.clone());
                self.items.push(s);
                true
            }
        }
    }

    pub fn contains(&self, s: &Symptom) -> bool {
        self.sorted.binary_search(s).is_ok()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Elements in insertion order.
    pub fn iter(&self) -> std::slice::Iter<'_, Symptom> {
        self.items.iter()
    }

    /// Elements in lexicographic order.
    pub fn sorted(&self) -> &[Symptom] {
        &self.sorted
    }

    pub fn is_subset(&self, other: &SymptomSet) -> bool {
        self.len() <= other.len() && self.sorted.iter().all(|s| other.contains(s))
    }

    pub fn is_disjoint(&self, other: &SymptomSet) -> bool {
        self.sorted.iter().all(|s| !other.contains(s))
    }

    /// Union keeping `self`'s order followed by new elements of `other`.
    pub fn union(&self, other: &SymptomSet) -> SymptomSet {
        let mut out = self.clone();
        out.extend(other.iter().cloned());
        out
    }

    pub fn intersection(&self, other: &SymptomSet) -> SymptomSet {
        self.iter().filter(|s| other.contains(s)).cloned().collect()
    }

    pub fn difference(&self, other: &SymptomSet) -> SymptomSet {
        self.iter().filter(|s| !other.contains(s)).cloned().collect()
    }

    /// Names in lexicographic order, for serialization.
    pub fn sorted_names(&self) -> Vec<String> {
        self.sorted.iter().map(|s| s.as_str().to_string()).collect()
    }
}

impl PartialEq for SymptomSet {
    fn eq(&self, other: &Self) -> bool {
        self.sorted == other.sorted
    }
}

impl Eq for SymptomSet {}

impl Hash for SymptomSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.sorted.hash(state);
    }
}

impl Ord for SymptomSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.sorted.cmp(&other.sorted))
    }
}

impl PartialOrd for SymptomSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Extend<Symptom> for SymptomSet {
    fn extend<T: IntoIterator<Item = Symptom>>(&mut self, iter: T) {
        for s in iter {
            self.insert(s);
        }
    }
}

impl FromIterator<Symptom> for SymptomSet {
    fn from_iter<T: IntoIterator<Item = Symptom>>(iter: T) -> Self {
        let mut set = SymptomSet::new();
        set.extend(iter);
        set
    }
}

impl<'a> IntoIterator for &'a SymptomSet {
    type Item = &'a Symptom;
    type IntoIter = std::slice::Iter<'a, Symptom>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

impl fmt::Debug for SymptomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.items.iter()).finish()
    }
}

/// Written order, e.g. `{d, e, a}`.
impl fmt::Display for SymptomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(s.as_str())?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> SymptomSet {
        SymptomSet::from_names(names).unwrap()
    }

    #[test]
    fn names_are_validated() {
        assert!(Symptom::new("low_self_esteem").is_ok());
        assert!(Symptom::new("Runny_Nose2").is_ok());
        assert!(Symptom::new("").is_err());
        assert!(Symptom::new("runny nose").is_err());
        assert!(Symptom::new("a,b").is_err());
        assert!(Symptom::new("{a}").is_err());
    }

    #[test]
    fn equality_ignores_order_but_display_keeps_it() {
        let a = set(&["d", "e", "a"]);
        let b = set(&["a", "d", "e"]);
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "{d, e, a}");
        assert_eq!(b.to_string(), "{a, d, e}");
    }

    #[test]
    fn duplicates_collapse() {
        let a = set(&["a", "b", "a"]);
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn graded_lexicographic_order() {
        let mut v = vec![set(&["b", "c"]), set(&["a", "b", "c"]), set(&["c"]), set(&["a", "c"])];
        v.sort();
        assert_eq!(
            v,
            vec![set(&["c"]), set(&["a", "c"]), set(&["b", "c"]), set(&["a", "b", "c"])]
        );
    }

    #[test]
    fn set_operations() {
        let a = set(&["a", "b", "c"]);
        let b = set(&["b", "c", "d"]);
        assert_eq!(a.intersection(&b), set(&["b", "c"]));
        assert_eq!(a.difference(&b), set(&["a"]));
        assert_eq!(a.union(&b), set(&["a", "b", "c", "d"]));
        assert!(set(&["b"]).is_subset(&a));
        assert!(!a.is_disjoint(&b));
        assert!(set(&["x"]).is_disjoint(&a));
    }
}
