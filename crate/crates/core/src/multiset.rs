//! Finite multisets of names, used for global states and read/write sets.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::name::Name;

/// A count map with no zero entries, so structural equality is multiset equality.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiset {
    counts: BTreeMap<Name, u32>,
}

impl Multiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(n: Name) -> Self {
        let mut m = Self::new();
        m.insert(n);
        m
    }

    pub fn count(&self, n: &Name) -> u32 {
        self.counts.get(n).copied().unwrap_or(0)
    }

    pub fn contains(&self, n: &Name) -> bool {
        self.counts.contains_key(n)
    }

    pub fn insert(&mut self, n: Name) {
        self.insert_n(n, 1);
    }

    pub fn insert_n(&mut self, n: Name, k: u32) {
        if k > 0 {
            *self.counts.entry(n).or_insert(0) += k;
        }
    }

    /// Removes one occurrence; returns false when absent.
    pub fn remove_one(&mut self, n: &Name) -> bool {
        match self.counts.get_mut(n) {
            Some(c) if *c > 1 => {
                *c -= 1;
                true
            }
            Some(_) => {
                self.counts.remove(n);
                true
            }
            None => false,
        }
    }

    pub fn with(&self, n: Name) -> Self {
        let mut m = self.clone();
        m.insert(n);
        m
    }

    pub fn set_count(&mut self, n: Name, k: u32) {
        if k == 0 {
            self.counts.remove(&n);
        } else {
            self.counts.insert(n, k);
        }
    }

    pub fn without(&self, n: &Name) -> Self {
        let mut m = self.clone();
        m.counts.remove(n);
        m
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total number of elements, counting multiplicity.
    pub fn size(&self) -> u32 {
        self.counts.values().sum()
    }

    pub fn max_count(&self) -> u32 {
        self.counts.values().copied().max().unwrap_or(0)
    }

    pub fn is_subset(&self, other: &Multiset) -> bool {
        self.counts.iter().all(|(n, &c)| other.count(n) >= c)
    }

    /// Multiset sum.
    pub fn union(&self, other: &Multiset) -> Self {
        let mut m = self.clone();
        for (n, &c) in &other.counts {
            m.insert_n(n.clone(), c);
        }
        m
    }

    /// Truncating difference `self \ other`.
    pub fn difference(&self, other: &Multiset) -> Self {
        let mut m = Self::new();
        for (n, &c) in &self.counts {
            let d = c.saturating_sub(other.count(n));
            m.insert_n(n.clone(), d);
        }
        m
    }

    /// Pointwise maximum.
    pub fn join(&self, other: &Multiset) -> Self {
        let mut m = self.clone();
        for (n, &c) in &other.counts {
            if c > m.count(n) {
                m.set_count(n.clone(), c);
            }
        }
        m
    }

    /// Smallest `d` with `self ⊆ other ⊎ d`.
    pub fn missing_from(&self, other: &Multiset) -> Self {
        self.difference(other)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, u32)> + '_ {
        self.counts.iter().map(|(n, &c)| (n, c))
    }

    /// Elements in sorted order, repeated by multiplicity.
    pub fn elements(&self) -> Vec<Name> {
        let mut v = Vec::new();
        for (n, &c) in &self.counts {
            for _ in 0..c {
                v.push(n.clone());
            }
        }
        v
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> + '_ {
        self.counts.keys()
    }

    pub fn retain_names(&self, keep: impl Fn(&Name) -> bool) -> Self {
        Self {
            counts: self
                .counts
                .iter()
                .filter(|(n, _)| keep(n))
                .map(|(n, &c)| (n.clone(), c))
                .collect(),
        }
    }
}

impl FromIterator<Name> for Multiset {
    fn from_iter<I: IntoIterator<Item = Name>>(iter: I) -> Self {
        let mut m = Self::new();
        for n in iter {
            m.insert(n);
        }
        m
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, n) in self.elements().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Multiset {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.counts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Multiset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let mut counts = BTreeMap::<Name, u32>::deserialize(d)?;
        counts.retain(|_, c| *c > 0);
        Ok(Multiset { counts })
    }
}
