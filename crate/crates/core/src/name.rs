//! Channel names and fresh-name supplies.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::TermError;

/// Prefix reserved for machine-generated names. User syntax can never produce it.
pub const FRESH_PREFIX: char = '$';

const KEYWORDS: &[&str] = &["end", "retry", "orElse", "atomic"];

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    /// Validates against `[a-z][a-zA-Z0-9_]*` and rejects keywords.
    pub fn new(s: &str) -> Result<Name, TermError> {
        if is_user_name(s) {
            Ok(Name(Arc::from(s)))
        } else {
            Err(TermError::InvalidName(s.to_string()))
        }
    }

    /// Panicking constructor for literals in code and tests.
    pub fn from_static(s: &str) -> Name {
        Name::new(s).unwrap_or_else(|e| panic!("{e}"))
    }

    pub(crate) fn fresh(stem: &str, index: usize) -> Name {
        Name(Arc::from(format!("{FRESH_PREFIX}{stem}{index}")))
    }

    pub(crate) fn raw(s: &str) -> Name {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_fresh(&self) -> bool {
        self.0.starts_with(FRESH_PREFIX)
    }
}

pub fn is_user_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !KEYWORDS.contains(&s)
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Name {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// Accepts user names and machine-generated `$` names.
impl<'de> Deserialize<'de> for Name {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.strip_prefix(FRESH_PREFIX) {
            Some(rest) if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') => {
                Ok(Name::raw(&s))
            }
            _ => Name::new(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// Hands out `$k1`, `$k2`, `$r1`, ... with one counter per stem. Names
/// already present in a set of terms can be skipped with [`FreshSupply::avoid`].
#[derive(Clone, Debug)]
pub struct FreshSupply {
    start: usize,
    counters: std::collections::BTreeMap<String, usize>,
    taken: std::collections::BTreeSet<Name>,
}

impl Default for FreshSupply {
    fn default() -> Self {
        Self::new()
    }
}

impl FreshSupply {
    pub fn new() -> Self {
        Self::starting_at(1)
    }

    /// Start every counter at `start`; used to provoke clashes deliberately.
    pub fn starting_at(start: usize) -> Self {
        Self {
            start,
            counters: Default::default(),
            taken: Default::default(),
        }
    }

    pub fn avoid<I: IntoIterator<Item = Name>>(&mut self, names: I) {
        self.taken.extend(names.into_iter().filter(Name::is_fresh));
    }

    pub fn next(&mut self, stem: &str) -> Name {
        let counter = self.counters.entry(stem.to_string()).or_insert(self.start);
        loop {
            let n = Name::fresh(stem, *counter);
            *counter += 1;
            if !self.taken.contains(&n) {
                self.taken.insert(n.clone());
                return n;
            }
        }
    }
}
