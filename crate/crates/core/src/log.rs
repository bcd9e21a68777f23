//! Actions, transaction logs and their effect on the global state.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::TermError;
use crate::multiset::Multiset;
use crate::name::Name;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Read,
    Write,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Action {
    pub kind: ActionKind,
    pub channel: Name,
}

impl Action {
    pub fn read(channel: Name) -> Self {
        Self {
            kind: ActionKind::Read,
            channel,
        }
    }

    pub fn write(channel: Name) -> Self {
        Self {
            kind: ActionKind::Write,
            channel,
        }
    }

    pub fn is_read(&self) -> bool {
        self.kind == ActionKind::Read
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ActionKind::Read => write!(f, "rd {}", self.channel),
            ActionKind::Write => write!(f, "wr {}", self.channel),
        }
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Log(pub Vec<Action>);

impl Log {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&self, a: Action) -> Self {
        let mut v = self.0.clone();
        v.push(a);
        Log(v)
    }

    pub fn read_set(&self) -> Multiset {
        self.0
            .iter()
            .filter(|a| a.is_read())
            .map(|a| a.channel.clone())
            .collect()
    }

    pub fn write_set(&self) -> Multiset {
        self.0
            .iter()
            .filter(|a| !a.is_read())
            .map(|a| a.channel.clone())
            .collect()
    }
}

impl fmt::Display for Log {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("eps");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Log {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `σ \ readSet(δ) ⊎ writeSet(δ)`, defined only when the reads are available.
pub fn apply_effect(state: &Multiset, log: &Log) -> Result<Multiset, TermError> {
    let read = log.read_set();
    if !read.is_subset(state) {
        return Err(TermError::PreconditionViolated {
            read,
            state: state.clone(),
        });
    }
    Ok(state.difference(&read).union(&log.write_set()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EffectComparison {
    Equal,
    Different {
        left: Multiset,
        right: Multiset,
    },
    /// One of the logs cannot be applied; the message names which.
    Inapplicable(String),
}

impl EffectComparison {
    pub fn holds(&self) -> bool {
        matches!(self, EffectComparison::Equal)
    }
}

/// Compares the effect of two logs on `state`, rejecting inapplicable logs
/// instead of treating them as equal.
pub fn log_effect_eq(left: &Log, right: &Log, state: &Multiset) -> EffectComparison {
    let l = apply_effect(state, left);
    let r = apply_effect(state, right);
    match (l, r) {
        (Ok(l), Ok(r)) if l == r => EffectComparison::Equal,
        (Ok(l), Ok(r)) => EffectComparison::Different { left: l, right: r },
        (Err(_), Err(_)) => EffectComparison::Inapplicable("neither log is applicable".into()),
        (Err(_), _) => EffectComparison::Inapplicable("left log is not applicable".into()),
        (_, Err(_)) => EffectComparison::Inapplicable("right log is not applicable".into()),
    }
}
