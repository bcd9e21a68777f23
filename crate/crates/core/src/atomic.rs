//! Transaction-level analysis: evaluation, the atomic preorder and
//! equivalence over finite state universes, and normal forms.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::log::{log_effect_eq, Action, EffectComparison, Log};
use crate::multiset::Multiset;
use crate::name::Name;
use crate::reduce::step_ongoing;
use crate::syntax::{AtomicExpr, OngoingExpr};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "outcome", content = "log", rename_all = "camelCase")]
pub enum Outcome {
    Committed(Log),
    Aborted,
}

impl Outcome {
    pub fn is_committed(&self) -> bool {
        matches!(self, Outcome::Committed(_))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Committed(l) => write!(f, "commit({l})"),
            Outcome::Aborted => f.write_str("abort"),
        }
    }
}

/// Runs `[m]_{σ;ε}` to completion, always preferring the left component of
/// an `orElse` until it is terminal.
pub fn eval_atomic(m: &AtomicExpr, state: &Multiset) -> Outcome {
    let mut cur = OngoingExpr::start(Arc::new(m.clone()), state.clone());
    loop {
        if let OngoingExpr::Running { expr, log, .. } = &cur {
            match **expr {
                AtomicExpr::End => return Outcome::Committed(log.clone()),
                AtomicExpr::Retry => return Outcome::Aborted,
                _ => {}
            }
        }
        cur = step_ongoing(&cur)
            .into_iter()
            .find(|(d, _)| !d.is_right())
            .map(|(_, a)| a)
            .expect("non-terminal transaction always has a left-first step");
    }
}

/// All multisets over `names` with every count at most `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateUniverse {
    pub names: Vec<Name>,
    pub k: u32,
}

impl StateUniverse {
    pub fn new(names: impl IntoIterator<Item = Name>, k: u32) -> Self {
        let set: BTreeSet<Name> = names.into_iter().collect();
        Self {
            names: set.into_iter().collect(),
            k,
        }
    }

    /// Names of the expressions, `k` = the largest number of reads of one name.
    pub fn automatic(exprs: &[&AtomicExpr]) -> Self {
        let names = exprs.iter().flat_map(|m| m.names());
        let k = exprs
            .iter()
            .map(|m| m.read_occurrences().max_count())
            .max()
            .unwrap_or(0);
        Self::new(names, k)
    }

    pub fn size(&self) -> u64 {
        (self.k as u64 + 1).saturating_pow(self.names.len() as u32)
    }

    pub fn contains(&self, s: &Multiset) -> bool {
        s.iter()
            .all(|(n, c)| c <= self.k && self.names.binary_search(n).is_ok())
    }

    /// Deterministic odometer order, last name varying fastest.
    pub fn states(&self) -> impl Iterator<Item = Multiset> + '_ {
        let n = self.names.len();
        let mut digits = vec![0u32; n];
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let mut m = Multiset::new();
            for (i, &d) in digits.iter().enumerate() {
                m.insert_n(self.names[i].clone(), d);
            }
            let mut i = n;
            loop {
                if i == 0 {
                    done = true;
                    break;
                }
                i -= 1;
                if digits[i] < self.k {
                    digits[i] += 1;
                    break;
                }
                digits[i] = 0;
            }
            Some(m)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<Multiset>,
    pub universe: StateUniverse,
}

impl Verdict {
    pub fn to_json(&self, key: &str) -> Value {
        json!({
            key: self.holds,
            "witnessState": self.witness,
            "universe": {"names": self.universe.names, "k": self.universe.k},
        })
    }
}

/// `m ⊒ n`: on every state of `u`, `n` aborts or both commit.
pub fn atomic_preorder(m: &AtomicExpr, n: &AtomicExpr, u: &StateUniverse) -> Verdict {
    for s in u.states() {
        if eval_atomic(n, &s).is_committed() && !eval_atomic(m, &s).is_committed() {
            return Verdict {
                holds: false,
                witness: Some(s),
                universe: u.clone(),
            };
        }
    }
    Verdict {
        holds: true,
        witness: None,
        universe: u.clone(),
    }
}

/// Agreement of two outcomes on one state.
pub fn outcomes_agree(a: &Outcome, b: &Outcome, s: &Multiset) -> bool {
    match (a, b) {
        (Outcome::Aborted, Outcome::Aborted) => true,
        (Outcome::Committed(x), Outcome::Committed(y)) => {
            matches!(log_effect_eq(x, y, s), EffectComparison::Equal)
        }
        _ => false,
    }
}

/// `m ≈ n` over `u`; the first disagreeing state is the witness.
pub fn atomic_equiv(m: &AtomicExpr, n: &AtomicExpr, u: &StateUniverse) -> Verdict {
    for s in u.states() {
        if !outcomes_agree(&eval_atomic(m, &s), &eval_atomic(n, &s), &s) {
            return Verdict {
                holds: false,
                witness: Some(s),
                universe: u.clone(),
            };
        }
    }
    Verdict {
        holds: true,
        witness: None,
        universe: u.clone(),
    }
}

pub fn atomic_equiv_auto(m: &AtomicExpr, n: &AtomicExpr) -> Verdict {
    atomic_equiv(m, n, &StateUniverse::automatic(&[m, n]))
}

// ---------------------------------------------------------------------------
// normal forms

/// Operands of the top-level `orElse` spine, left to right, any association.
pub fn top_branches(m: &AtomicExpr) -> Vec<&AtomicExpr> {
    match m {
        AtomicExpr::OrElse { left, right } => {
            let mut v = top_branches(left);
            v.extend(top_branches(right));
            v
        }
        _ => vec![m],
    }
}

/// Actions of a prefix chain ending in `end`; `None` for anything else.
pub fn chain_actions(m: &AtomicExpr) -> Option<Vec<Action>> {
    let mut v = Vec::new();
    let mut cur = m;
    loop {
        match cur {
            AtomicExpr::End => return Some(v),
            AtomicExpr::Prefix { action, rest } => {
                v.push(action.clone());
                cur = rest;
            }
            _ => return None,
        }
    }
}

fn reads_of(chain: &[Action]) -> Multiset {
    chain
        .iter()
        .filter(|a| a.is_read())
        .map(|a| a.channel.clone())
        .collect()
}

pub fn is_normal_form(m: &AtomicExpr) -> bool {
    if *m == AtomicExpr::Retry {
        return true;
    }
    let mut reads = Vec::new();
    for b in top_branches(m) {
        match chain_actions(b) {
            Some(c) => reads.push(reads_of(&c)),
            None => return false,
        }
    }
    (0..reads.len()).all(|j| (0..j).all(|i| !reads[i].is_subset(&reads[j])))
}

fn nf_chains(m: &AtomicExpr) -> Vec<Vec<Action>> {
    match m {
        AtomicExpr::End => vec![vec![]],
        AtomicExpr::Retry => vec![],
        AtomicExpr::Prefix { action, rest } => nf_chains(rest)
            .into_iter()
            .map(|mut c| {
                c.insert(0, action.clone());
                c
            })
            .collect(),
        AtomicExpr::OrElse { left, right } => {
            let mut l = nf_chains(left);
            let lreads: Vec<Multiset> = l.iter().map(|c| reads_of(c)).collect();
            for c in nf_chains(right) {
                let rc = reads_of(&c);
                if !lreads.iter().any(|r| r.is_subset(&rc)) {
                    l.push(c);
                }
            }
            l
        }
    }
}

pub fn chain_expr(actions: &[Action]) -> AtomicExpr {
    actions
        .iter()
        .rev()
        .fold(AtomicExpr::End, |acc, a| AtomicExpr::prefix(a.clone(), acc))
}

/// Structural normalisation: distributes prefixes over `orElse`, flattens,
/// erases `retry`, and drops branches whose reads include an earlier
/// branch's reads. The result is right-nested.
pub fn normalize(m: &AtomicExpr) -> AtomicExpr {
    AtomicExpr::or_else_all(nf_chains(m).iter().map(|c| chain_expr(c)).collect())
}
