//! Canonical representatives used to identify explored states.

use std::sync::Arc;

use crate::multiset::Multiset;
use crate::syntax::{ChoiceBranch, OngoingExpr, Process};

/// Flattens and sorts parallel compositions, drops `0` components, moves
/// components that do not mention a hidden name out of its scope (dropping
/// the scope when nothing is left in it), and trims the state captured by an
/// ongoing transaction to what its reads can observe: names it reads, counts
/// capped at the number of read occurrences. None of this changes the behaviour of a term.
pub fn canonical(p: &Process) -> Process {
    match p {
        Process::Nil | Process::Output { .. } | Process::Atomic { .. } => p.clone(),
        Process::Input { channel, body } => Process::Input {
            channel: channel.clone(),
            body: Arc::new(canonical(body)),
        },
        Process::Repl { channel, body, fired } => Process::Repl {
            channel: channel.clone(),
            body: Arc::new(canonical(body)),
            fired: *fired,
        },
        Process::Par { parts } => {
            let mut flat = Vec::with_capacity(parts.len());
            for q in parts {
                match canonical(q) {
                    Process::Nil => {}
                    Process::Par { parts } => flat.extend(parts),
                    other => flat.push(other),
                }
            }
            flat.sort();
            Process::par(flat)
        }
        Process::Hide { body, name, pending } => {
            let b = canonical(body);
            let parts = match b {
                Process::Par { parts } => parts,
                other => vec![other],
            };
            let (inside, mut outside): (Vec<_>, Vec<_>) =
                parts.into_iter().partition(|q| q.free_names().contains(name));
            if !inside.is_empty() {
                outside.push(Process::Hide {
                    body: Arc::new(Process::par(inside)),
                    name: name.clone(),
                    pending: *pending,
                });
            }
            outside.sort();
            Process::par(outside)
        }
        Process::Ongoing { body, original } => {
            let caps = original.read_occurrences();
            Process::Ongoing {
                body: Arc::new(trim_ongoing(body, &caps)),
                original: original.clone(),
            }
        }
        Process::Choice { branches } => Process::Choice {
            branches: branches
                .iter()
                .map(|b| ChoiceBranch {
                    polarity: b.polarity,
                    channel: b.channel.clone(),
                    body: Arc::new(canonical(&b.body)),
                })
                .collect(),
        },
    }
}

pub(crate) fn trim_state(init: &Multiset, caps: &Multiset) -> Multiset {
    let mut m = Multiset::new();
    for (n, c) in caps.iter() {
        m.insert_n(n.clone(), init.count(n).min(c));
    }
    m
}

fn trim_ongoing(a: &OngoingExpr, caps: &Multiset) -> OngoingExpr {
    match a {
        OngoingExpr::Running { expr, init, log } => OngoingExpr::Running {
            expr: expr.clone(),
            init: trim_state(init, caps),
            log: log.clone(),
        },
        OngoingExpr::OrElse { left, right } => OngoingExpr::OrElse {
            left: Arc::new(trim_ongoing(left, caps)),
            right: Arc::new(trim_ongoing(right, caps)),
        },
    }
}

/// The term with every replication counter reset, in canonical form. The
/// counters only serve to bound exploration, so a term and its erasure
/// behave alike.
pub fn erase_repl_counters(p: &Process) -> Process {
    fn go(p: &Process) -> Process {
        match p {
            Process::Repl { channel, body, .. } => Process::Repl {
                channel: channel.clone(),
                body: Arc::new(go(body)),
                fired: 0,
            },
            Process::Input { channel, body } => Process::Input {
                channel: channel.clone(),
                body: Arc::new(go(body)),
            },
            Process::Hide { body, name, pending } => Process::Hide {
                body: Arc::new(go(body)),
                name: name.clone(),
                pending: *pending,
            },
            Process::Par { parts } => Process::Par {
                parts: parts.iter().map(go).collect(),
            },
            Process::Choice { branches } => Process::Choice {
                branches: branches
                    .iter()
                    .map(|b| ChoiceBranch {
                        polarity: b.polarity,
                        channel: b.channel.clone(),
                        body: Arc::new(go(&b.body)),
                    })
                    .collect(),
            },
            other => other.clone(),
        }
    }
    if max_repl_fired(p) == 0 {
        return canonical(p);
    }
    canonical(&go(p))
}

/// Largest replication counter anywhere in the term.
pub fn max_repl_fired(p: &Process) -> u32 {
    match p {
        Process::Repl { body, fired, .. } => (*fired).max(max_repl_fired(body)),
        Process::Input { body, .. } | Process::Hide { body, .. } => max_repl_fired(body),
        Process::Par { parts } => parts.iter().map(max_repl_fired).max().unwrap_or(0),
        Process::Choice { branches } => branches.iter().map(|b| max_repl_fired(&b.body)).max().unwrap_or(0),
        _ => 0,
    }
}

/// Largest pending count of any hidden name.
pub fn max_hidden_pending(p: &Process) -> u32 {
    match p {
        Process::Hide { body, pending, .. } => (*pending).max(max_hidden_pending(body)),
        Process::Input { body, .. } | Process::Repl { body, .. } => max_hidden_pending(body),
        Process::Par { parts } => parts.iter().map(max_hidden_pending).max().unwrap_or(0),
        Process::Choice { branches } => branches.iter().map(|b| max_hidden_pending(&b.body)).max().unwrap_or(0),
        _ => 0,
    }
}
