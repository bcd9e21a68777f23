//! Independent oracles shared by the integration and acceptance tests.
//!
//! Each oracle recomputes a library result along a different route: labelled
//! successors by enumerating concrete states and calling the reduction
//! relation, may-testing by a plain breadth-first search, and transaction
//! outcomes by a direct big-step evaluator or by exhausting every
//! interleaving of the small-step rules.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::sync::Arc;

use atccs::atomic::StateUniverse;
use atccs::lts::{Label, LtsBounds};
use atccs::reduce::canon::{max_hidden_pending, max_repl_fired};
use atccs::reduce::{canonical, step_config, step_ongoing};
use atccs::{Action, AtomicExpr, Log, Multiset, Name, OngoingExpr, Process};

pub fn n(s: &str) -> Name {
    Name::new(s).unwrap()
}

pub fn ns(list: &[&str]) -> Vec<Name> {
    list.iter().map(|s| n(s)).collect()
}

pub fn p(s: &str) -> Process {
    atccs::parse_process(s).unwrap()
}

pub fn m(s: &str) -> AtomicExpr {
    atccs::parse_expr(s).unwrap()
}

pub fn within(q: &Process, b: &LtsBounds) -> bool {
    max_repl_fired(q) <= b.max_repl_unfold && max_hidden_pending(q) <= b.max_multiplicity
}

/// Labelled successors read off the reduction relation: every state of
/// `env` is tried, and the difference between the state before and after a
/// reduction becomes the label.
pub fn enumerated_successors(p: &Process, env: &StateUniverse, b: &LtsBounds) -> BTreeSet<(Label, Process)> {
    let mut out = BTreeSet::new();
    for s in env.states() {
        for st in step_config(p, &s) {
            let q = canonical(&st.process);
            if !within(&q, b) {
                continue;
            }
            let label = if s.is_subset(&st.state) {
                let extra = st.state.difference(&s);
                match extra.elements().as_slice() {
                    [] => Label::Block(Multiset::new()),
                    [a] => Label::Out(a.clone()),
                    _ => panic!("a single reduction added {extra} to the state"),
                }
            } else if st.state.is_subset(&s) {
                Label::Block(s.difference(&st.state))
            } else {
                panic!("a single reduction both added and removed names: {s} -> {}", st.state);
            };
            out.insert((label, q));
        }
    }
    out
}

/// Whether `p` has an enumerated transition `label` to (the canonical form
/// of) `q`, witnessed by a state of `env`.
pub fn has_enumerated_edge(p: &Process, label: &Label, q: &Process, env: &StateUniverse) -> bool {
    let q = canonical(q);
    enumerated_successors(
        p,
        env,
        &LtsBounds {
            max_repl_unfold: u32::MAX,
            max_multiplicity: u32::MAX,
        },
    )
    .iter()
    .any(|(l, r)| l == label && *r == q)
}

fn success(proc_: &Process, state: &Multiset, w: &Name) -> bool {
    state.contains(w)
        || flat(proc_)
            .iter()
            .any(|c| matches!(c, Process::Output { channel } if channel == w))
}

fn flat(p: &Process) -> Vec<Process> {
    match p {
        Process::Par { parts } => parts.iter().flat_map(flat).collect(),
        Process::Nil => vec![],
        other => vec![other.clone()],
    }
}

/// Plain breadth-first may-testing of `p | o` from the empty state.
/// `None` when the search was cut short without finding success.
pub fn may_oracle(p: &Process, o: &Process, max_nodes: usize, max_mult: u32, max_repl: u32) -> Option<bool> {
    let w = n("w");
    let start = (canonical(&Process::par2(p.clone(), o.clone())), Multiset::new());
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut cut = false;
    while let Some((q, s)) = queue.pop_front() {
        if success(&q, &s, &w) {
            return Some(true);
        }
        for st in step_config(&q, &s) {
            let next = (canonical(&st.process), st.state);
            if next.1.max_count() > max_mult
                || max_repl_fired(&next.0) > max_repl
                || max_hidden_pending(&next.0) > max_mult
            {
                cut = true;
                continue;
            }
            if seen.contains(&next) {
                continue;
            }
            if seen.len() >= max_nodes {
                cut = true;
                continue;
            }
            seen.insert(next.clone());
            queue.push_back(next);
        }
    }
    if cut {
        None
    } else {
        Some(false)
    }
}

/// Direct recursive evaluation: a read is recorded when the reads so far fit
/// in the initial state, `orElse` falls back on abort with the log it
/// started from.
pub fn big_step(e: &AtomicExpr, init: &Multiset) -> Option<Log> {
    fn go(e: &AtomicExpr, init: &Multiset, log: Vec<Action>) -> Option<Vec<Action>> {
        match e {
            AtomicExpr::End => Some(log),
            AtomicExpr::Retry => None,
            AtomicExpr::Prefix { action, rest } => {
                let mut next = log;
                next.push(action.clone());
                if action.is_read() {
                    let reads: Multiset = next.iter().filter(|a| a.is_read()).map(|a| a.channel.clone()).collect();
                    if !reads.is_subset(init) {
                        return None;
                    }
                }
                go(rest, init, next)
            }
            AtomicExpr::OrElse { left, right } => go(left, init, log.clone()).or_else(|| go(right, init, log)),
        }
    }
    go(e, init, vec![]).map(Log)
}

/// Outcomes of every maximal run of the small-step transaction rules,
/// interleaving the two sides of each `orElse` in all possible ways;
/// `None` is an abort.
pub fn interleaving_outcomes(e: &AtomicExpr, init: &Multiset) -> Vec<Option<Log>> {
    let start = OngoingExpr::start(Arc::new(e.clone()), init.clone());
    let mut outcomes = Vec::new();
    let mut seen = HashSet::new();
    let mut stack = vec![start];
    while let Some(cur) = stack.pop() {
        if !seen.insert(cur.clone()) {
            continue;
        }
        if let OngoingExpr::Running { expr, log, .. } = &cur {
            match **expr {
                AtomicExpr::End => {
                    outcomes.push(Some(log.clone()));
                    continue;
                }
                AtomicExpr::Retry => {
                    outcomes.push(None);
                    continue;
                }
                _ => {}
            }
        }
        stack.extend(step_ongoing(&cur).into_iter().map(|(_, a)| a));
    }
    outcomes
}

/// State holding the listed names, repeats counted.
pub fn st(names: &[&str]) -> Multiset {
    names.iter().map(|s| n(s)).collect()
}
