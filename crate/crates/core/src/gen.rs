//! Seeded random terms for property checks and the CLI's randomized verbs.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atomic::{chain_expr, normalize};
use crate::log::Action;
use crate::lts::Label;
use crate::multiset::Multiset;
use crate::name::Name;
use crate::syntax::{AtomicExpr, ChoiceBranch, Process};
use crate::testing::Trace;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(list: &[&str]) -> Vec<Name> {
    list.iter().map(|s| Name::from_static(s)).collect()
}

fn pick(rng: &mut impl Rng, names: &[Name]) -> Name {
    names.choose(rng).expect("non-empty name list").clone()
}

fn action(rng: &mut impl Rng, names: &[Name]) -> Action {
    let n = pick(rng, names);
    if rng.gen_bool(0.6) {
        Action::read(n)
    } else {
        Action::write(n)
    }
}

/// Expression of nesting depth at most `depth`.
pub fn expr(rng: &mut impl Rng, names: &[Name], depth: usize) -> AtomicExpr {
    let leaf = |rng: &mut dyn rand::RngCore| {
        if rng.gen_bool(0.7) {
            AtomicExpr::End
        } else {
            AtomicExpr::Retry
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.gen_range(0..8) {
        0 => leaf(rng),
        1..=4 => AtomicExpr::prefix(action(rng, names), expr(rng, names, depth - 1)),
        _ => AtomicExpr::or_else(expr(rng, names, depth - 1), expr(rng, names, depth - 1)),
    }
}

/// Expression with at most `max_size` syntax nodes.
pub fn small_expr(rng: &mut impl Rng, names: &[Name], max_size: usize) -> AtomicExpr {
    if max_size < 3 || rng.gen_bool(0.15) {
        return if max_size >= 2 && rng.gen_bool(0.5) {
            AtomicExpr::prefix(action(rng, names), AtomicExpr::End)
        } else if rng.gen_bool(0.75) {
            AtomicExpr::End
        } else {
            AtomicExpr::Retry
        };
    }
    if rng.gen_bool(0.55) {
        AtomicExpr::prefix(action(rng, names), small_expr(rng, names, max_size - 1))
    } else {
        let left = rng.gen_range(1..=max_size - 2);
        AtomicExpr::or_else(
            small_expr(rng, names, left),
            small_expr(rng, names, max_size - 1 - left),
        )
    }
}

/// Normal form with between 1 and `max_branches` end-terminated chains of
/// up to `max_len` actions, before redundancy elimination.
pub fn normal_form(rng: &mut impl Rng, names: &[Name], max_branches: usize, max_len: usize) -> AtomicExpr {
    let k = rng.gen_range(1..=max_branches);
    let branches = (0..k)
        .map(|_| {
            let len = rng.gen_range(0..=max_len);
            let acts: Vec<Action> = (0..len).map(|_| action(rng, names)).collect();
            chain_expr(&acts)
        })
        .collect();
    normalize(&AtomicExpr::or_else_all(branches))
}

pub fn state(rng: &mut impl Rng, names: &[Name], k: u32) -> Multiset {
    let mut m = Multiset::new();
    for n in names {
        m.insert_n(n.clone(), rng.gen_range(0..=k));
    }
    m
}

/// Trace of exactly `len` visible labels, each an output or a block of one
/// or two names.
pub fn trace(rng: &mut impl Rng, names: &[Name], len: usize) -> Trace {
    let labels = (0..len)
        .map(|_| {
            if rng.gen_bool(0.4) {
                Label::Out(pick(rng, names))
            } else {
                let mut m = Multiset::singleton(pick(rng, names));
                if rng.gen_bool(0.3) {
                    m.insert(pick(rng, names));
                }
                Label::Block(m)
            }
        })
        .collect();
    Trace::new(labels).expect("no tau labels generated")
}

#[derive(Clone, Debug)]
pub struct ProcessShape {
    pub names: Vec<Name>,
    pub depth: usize,
    pub replication: bool,
    pub atomic: bool,
    pub choice: bool,
    pub hiding: bool,
    /// Largest annotation `n` in generated `\ a:n`.
    pub max_pending: u32,
}

impl ProcessShape {
    pub fn new(names: Vec<Name>, depth: usize) -> Self {
        Self {
            names,
            depth,
            replication: false,
            atomic: true,
            choice: false,
            hiding: true,
            max_pending: 2,
        }
    }
}

/// Process of prefix depth at most `shape.depth`; never hides a name inside
/// a hiding of the same name.
pub fn process(rng: &mut impl Rng, shape: &ProcessShape) -> Process {
    gen_process(rng, shape, shape.depth, &BTreeSet::new())
}

fn gen_process(rng: &mut impl Rng, sh: &ProcessShape, depth: usize, hidden: &BTreeSet<Name>) -> Process {
    if depth == 0 {
        return if rng.gen_bool(0.5) {
            Process::Nil
        } else {
            Process::output(pick(rng, &sh.names))
        };
    }
    let lowest = if depth == sh.depth { 2 } else { 0 };
    loop {
        match rng.gen_range(lowest..14) {
            0 => return Process::Nil,
            1 => return Process::output(pick(rng, &sh.names)),
            2..=4 => return Process::input(pick(rng, &sh.names), gen_process(rng, sh, depth - 1, hidden)),
            5..=7 => {
                let l = gen_process(rng, sh, depth - 1, hidden);
                let r = gen_process(rng, sh, depth - 1, hidden);
                return Process::par2(l, r);
            }
            8 if sh.hiding => {
                let free: Vec<Name> = sh.names.iter().filter(|n| !hidden.contains(*n)).cloned().collect();
                if free.is_empty() {
                    continue;
                }
                let a = pick(rng, &free);
                let mut inner = hidden.clone();
                inner.insert(a.clone());
                let body = gen_process(rng, sh, depth - 1, &inner);
                return Process::hide(body, a, rng.gen_range(0..=sh.max_pending));
            }
            9 | 10 if sh.atomic => return Process::atomic(expr(rng, &sh.names, depth.min(3))),
            11 if sh.replication => {
                return Process::repl(pick(rng, &sh.names), gen_process(rng, sh, depth - 1, hidden))
            }
            12 | 13 if sh.choice => {
                let k = rng.gen_range(1..=3);
                let branches = (0..k).map(|_| choice_branch(rng, sh, depth - 1, hidden)).collect();
                return Process::choice(branches);
            }
            _ => continue,
        }
    }
}

fn choice_branch(rng: &mut impl Rng, sh: &ProcessShape, depth: usize, hidden: &BTreeSet<Name>) -> ChoiceBranch {
    let a = pick(rng, &sh.names);
    let body = gen_process(rng, sh, depth, hidden);
    if rng.gen_bool(0.5) {
        ChoiceBranch::input(a, body)
    } else {
        ChoiceBranch::output(a, body)
    }
}

/// Choice of 1..=`max_branches` branches over `names` with continuations
/// drawn from `shape`.
pub fn choice_spec(rng: &mut impl Rng, shape: &ProcessShape, max_branches: usize) -> Vec<ChoiceBranch> {
    let k = rng.gen_range(1..=max_branches);
    (0..k)
        .map(|_| choice_branch(rng, shape, shape.depth, &BTreeSet::new()))
        .collect()
}
