//! Encodings of choice and join patterns into atomic blocks, and the two
//! example systems (leader election, dining philosophers).
//!
//! Every generated channel comes from a [`FreshSupply`] and is hidden with
//! annotation 0 where it is introduced.

use std::sync::Arc;

use crate::error::TermError;
use crate::log::Action;
use crate::name::{FreshSupply, Name};
use crate::syntax::{AtomicExpr, ChoiceBranch, Polarity, Process};

fn action_of(polarity: Polarity, a: &Name) -> Action {
    match polarity {
        Polarity::In => Action::read(a.clone()),
        Polarity::Out => Action::write(a.clone()),
    }
}

fn chain(actions: &[Action], tail: AtomicExpr) -> AtomicExpr {
    actions
        .iter()
        .rev()
        .fold(tail, |acc, a| AtomicExpr::prefix(a.clone(), acc))
}

fn take_fresh(fresh: &mut FreshSupply, stem: &str, conts: &[&Process]) -> Result<Name, TermError> {
    let k = fresh.next(stem);
    if conts.iter().any(|p| p.all_names().contains(&k)) {
        return Err(TermError::FreshNameClash(k.to_string()));
    }
    Ok(k)
}

fn hide_all(body: Process, names: &[Name]) -> Process {
    names.iter().fold(body, |acc, k| Process::hide(acc, k.clone(), 0))
}

/// `(atomic(⟦μ1⟧.wr k1.end orElse …) | k1?.⟦P1⟧ | …) \ k1:0 … \ kn:0`.
/// Continuations are encoded recursively.
pub fn encode_choice(branches: &[ChoiceBranch], fresh: &mut FreshSupply) -> Result<Process, TermError> {
    if branches.is_empty() {
        return Err(TermError::EmptyChoice);
    }
    let conts: Vec<&Process> = branches.iter().map(|b| &*b.body).collect();
    let mut ks = Vec::new();
    for _ in branches {
        ks.push(take_fresh(fresh, "k", &conts)?);
    }
    let mut alts = Vec::new();
    let mut parts = Vec::new();
    for (b, k) in branches.iter().zip(&ks) {
        let acts = [action_of(b.polarity, &b.channel), Action::write(k.clone())];
        alts.push(chain(&acts, AtomicExpr::End));
        parts.push(Process::input(k.clone(), encode_process(&b.body, fresh)?));
    }
    parts.insert(0, Process::atomic(AtomicExpr::or_else_all(alts)));
    Ok(hide_all(Process::Par { parts }, &ks))
}

/// A multi-synchronisation `(μ1 × … × μn).P`, possibly replicated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinSpec {
    pub pattern: Vec<(Polarity, Name)>,
    pub continuation: Process,
    pub replicated: bool,
}

impl JoinSpec {
    pub fn new(pattern: Vec<(Polarity, Name)>, continuation: Process) -> Self {
        Self {
            pattern,
            continuation,
            replicated: false,
        }
    }

    fn actions(&self) -> Vec<Action> {
        self.pattern.iter().map(|(p, a)| action_of(*p, a)).collect()
    }
}

/// `(atomic(⟦μ1⟧.….⟦μn⟧.wr k.end) | k?.⟦P⟧) \ k:0`, or for the replicated
/// form `(r! | *r?.atomic(….wr r.wr k.end) | *k?.⟦P⟧) \ r:0 \ k:0`.
pub fn encode_join(spec: &JoinSpec, fresh: &mut FreshSupply) -> Result<Process, TermError> {
    if spec.pattern.is_empty() {
        return Err(TermError::EmptyPattern);
    }
    let cont = &spec.continuation;
    let k = take_fresh(fresh, "k", &[cont])?;
    let body = encode_process(cont, fresh)?;
    let acts = spec.actions();
    if !spec.replicated {
        let mut a = acts;
        a.push(Action::write(k.clone()));
        let p = Process::par2(
            Process::atomic(chain(&a, AtomicExpr::End)),
            Process::input(k.clone(), body),
        );
        return Ok(Process::hide(p, k, 0));
    }
    let r = take_fresh(fresh, "r", &[cont])?;
    let mut a = acts;
    a.push(Action::write(r.clone()));
    a.push(Action::write(k.clone()));
    let p = Process::par(vec![
        Process::output(r.clone()),
        Process::repl(r.clone(), Process::atomic(chain(&a, AtomicExpr::End))),
        Process::repl(k.clone(), body),
    ]);
    Ok(hide_all(p, &[r, k]))
}

/// Several patterns competing in one transaction, tried left to right.
/// Patterns with the same continuation share one fresh channel.
pub fn encode_join_definition(patterns: &[JoinSpec], fresh: &mut FreshSupply) -> Result<Process, TermError> {
    if patterns.len() < 2 {
        return Err(TermError::Invalid(
            "a join definition needs at least two patterns".into(),
        ));
    }
    if patterns.iter().any(|p| p.pattern.is_empty()) {
        return Err(TermError::EmptyPattern);
    }
    let conts: Vec<&Process> = patterns.iter().map(|p| &p.continuation).collect();
    let mut distinct: Vec<(&Process, Name)> = Vec::new();
    let mut alts = Vec::new();
    for p in patterns {
        let k = match distinct.iter().find(|(c, _)| **c == p.continuation) {
            Some((_, k)) => k.clone(),
            None => {
                let k = take_fresh(fresh, "k", &conts)?;
                distinct.push((&p.continuation, k.clone()));
                k
            }
        };
        let mut a = p.actions();
        a.push(Action::write(k));
        alts.push(chain(&a, AtomicExpr::End));
    }
    let mut parts = vec![Process::atomic(AtomicExpr::or_else_all(alts))];
    for (c, k) in &distinct {
        parts.push(Process::input(k.clone(), encode_process(c, fresh)?));
    }
    let ks: Vec<Name> = distinct.into_iter().map(|(_, k)| k).collect();
    Ok(hide_all(Process::Par { parts }, &ks))
}

/// Replaces every choice node by its encoding.
pub fn encode_process(p: &Process, fresh: &mut FreshSupply) -> Result<Process, TermError> {
    let rec = |q: &Arc<Process>, fresh: &mut FreshSupply| encode_process(q, fresh).map(Arc::new);
    Ok(match p {
        Process::Nil | Process::Output { .. } | Process::Atomic { .. } | Process::Ongoing { .. } => p.clone(),
        Process::Input { channel, body } => Process::Input {
            channel: channel.clone(),
            body: rec(body, fresh)?,
        },
        Process::Repl { channel, body, fired } => Process::Repl {
            channel: channel.clone(),
            body: rec(body, fresh)?,
            fired: *fired,
        },
        Process::Par { parts } => Process::Par {
            parts: parts
                .iter()
                .map(|q| encode_process(q, fresh))
                .collect::<Result<_, _>>()?,
        },
        Process::Hide { body, name, pending } => Process::Hide {
            body: rec(body, fresh)?,
            name: name.clone(),
            pending: *pending,
        },
        Process::Choice { branches } => encode_choice(branches, fresh)?,
    })
}

fn indexed(stem: &str, i: usize) -> Name {
    Name::new(&format!("{stem}{i}")).expect("generated names are valid")
}

/// `t! | L1 | … | Ln` where
/// `Li = (atomic(t?.k!.end orElse k'!.end) | k?.(win_i! | t!) | k'?.loose_i!) \ k:0 \ k':0`.
pub fn leader_election(n: usize) -> Result<Process, TermError> {
    if n < 2 {
        return Err(TermError::Invalid(
            "leader election needs at least two participants".into(),
        ));
    }
    let t = Name::from_static("t");
    let mut fresh = FreshSupply::new();
    let mut parts = vec![Process::output(t.clone())];
    for i in 1..=n {
        let (k, kp) = (fresh.next("k"), fresh.next("k"));
        let m = AtomicExpr::or_else(
            AtomicExpr::read(t.clone(), AtomicExpr::write(k.clone(), AtomicExpr::End)),
            AtomicExpr::write(kp.clone(), AtomicExpr::End),
        );
        let body = Process::par(vec![
            Process::atomic(m),
            Process::input(
                k.clone(),
                Process::par2(Process::output(indexed("win_", i)), Process::output(t.clone())),
            ),
            Process::input(kp.clone(), Process::output(indexed("loose_", i))),
        ]);
        parts.push(hide_all(body, &[k, kp]));
    }
    Ok(Process::Par { parts })
}

/// The same participants written with native choice:
/// `Li = t?.(win_i! | t!) + loose_i!.0`.
pub fn leader_election_choice(n: usize) -> Result<Process, TermError> {
    if n < 2 {
        return Err(TermError::Invalid(
            "leader election needs at least two participants".into(),
        ));
    }
    let t = Name::from_static("t");
    let mut parts = vec![Process::output(t.clone())];
    for i in 1..=n {
        parts.push(Process::choice(vec![
            ChoiceBranch::input(
                t.clone(),
                Process::par2(Process::output(indexed("win_", i)), Process::output(t.clone())),
            ),
            ChoiceBranch::output(indexed("loose_", i), Process::Nil),
        ]));
    }
    Ok(Process::Par { parts })
}

/// Appends `wr g` before every `end`.
fn signal_on_commit(m: &AtomicExpr, g: &Name) -> AtomicExpr {
    match m {
        AtomicExpr::End => AtomicExpr::write(g.clone(), AtomicExpr::End),
        AtomicExpr::Retry => AtomicExpr::Retry,
        AtomicExpr::Prefix { action, rest } => AtomicExpr::prefix(action.clone(), signal_on_commit(rest, g)),
        AtomicExpr::OrElse { left, right } => {
            AtomicExpr::or_else(signal_on_commit(left, g), signal_on_commit(right, g))
        }
    }
}

/// `atomic(M).P`, read as `(atomic(M with wr g before end) | g?.P) \ g:0`.
pub fn atomic_then(m: &AtomicExpr, cont: Process, fresh: &mut FreshSupply) -> Result<Process, TermError> {
    let g = take_fresh(fresh, "g", &[&cont])?;
    let p = Process::par2(
        Process::atomic(signal_on_commit(m, &g)),
        Process::input(g.clone(), cont),
    );
    Ok(Process::hide(p, g, 0))
}

/// The chopstick each philosopher holds on either side.
pub fn chopsticks_of(i: usize) -> (Name, Name) {
    (indexed("c", (i + 3) % 4), indexed("c", i))
}

/// The synchronisation channel introduced for philosopher `i` by
/// [`dining_philosophers`].
pub fn philosopher_signal(i: usize) -> Name {
    Name::fresh("g", i + 1)
}

/// `D = (D0 | D1 | D2 | D3 | c0! | c1! | c2! | c3!) \ c0:0 … \ c3:0` with
/// `Di = atomic(c(i-1)?.ci?.end).ei?.ti?.(c(i-1)! | ci!)`.
pub fn dining_philosophers() -> Process {
    let mut fresh = FreshSupply::new();
    let mut parts = Vec::new();
    for i in 0..4 {
        let (l, r) = chopsticks_of(i);
        let grab = AtomicExpr::read(l.clone(), AtomicExpr::read(r.clone(), AtomicExpr::End));
        let after = Process::input(
            indexed("e", i),
            Process::input(indexed("t", i), Process::par2(Process::output(l), Process::output(r))),
        );
        parts.push(atomic_then(&grab, after, &mut fresh).expect("philosopher names are distinct"));
    }
    for i in 0..4 {
        parts.push(Process::output(indexed("c", i)));
    }
    let cs: Vec<Name> = (0..4).map(|i| indexed("c", i)).collect();
    hide_all(Process::Par { parts }, &cs)
}
