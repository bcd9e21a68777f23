//! One-step reduction of configurations `(P; σ)` and of ongoing transactions.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::log::ActionKind;
use crate::multiset::Multiset;
use crate::name::Name;
use crate::syntax::{ChoiceBranch, OngoingExpr, Polarity, Process};
use crate::AtomicExpr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Out,
    In,
    Rep,
    Com,
    AtSt,
    AtPass,
    AtRe,
    AtFail,
    AtOk,
    CInp,
    COut,
    CPass,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Out => "out",
            Rule::In => "in",
            Rule::Rep => "rep",
            Rule::Com => "com",
            Rule::AtSt => "atSt",
            Rule::AtPass => "atPass",
            Rule::AtRe => "atRe",
            Rule::AtFail => "atFail",
            Rule::AtOk => "atOk",
            Rule::CInp => "c-inp",
            Rule::COut => "c-out",
            Rule::CPass => "c-pass",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OngoingRule {
    RdOk,
    RdFail,
    Wr,
    OrInit,
    OrFail,
    OrEnd,
}

impl OngoingRule {
    pub fn name(self) -> &'static str {
        match self {
            OngoingRule::RdOk => "ARdOk",
            OngoingRule::RdFail => "ARdF",
            OngoingRule::Wr => "AWr",
            OngoingRule::OrInit => "AOI",
            OngoingRule::OrFail => "AOF",
            OngoingRule::OrEnd => "AOE",
        }
    }
}

/// Derivation of a transaction step: an axiom, possibly under `(AOL)`/`(AOR)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OngoingDerivation {
    Axiom(OngoingRule),
    Left(Box<OngoingDerivation>),
    Right(Box<OngoingDerivation>),
}

impl OngoingDerivation {
    pub fn is_right(&self) -> bool {
        matches!(self, OngoingDerivation::Right(_))
    }
}

impl fmt::Display for OngoingDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OngoingDerivation::Axiom(r) => f.write_str(r.name()),
            OngoingDerivation::Left(d) => write!(f, "AOL/{d}"),
            OngoingDerivation::Right(d) => write!(f, "AOR/{d}"),
        }
    }
}

/// Derivation tree of a process step. `Par` addresses a component of an
/// n-ary parallel composition by index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Derivation {
    Axiom(Rule),
    AtPass(OngoingDerivation),
    Par {
        index: usize,
        inner: Box<Derivation>,
    },
    Com {
        sender: usize,
        send: Box<Derivation>,
        receiver: usize,
        receive: Box<Derivation>,
    },
    Hid(Box<Derivation>),
    CPass(Box<Derivation>),
}

impl Derivation {
    /// The principal rule, looking through parallel and hiding contexts.
    pub fn rule(&self) -> Rule {
        match self {
            Derivation::Axiom(r) => *r,
            Derivation::AtPass(_) => Rule::AtPass,
            Derivation::Par { inner, .. } | Derivation::Hid(inner) => inner.rule(),
            Derivation::Com { .. } => Rule::Com,
            Derivation::CPass(_) => Rule::CPass,
        }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Derivation::Axiom(r) => f.write_str(r.name()),
            Derivation::AtPass(d) => write!(f, "atPass/{d}"),
            Derivation::Par { index, inner } => write!(f, "par[{index}]/{inner}"),
            Derivation::Com {
                sender,
                send,
                receiver,
                receive,
            } => write!(f, "com({sender}:{send}, {receiver}:{receive})"),
            Derivation::Hid(d) => write!(f, "hid/{d}"),
            Derivation::CPass(d) => write!(f, "c-pass/{d}"),
        }
    }
}

impl Serialize for Derivation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub derivation: Derivation,
    pub process: Process,
    pub state: Multiset,
}

// ---------------------------------------------------------------------------
// transactions

fn running(expr: Arc<AtomicExpr>, init: Multiset, log: crate::Log) -> OngoingExpr {
    OngoingExpr::Running { expr, init, log }
}

/// All single steps of an ongoing transaction. Terminal `Running(end|retry)`
/// forms have no steps; the enclosing process rule decides their fate.
pub fn step_ongoing(a: &OngoingExpr) -> Vec<(OngoingDerivation, OngoingExpr)> {
    match a {
        OngoingExpr::Running { expr, init, log } => match &**expr {
            AtomicExpr::End | AtomicExpr::Retry => vec![],
            AtomicExpr::Prefix { action, rest } => match action.kind {
                ActionKind::Read => {
                    let wanted = log.read_set().with(action.channel.clone());
                    if wanted.is_subset(init) {
                        vec![(
                            OngoingDerivation::Axiom(OngoingRule::RdOk),
                            running(rest.clone(), init.clone(), log.push(action.clone())),
                        )]
                    } else {
                        vec![(
                            OngoingDerivation::Axiom(OngoingRule::RdFail),
                            running(Arc::new(AtomicExpr::Retry), init.clone(), log.clone()),
                        )]
                    }
                }
                ActionKind::Write => vec![(
                    OngoingDerivation::Axiom(OngoingRule::Wr),
                    running(rest.clone(), init.clone(), log.push(action.clone())),
                )],
            },
            AtomicExpr::OrElse { left, right } => vec![(
                OngoingDerivation::Axiom(OngoingRule::OrInit),
                OngoingExpr::OrElse {
                    left: Arc::new(running(left.clone(), init.clone(), log.clone())),
                    right: Arc::new(running(right.clone(), init.clone(), log.clone())),
                },
            )],
        },
        OngoingExpr::OrElse { left, right } => {
            let mut out = Vec::new();
            if let OngoingExpr::Running { expr, .. } = &**left {
                match &**expr {
                    AtomicExpr::Retry => out.push((OngoingDerivation::Axiom(OngoingRule::OrFail), (**right).clone())),
                    AtomicExpr::End => out.push((OngoingDerivation::Axiom(OngoingRule::OrEnd), (**left).clone())),
                    _ => {}
                }
            }
            for (d, l) in step_ongoing(left) {
                out.push((
                    OngoingDerivation::Left(Box::new(d)),
                    OngoingExpr::OrElse {
                        left: Arc::new(l),
                        right: right.clone(),
                    },
                ));
            }
            for (d, r) in step_ongoing(right) {
                out.push((
                    OngoingDerivation::Right(Box::new(d)),
                    OngoingExpr::OrElse {
                        left: left.clone(),
                        right: Arc::new(r),
                    },
                ));
            }
            out
        }
    }
}

// ---------------------------------------------------------------------------
// processes

/// State seen inside `P \ a:n`: the hidden name shadows any outer `a`.
pub(crate) fn enter_hide(state: &Multiset, name: &Name, pending: u32) -> Multiset {
    let mut s = state.without(name);
    s.set_count(name.clone(), pending);
    s
}

/// Splits an inner state back into the new annotation and the outer state.
pub(crate) fn leave_hide(inner: &Multiset, outer_before: &Multiset, name: &Name) -> (u32, Multiset) {
    let m = inner.count(name);
    let mut s = inner.without(name);
    s.set_count(name.clone(), outer_before.count(name));
    (m, s)
}

/// `σ' = σ ⊎ {a}` for exactly one `a`.
fn added_one(before: &Multiset, after: &Multiset) -> Option<Name> {
    if after.size() != before.size() + 1 || !before.is_subset(after) {
        return None;
    }
    after.difference(before).names().next().cloned()
}

fn replace(parts: &[Process], i: usize, p: Process) -> Process {
    let mut v = parts.to_vec();
    v[i] = p;
    Process::Par { parts: v }
}

/// Every reduct of `(p; σ)`, without canonicalisation.
pub fn step_config(p: &Process, state: &Multiset) -> Vec<Step> {
    let mut out = Vec::new();
    steps_into(p, state, &mut out);
    out
}

fn steps_into(p: &Process, s: &Multiset, out: &mut Vec<Step>) {
    let ax = |r| Derivation::Axiom(r);
    match p {
        Process::Nil => {}
        Process::Output { channel } => out.push(Step {
            derivation: ax(Rule::Out),
            process: Process::Nil,
            state: s.with(channel.clone()),
        }),
        Process::Input { channel, body } => {
            let mut s2 = s.clone();
            if s2.remove_one(channel) {
                out.push(Step {
                    derivation: ax(Rule::In),
                    process: (**body).clone(),
                    state: s2,
                });
            }
        }
        Process::Repl { channel, body, fired } => {
            let mut s2 = s.clone();
            if s2.remove_one(channel) {
                out.push(Step {
                    derivation: ax(Rule::Rep),
                    process: Process::par2(
                        (**body).clone(),
                        Process::Repl {
                            channel: channel.clone(),
                            body: body.clone(),
                            fired: fired + 1,
                        },
                    ),
                    state: s2,
                });
            }
        }
        Process::Par { parts } => par_steps(parts, s, out),
        Process::Hide { body, name, pending } => {
            let inner = enter_hide(s, name, *pending);
            for st in step_config(body, &inner) {
                let (m, outer) = leave_hide(&st.state, s, name);
                out.push(Step {
                    derivation: Derivation::Hid(Box::new(st.derivation)),
                    process: Process::Hide {
                        body: Arc::new(st.process),
                        name: name.clone(),
                        pending: m,
                    },
                    state: outer,
                });
            }
        }
        Process::Atomic { expr } => out.push(Step {
            derivation: ax(Rule::AtSt),
            process: Process::Ongoing {
                body: Arc::new(OngoingExpr::start(expr.clone(), s.clone())),
                original: expr.clone(),
            },
            state: s.clone(),
        }),
        Process::Ongoing { body, original } => ongoing_steps(body, original, s, out),
        Process::Choice { branches } => choice_steps(branches, s, out),
    }
}

fn par_steps(parts: &[Process], s: &Multiset, out: &mut Vec<Step>) {
    let local: Vec<Vec<Step>> = parts.iter().map(|q| step_config(q, s)).collect();
    for (i, steps) in local.iter().enumerate() {
        for st in steps {
            out.push(Step {
                derivation: Derivation::Par {
                    index: i,
                    inner: Box::new(st.derivation.clone()),
                },
                process: replace(parts, i, st.process.clone()),
                state: st.state.clone(),
            });
        }
    }
    // (com): a component emitting `a` feeds another that consumes exactly `a`
    let mut after_add: HashMap<(usize, Name), Vec<Step>> = HashMap::new();
    for (i, steps) in local.iter().enumerate() {
        for st in steps {
            let Some(a) = added_one(s, &st.state) else { continue };
            for j in 0..parts.len() {
                if j == i {
                    continue;
                }
                let recv = after_add
                    .entry((j, a.clone()))
                    .or_insert_with(|| step_config(&parts[j], &st.state));
                for rt in recv.iter().filter(|rt| rt.state == *s) {
                    let mut v = parts.to_vec();
                    v[i] = st.process.clone();
                    v[j] = rt.process.clone();
                    out.push(Step {
                        derivation: Derivation::Com {
                            sender: i,
                            send: Box::new(st.derivation.clone()),
                            receiver: j,
                            receive: Box::new(rt.derivation.clone()),
                        },
                        process: Process::Par { parts: v },
                        state: s.clone(),
                    });
                }
            }
        }
    }
}

fn ongoing_steps(body: &Arc<OngoingExpr>, original: &Arc<AtomicExpr>, s: &Multiset, out: &mut Vec<Step>) {
    if let OngoingExpr::Running { expr, log, .. } = &**body {
        match &**expr {
            AtomicExpr::Retry => {
                out.push(Step {
                    derivation: Derivation::Axiom(Rule::AtRe),
                    process: Process::Atomic { expr: original.clone() },
                    state: s.clone(),
                });
                return;
            }
            AtomicExpr::End => {
                let read = log.read_set();
                if read.is_subset(s) {
                    out.push(Step {
                        derivation: Derivation::Axiom(Rule::AtOk),
                        process: Process::outputs(&log.write_set()),
                        state: s.difference(&read),
                    });
                } else {
                    out.push(Step {
                        derivation: Derivation::Axiom(Rule::AtFail),
                        process: Process::Atomic { expr: original.clone() },
                        state: s.clone(),
                    });
                }
                return;
            }
            _ => {}
        }
    }
    for (d, a) in step_ongoing(body) {
        out.push(Step {
            derivation: Derivation::AtPass(d),
            process: Process::Ongoing {
                body: Arc::new(a),
                original: original.clone(),
            },
            state: s.clone(),
        });
    }
}

fn choice_steps(branches: &[ChoiceBranch], s: &Multiset, out: &mut Vec<Step>) {
    let Some(first) = branches.first() else { return };
    match first.polarity {
        Polarity::Out => out.push(Step {
            derivation: Derivation::Axiom(Rule::COut),
            process: (*first.body).clone(),
            state: s.with(first.channel.clone()),
        }),
        Polarity::In => {
            let mut s2 = s.clone();
            if s2.remove_one(&first.channel) {
                out.push(Step {
                    derivation: Derivation::Axiom(Rule::CInp),
                    process: (*first.body).clone(),
                    state: s2,
                });
            } else if branches.len() > 1 {
                let mut inner = Vec::new();
                choice_steps(&branches[1..], s, &mut inner);
                for st in inner {
                    out.push(Step {
                        derivation: Derivation::CPass(Box::new(st.derivation)),
                        ..st
                    });
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// replay: apply exactly the named derivation

pub fn replay_ongoing(a: &OngoingExpr, d: &OngoingDerivation) -> Option<OngoingExpr> {
    match (a, d) {
        (OngoingExpr::OrElse { left, right }, OngoingDerivation::Left(inner)) => Some(OngoingExpr::OrElse {
            left: Arc::new(replay_ongoing(left, inner)?),
            right: right.clone(),
        }),
        (OngoingExpr::OrElse { left, right }, OngoingDerivation::Right(inner)) => Some(OngoingExpr::OrElse {
            left: left.clone(),
            right: Arc::new(replay_ongoing(right, inner)?),
        }),
        (OngoingExpr::OrElse { left, right }, OngoingDerivation::Axiom(r)) => {
            let OngoingExpr::Running { expr, .. } = &**left else {
                return None;
            };
            match (r, &**expr) {
                (OngoingRule::OrFail, AtomicExpr::Retry) => Some((**right).clone()),
                (OngoingRule::OrEnd, AtomicExpr::End) => Some((**left).clone()),
                _ => None,
            }
        }
        (OngoingExpr::Running { expr, init, log }, OngoingDerivation::Axiom(r)) => match (r, &**expr) {
            (OngoingRule::RdOk, AtomicExpr::Prefix { action, rest }) if action.is_read() => log
                .read_set()
                .with(action.channel.clone())
                .is_subset(init)
                .then(|| running(rest.clone(), init.clone(), log.push(action.clone()))),
            (OngoingRule::RdFail, AtomicExpr::Prefix { action, .. }) if action.is_read() => {
                (!log.read_set().with(action.channel.clone()).is_subset(init))
                    .then(|| running(Arc::new(AtomicExpr::Retry), init.clone(), log.clone()))
            }
            (OngoingRule::Wr, AtomicExpr::Prefix { action, rest }) if !action.is_read() => {
                Some(running(rest.clone(), init.clone(), log.push(action.clone())))
            }
            (OngoingRule::OrInit, AtomicExpr::OrElse { left, right }) => Some(OngoingExpr::OrElse {
                left: Arc::new(running(left.clone(), init.clone(), log.clone())),
                right: Arc::new(running(right.clone(), init.clone(), log.clone())),
            }),
            _ => None,
        },
        _ => None,
    }
}

/// Re-derives the single step named by `d`, or `None` if it does not apply.
pub fn replay(p: &Process, s: &Multiset, d: &Derivation) -> Option<(Process, Multiset)> {
    match (p, d) {
        (Process::Par { parts }, Derivation::Par { index, inner }) => {
            let (q, s2) = replay(parts.get(*index)?, s, inner)?;
            Some((replace(parts, *index, q), s2))
        }
        (
            Process::Par { parts },
            Derivation::Com {
                sender,
                send,
                receiver,
                receive,
            },
        ) => {
            if sender == receiver {
                return None;
            }
            let (ps, s1) = replay(parts.get(*sender)?, s, send)?;
            added_one(s, &s1)?;
            let (pr, s2) = replay(parts.get(*receiver)?, &s1, receive)?;
            if s2 != *s {
                return None;
            }
            let mut v = parts.clone();
            v[*sender] = ps;
            v[*receiver] = pr;
            Some((Process::Par { parts: v }, s.clone()))
        }
        (Process::Hide { body, name, pending }, Derivation::Hid(inner)) => {
            let (q, si) = replay(body, &enter_hide(s, name, *pending), inner)?;
            let (m, outer) = leave_hide(&si, s, name);
            Some((Process::hide(q, name.clone(), m), outer))
        }
        (Process::Ongoing { body, original }, Derivation::AtPass(od)) => {
            if let OngoingExpr::Running { expr, .. } = &**body {
                if matches!(**expr, AtomicExpr::End | AtomicExpr::Retry) {
                    return None;
                }
            }
            Some((
                Process::Ongoing {
                    body: Arc::new(replay_ongoing(body, od)?),
                    original: original.clone(),
                },
                s.clone(),
            ))
        }
        (Process::Choice { branches }, Derivation::CPass(inner)) => {
            let first = branches.first()?;
            if first.polarity != Polarity::In || s.contains(&first.channel) || branches.len() < 2 {
                return None;
            }
            replay(
                &Process::Choice {
                    branches: branches[1..].to_vec(),
                },
                s,
                inner,
            )
        }
        (_, Derivation::Axiom(r)) => replay_axiom(p, s, *r),
        _ => None,
    }
}

fn replay_axiom(p: &Process, s: &Multiset, r: Rule) -> Option<(Process, Multiset)> {
    let mut s2 = s.clone();
    match (r, p) {
        (Rule::Out, Process::Output { channel }) => Some((Process::Nil, s.with(channel.clone()))),
        (Rule::In, Process::Input { channel, body }) => s2.remove_one(channel).then(|| ((**body).clone(), s2)),
        (Rule::Rep, Process::Repl { channel, body, fired }) => s2.remove_one(channel).then(|| {
            (
                Process::par2(
                    (**body).clone(),
                    Process::Repl {
                        channel: channel.clone(),
                        body: body.clone(),
                        fired: fired + 1,
                    },
                ),
                s2,
            )
        }),
        (Rule::AtSt, Process::Atomic { expr }) => Some((
            Process::Ongoing {
                body: Arc::new(OngoingExpr::start(expr.clone(), s.clone())),
                original: expr.clone(),
            },
            s.clone(),
        )),
        (Rule::AtRe | Rule::AtFail | Rule::AtOk, Process::Ongoing { body, original }) => {
            let OngoingExpr::Running { expr, log, .. } = &**body else {
                return None;
            };
            let read = log.read_set();
            match (r, &**expr) {
                (Rule::AtRe, AtomicExpr::Retry) => Some((Process::Atomic { expr: original.clone() }, s.clone())),
                (Rule::AtFail, AtomicExpr::End) if !read.is_subset(s) => {
                    Some((Process::Atomic { expr: original.clone() }, s.clone()))
                }
                (Rule::AtOk, AtomicExpr::End) if read.is_subset(s) => {
                    Some((Process::outputs(&log.write_set()), s.difference(&read)))
                }
                _ => None,
            }
        }
        (Rule::CInp, Process::Choice { branches }) => {
            let b = branches.first()?;
            (b.polarity == Polarity::In && s2.remove_one(&b.channel)).then(|| ((*b.body).clone(), s2))
        }
        (Rule::COut, Process::Choice { branches }) => {
            let b = branches.first()?;
            (b.polarity == Polarity::Out).then(|| ((*b.body).clone(), s.with(b.channel.clone())))
        }
        _ => None,
    }
}
