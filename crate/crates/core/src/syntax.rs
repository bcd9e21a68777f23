//! Abstract syntax of atomic expressions and processes.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::log::{Action, Log};
use crate::multiset::Multiset;
use crate::name::Name;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum AtomicExpr {
    End,
    Retry,
    Prefix {
        action: Action,
        rest: Arc<AtomicExpr>,
    },
    OrElse {
        left: Arc<AtomicExpr>,
        right: Arc<AtomicExpr>,
    },
}

impl AtomicExpr {
    pub fn prefix(action: Action, rest: AtomicExpr) -> Self {
        AtomicExpr::Prefix {
            action,
            rest: Arc::new(rest),
        }
    }

    pub fn read(channel: Name, rest: AtomicExpr) -> Self {
        Self::prefix(Action::read(channel), rest)
    }

    pub fn write(channel: Name, rest: AtomicExpr) -> Self {
        Self::prefix(Action::write(channel), rest)
    }

    pub fn or_else(left: AtomicExpr, right: AtomicExpr) -> Self {
        AtomicExpr::OrElse {
            left: Arc::new(left),
            right: Arc::new(right),
        }
    }

    /// Right-nested `orElse` of the given branches; `retry` when empty.
    pub fn or_else_all(mut branches: Vec<AtomicExpr>) -> Self {
        let Some(mut acc) = branches.pop() else {
            return AtomicExpr::Retry;
        };
        while let Some(b) = branches.pop() {
            acc = Self::or_else(b, acc);
        }
        acc
    }

    /// Every read occurrence in the expression, as a multiset.
    pub fn read_occurrences(&self) -> Multiset {
        let mut m = Multiset::new();
        self.visit_actions(&mut |a| {
            if a.is_read() {
                m.insert(a.channel.clone());
            }
        });
        m
    }

    pub fn names(&self) -> BTreeSet<Name> {
        let mut s = BTreeSet::new();
        self.visit_actions(&mut |a| {
            s.insert(a.channel.clone());
        });
        s
    }

    fn visit_actions(&self, f: &mut impl FnMut(&Action)) {
        match self {
            AtomicExpr::End | AtomicExpr::Retry => {}
            AtomicExpr::Prefix { action, rest } => {
                f(action);
                rest.visit_actions(f);
            }
            AtomicExpr::OrElse { left, right } => {
                left.visit_actions(f);
                right.visit_actions(f);
            }
        }
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        match self {
            AtomicExpr::End | AtomicExpr::Retry => 1,
            AtomicExpr::Prefix { rest, .. } => 1 + rest.size(),
            AtomicExpr::OrElse { left, right } => 1 + left.size() + right.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            AtomicExpr::End | AtomicExpr::Retry => 0,
            AtomicExpr::Prefix { rest, .. } => 1 + rest.depth(),
            AtomicExpr::OrElse { left, right } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum OngoingExpr {
    Running {
        expr: Arc<AtomicExpr>,
        init: Multiset,
        log: Log,
    },
    OrElse {
        left: Arc<OngoingExpr>,
        right: Arc<OngoingExpr>,
    },
}

impl OngoingExpr {
    pub fn start(expr: Arc<AtomicExpr>, init: Multiset) -> Self {
        OngoingExpr::Running {
            expr,
            init,
            log: Log::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    In,
    Out,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChoiceBranch {
    pub polarity: Polarity,
    pub channel: Name,
    pub body: Arc<Process>,
}

impl ChoiceBranch {
    pub fn input(channel: Name, body: Process) -> Self {
        Self {
            polarity: Polarity::In,
            channel,
            body: Arc::new(body),
        }
    }

    pub fn output(channel: Name, body: Process) -> Self {
        Self {
            polarity: Polarity::Out,
            channel,
            body: Arc::new(body),
        }
    }
}

/// Processes. `Par` is n-ary; `Repl` counts how often it has fired so that
/// exploration can bound unfolding; `Hide` carries the number of pending
/// outputs on the hidden name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Process {
    Nil,
    Output {
        channel: Name,
    },
    Input {
        channel: Name,
        body: Arc<Process>,
    },
    Repl {
        channel: Name,
        body: Arc<Process>,
        fired: u32,
    },
    Par {
        parts: Vec<Process>,
    },
    Hide {
        body: Arc<Process>,
        name: Name,
        pending: u32,
    },
    Atomic {
        expr: Arc<AtomicExpr>,
    },
    Ongoing {
        body: Arc<OngoingExpr>,
        original: Arc<AtomicExpr>,
    },
    Choice {
        branches: Vec<ChoiceBranch>,
    },
}

impl Process {
    pub fn output(channel: Name) -> Self {
        Process::Output { channel }
    }

    pub fn input(channel: Name, body: Process) -> Self {
        Process::Input {
            channel,
            body: Arc::new(body),
        }
    }

    pub fn repl(channel: Name, body: Process) -> Self {
        Process::Repl {
            channel,
            body: Arc::new(body),
            fired: 0,
        }
    }

    pub fn par(parts: Vec<Process>) -> Self {
        match parts.len() {
            0 => Process::Nil,
            1 => parts.into_iter().next().unwrap(),
            _ => Process::Par { parts },
        }
    }

    pub fn par2(l: Process, r: Process) -> Self {
        Process::Par { parts: vec![l, r] }
    }

    pub fn hide(body: Process, name: Name, pending: u32) -> Self {
        Process::Hide {
            body: Arc::new(body),
            name,
            pending,
        }
    }

    pub fn atomic(expr: AtomicExpr) -> Self {
        Process::Atomic { expr: Arc::new(expr) }
    }

    pub fn choice(branches: Vec<ChoiceBranch>) -> Self {
        Process::Choice { branches }
    }

    /// `a1! | ... | an!` for the elements of `m`, `0` when empty.
    pub fn outputs(m: &Multiset) -> Self {
        Process::par(m.elements().into_iter().map(Process::output).collect())
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Process::Nil)
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut s = BTreeSet::new();
        self.collect_names(&mut s, true);
        s
    }

    /// Free and bound names, including hidden ones.
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut s = BTreeSet::new();
        self.collect_names(&mut s, false);
        s
    }

    fn collect_names(&self, out: &mut BTreeSet<Name>, free_only: bool) {
        match self {
            Process::Nil => {}
            Process::Output { channel } => {
                out.insert(channel.clone());
            }
            Process::Input { channel, body } | Process::Repl { channel, body, .. } => {
                out.insert(channel.clone());
                body.collect_names(out, free_only);
            }
            Process::Par { parts } => parts.iter().for_each(|p| p.collect_names(out, free_only)),
            Process::Hide { body, name, .. } => {
                let mut inner = BTreeSet::new();
                body.collect_names(&mut inner, free_only);
                if free_only {
                    inner.remove(name);
                } else {
                    inner.insert(name.clone());
                }
                out.extend(inner);
            }
            Process::Atomic { expr } => out.extend(expr.names()),
            Process::Ongoing { original, .. } => out.extend(original.names()),
            Process::Choice { branches } => {
                for b in branches {
                    out.insert(b.channel.clone());
                    b.body.collect_names(out, free_only);
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Process::Nil | Process::Output { .. } => 1,
            Process::Input { body, .. } | Process::Repl { body, .. } => 1 + body.size(),
            Process::Par { parts } => 1 + parts.iter().map(Process::size).sum::<usize>(),
            Process::Hide { body, .. } => 1 + body.size(),
            Process::Atomic { expr } => 1 + expr.size(),
            Process::Ongoing { original, .. } => 1 + original.size(),
            Process::Choice { branches } => 1 + branches.iter().map(|b| 1 + b.body.size()).sum::<usize>(),
        }
    }

    pub fn contains_choice(&self) -> bool {
        match self {
            Process::Choice { .. } => true,
            Process::Input { body, .. } | Process::Repl { body, .. } | Process::Hide { body, .. } => {
                body.contains_choice()
            }
            Process::Par { parts } => parts.iter().any(Process::contains_choice),
            _ => false,
        }
    }

    /// Top-level parallel components, looking through nested `Par` nodes.
    pub fn components(&self) -> Vec<&Process> {
        let mut v = Vec::new();
        fn go<'a>(p: &'a Process, v: &mut Vec<&'a Process>) {
            match p {
                Process::Par { parts } => parts.iter().for_each(|q| go(q, v)),
                Process::Nil => {}
                _ => v.push(p),
            }
        }
        go(self, &mut v);
        v
    }

    /// Applies `f` to every name, free or bound.
    pub fn rename(&self, f: &impl Fn(&Name) -> Name) -> Process {
        let rb = |b: &Arc<Process>| Arc::new(b.rename(f));
        match self {
            Process::Nil => Process::Nil,
            Process::Output { channel } => Process::Output { channel: f(channel) },
            Process::Input { channel, body } => Process::Input {
                channel: f(channel),
                body: rb(body),
            },
            Process::Repl { channel, body, fired } => Process::Repl {
                channel: f(channel),
                body: rb(body),
                fired: *fired,
            },
            Process::Par { parts } => Process::Par {
                parts: parts.iter().map(|p| p.rename(f)).collect(),
            },
            Process::Hide { body, name, pending } => Process::Hide {
                body: rb(body),
                name: f(name),
                pending: *pending,
            },
            Process::Atomic { expr } => Process::Atomic {
                expr: Arc::new(rename_expr(expr, f)),
            },
            Process::Ongoing { body, original } => Process::Ongoing {
                body: Arc::new(rename_ongoing(body, f)),
                original: Arc::new(rename_expr(original, f)),
            },
            Process::Choice { branches } => Process::Choice {
                branches: branches
                    .iter()
                    .map(|b| ChoiceBranch {
                        polarity: b.polarity,
                        channel: f(&b.channel),
                        body: rb(&b.body),
                    })
                    .collect(),
            },
        }
    }

    /// Replaces machine-generated `$`-names by plain names (`$k1` becomes
    /// `k1`, or `k1_`, `k1__`... when `k1` is already used).
    pub fn export_fresh(&self) -> Process {
        let all = self.all_names();
        let mut used: BTreeSet<String> = all
            .iter()
            .filter(|n| !n.is_fresh())
            .map(|n| n.as_str().to_string())
            .collect();
        let mut map = std::collections::BTreeMap::new();
        for n in all.iter().filter(|n| n.is_fresh()) {
            let mut cand = n.as_str()[1..].to_string();
            while used.contains(&cand) {
                cand.push('_');
            }
            used.insert(cand.clone());
            map.insert(n.clone(), Name::raw(&cand));
        }
        self.rename(&|n| map.get(n).cloned().unwrap_or_else(|| n.clone()))
    }
}

fn rename_action(a: &Action, f: &impl Fn(&Name) -> Name) -> Action {
    Action {
        kind: a.kind,
        channel: f(&a.channel),
    }
}

pub(crate) fn rename_expr(m: &AtomicExpr, f: &impl Fn(&Name) -> Name) -> AtomicExpr {
    match m {
        AtomicExpr::End => AtomicExpr::End,
        AtomicExpr::Retry => AtomicExpr::Retry,
        AtomicExpr::Prefix { action, rest } => AtomicExpr::prefix(rename_action(action, f), rename_expr(rest, f)),
        AtomicExpr::OrElse { left, right } => AtomicExpr::or_else(rename_expr(left, f), rename_expr(right, f)),
    }
}

fn rename_ms(m: &Multiset, f: &impl Fn(&Name) -> Name) -> Multiset {
    m.elements().iter().map(f).collect()
}

fn rename_ongoing(a: &OngoingExpr, f: &impl Fn(&Name) -> Name) -> OngoingExpr {
    match a {
        OngoingExpr::Running { expr, init, log } => OngoingExpr::Running {
            expr: Arc::new(rename_expr(expr, f)),
            init: rename_ms(init, f),
            log: Log(log.0.iter().map(|x| rename_action(x, f)).collect()),
        },
        OngoingExpr::OrElse { left, right } => OngoingExpr::OrElse {
            left: Arc::new(rename_ongoing(left, f)),
            right: Arc::new(rename_ongoing(right, f)),
        },
    }
}
