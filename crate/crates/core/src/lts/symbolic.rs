//! Labelled successors computed once per term, with the state left symbolic.
//!
//! Each candidate step carries the multiset it needs from the environment,
//! a list of multisets that must *not* be included in it, and its effect.
//! Requirements on hidden names are discharged at the enclosing hide, using
//! the concrete annotation. A step exists for some state of a universe iff
//! its own need lies in the universe and no forbidden multiset fits inside
//! that need (forbidden-inclusion only gets easier to avoid on smaller states).

use std::sync::Arc;

use super::label::Label;
use crate::atomic::StateUniverse;
use crate::multiset::Multiset;
use crate::name::Name;
use crate::reduce::canon::{canonical, max_hidden_pending, max_repl_fired};
use crate::reduce::step_ongoing;
use crate::syntax::{ChoiceBranch, OngoingExpr, Polarity, Process};
use crate::AtomicExpr;

#[derive(Clone, Debug)]
pub(crate) enum Effect {
    Out(Name),
    Consume(Multiset),
}

#[derive(Clone, Debug)]
pub(crate) struct Template {
    pub need: Multiset,
    pub forbid: Vec<Multiset>,
    pub effect: Effect,
    pub result: Process,
}

impl Template {
    fn plain(effect: Effect, need: Multiset, result: Process) -> Self {
        Self {
            need,
            forbid: vec![],
            effect,
            result,
        }
    }
}

fn tau() -> Effect {
    Effect::Consume(Multiset::new())
}

pub(crate) fn templates(p: &Process) -> Vec<Template> {
    match p {
        Process::Nil => vec![],
        Process::Output { channel } => vec![Template::plain(
            Effect::Out(channel.clone()),
            Multiset::new(),
            Process::Nil,
        )],
        Process::Input { channel, body } => {
            let a = Multiset::singleton(channel.clone());
            vec![Template::plain(Effect::Consume(a.clone()), a, (**body).clone())]
        }
        Process::Repl { channel, body, fired } => {
            let a = Multiset::singleton(channel.clone());
            let unfolded = Process::par2(
                (**body).clone(),
                Process::Repl {
                    channel: channel.clone(),
                    body: body.clone(),
                    fired: fired + 1,
                },
            );
            vec![Template::plain(Effect::Consume(a.clone()), a, unfolded)]
        }
        Process::Par { parts } => par_templates(parts),
        Process::Hide { body, name, pending } => templates(body)
            .into_iter()
            .filter_map(|t| through_hide(t, name, *pending))
            .collect(),
        Process::Atomic { expr } => start_templates(expr),
        Process::Ongoing { body, original } => ongoing_templates(body, original),
        Process::Choice { branches } => choice_templates(branches),
    }
}

fn par_templates(parts: &[Process]) -> Vec<Template> {
    let local: Vec<Vec<Template>> = parts.iter().map(templates).collect();
    let mut out = Vec::new();
    for (i, ts) in local.iter().enumerate() {
        for t in ts {
            let mut v = parts.to_vec();
            v[i] = t.result.clone();
            out.push(Template {
                result: Process::Par { parts: v },
                ..t.clone()
            });
        }
    }
    for (i, senders) in local.iter().enumerate() {
        for s in senders {
            let Effect::Out(a) = &s.effect else { continue };
            let single = Multiset::singleton(a.clone());
            for (j, receivers) in local.iter().enumerate() {
                if j == i {
                    continue;
                }
                for r in receivers {
                    match &r.effect {
                        Effect::Consume(th) if *th == single => {}
                        _ => continue,
                    }
                    // the receiver runs on σ ⊎ {a}: shift its guards by `a`
                    let mut forbid = s.forbid.clone();
                    let mut ok = true;
                    for f in &r.forbid {
                        let g = f.difference(&single);
                        if g.is_empty() {
                            ok = false;
                            break;
                        }
                        forbid.push(g);
                    }
                    if !ok {
                        continue;
                    }
                    let mut v = parts.to_vec();
                    v[i] = s.result.clone();
                    v[j] = r.result.clone();
                    out.push(Template {
                        need: s.need.join(&r.need.difference(&single)),
                        forbid,
                        effect: tau(),
                        result: Process::Par { parts: v },
                    });
                }
            }
        }
    }
    out
}

fn through_hide(t: Template, a: &Name, n: u32) -> Option<Template> {
    if t.need.count(a) > n {
        return None;
    }
    let mut forbid = Vec::with_capacity(t.forbid.len());
    for f in t.forbid {
        if f.count(a) > n {
            continue;
        }
        let g = f.without(a);
        if g.is_empty() {
            return None;
        }
        forbid.push(g);
    }
    let (effect, m) = match t.effect {
        Effect::Out(b) if b == *a => (tau(), n + 1),
        Effect::Out(b) => (Effect::Out(b), n),
        Effect::Consume(th) => {
            let m = n - th.count(a);
            (Effect::Consume(th.without(a)), m)
        }
    };
    Some(Template {
        need: t.need.without(a),
        forbid,
        effect,
        result: Process::Hide {
            body: Arc::new(t.result),
            name: a.clone(),
            pending: m,
        },
    })
}

/// `(atSt)`: one template per observable captured state. A captured count
/// below the cap pins the environment count exactly; the cap means "at least".
fn start_templates(expr: &Arc<AtomicExpr>) -> Vec<Template> {
    let caps: Vec<(Name, u32)> = expr.read_occurrences().iter().map(|(n, c)| (n.clone(), c)).collect();
    let mut out = Vec::new();
    let mut digits = vec![0u32; caps.len()];
    loop {
        let mut need = Multiset::new();
        let mut forbid = Vec::new();
        for (i, (n, cap)) in caps.iter().enumerate() {
            need.insert_n(n.clone(), digits[i]);
            if digits[i] < *cap {
                let mut f = Multiset::new();
                f.insert_n(n.clone(), digits[i] + 1);
                forbid.push(f);
            }
        }
        out.push(Template {
            need: need.clone(),
            forbid,
            effect: tau(),
            result: Process::Ongoing {
                body: Arc::new(OngoingExpr::start(expr.clone(), need)),
                original: expr.clone(),
            },
        });
        let mut i = caps.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if digits[i] < caps[i].1 {
                digits[i] += 1;
                break;
            }
            digits[i] = 0;
        }
    }
}

fn ongoing_templates(body: &Arc<OngoingExpr>, original: &Arc<AtomicExpr>) -> Vec<Template> {
    let restart = || Process::Atomic { expr: original.clone() };
    if let OngoingExpr::Running { expr, log, .. } = &**body {
        match **expr {
            AtomicExpr::Retry => return vec![Template::plain(tau(), Multiset::new(), restart())],
            AtomicExpr::End => {
                let read = log.read_set();
                let mut v = vec![Template::plain(
                    Effect::Consume(read.clone()),
                    read.clone(),
                    Process::outputs(&log.write_set()),
                )];
                if !read.is_empty() {
                    v.push(Template {
                        need: Multiset::new(),
                        forbid: vec![read],
                        effect: tau(),
                        result: restart(),
                    });
                }
                return v;
            }
            _ => {}
        }
    }
    step_ongoing(body)
        .into_iter()
        .map(|(_, a)| {
            Template::plain(
                tau(),
                Multiset::new(),
                Process::Ongoing {
                    body: Arc::new(a),
                    original: original.clone(),
                },
            )
        })
        .collect()
}

fn choice_templates(branches: &[ChoiceBranch]) -> Vec<Template> {
    let Some(first) = branches.first() else { return vec![] };
    let a = Multiset::singleton(first.channel.clone());
    match first.polarity {
        Polarity::Out => vec![Template::plain(
            Effect::Out(first.channel.clone()),
            Multiset::new(),
            (*first.body).clone(),
        )],
        Polarity::In => {
            let mut v = vec![Template::plain(
                Effect::Consume(a.clone()),
                a.clone(),
                (*first.body).clone(),
            )];
            if branches.len() > 1 {
                for mut t in choice_templates(&branches[1..]) {
                    t.forbid.push(a.clone());
                    v.push(t);
                }
            }
            v
        }
    }
}

/// Bounds on the terms an LTS may contain.
#[derive(Clone, Debug)]
pub struct LtsBounds {
    pub max_repl_unfold: u32,
    pub max_multiplicity: u32,
}

impl Default for LtsBounds {
    fn default() -> Self {
        Self {
            max_repl_unfold: 3,
            max_multiplicity: 4,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LabeledSuccessors {
    pub edges: Vec<(Label, Process)>,
    /// Some successor was dropped because it exceeded the bounds.
    pub truncated: bool,
}

/// `P →μ P'` for every `μ` witnessed by some state of `env`; results are
/// canonical, sorted and deduplicated.
pub fn labeled_successors(p: &Process, env: &StateUniverse, bounds: &LtsBounds) -> LabeledSuccessors {
    let mut out = LabeledSuccessors::default();
    for t in templates(p) {
        if !env.contains(&t.need) || t.forbid.iter().any(|f| f.is_subset(&t.need)) {
            continue;
        }
        let label = match t.effect {
            Effect::Out(a) => Label::Out(a),
            Effect::Consume(th) => Label::Block(th),
        };
        let q = canonical(&t.result);
        if max_repl_fired(&q) > bounds.max_repl_unfold || max_hidden_pending(&q) > bounds.max_multiplicity {
            out.truncated = true;
            continue;
        }
        out.edges.push((label, q));
    }
    out.edges.sort();
    out.edges.dedup();
    out
}
