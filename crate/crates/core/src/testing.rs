//! May-testing: traces and their preorder, canonical observers, the
//! alternative (trace-based) preorder and the CCS reading of normal forms.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use crate::atomic::{chain_actions, is_normal_form, top_branches, StateUniverse};
use crate::error::{ExploreError, TermError};
use crate::lts::{Label, Lts, LtsConfig, StateId};
use crate::multiset::Multiset;
use crate::name::{FreshSupply, Name};
use crate::reduce::{search, Bounds, Configuration};
use crate::syntax::{AtomicExpr, ChoiceBranch, Process};

/// The success signal of observers.
pub fn success_name() -> Name {
    Name::from_static("w")
}

/// Outputs and non-empty blocks; never `τ`.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Trace(Vec<Label>);

impl Trace {
    pub fn new(labels: Vec<Label>) -> Result<Self, TermError> {
        if labels.iter().any(Label::is_tau) {
            return Err(TermError::Invalid("traces cannot contain tau".into()));
        }
        Ok(Trace(labels))
    }

    pub fn empty() -> Self {
        Trace(vec![])
    }

    pub fn parse(s: &str) -> Result<Self, TermError> {
        let s = s.trim();
        if s.is_empty() || s == "eps" {
            return Ok(Trace::empty());
        }
        Trace::new(crate::lts::parse_labels(s)?)
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> BTreeSet<Name> {
        self.0.iter().flat_map(|l| l.names()).collect()
    }

    /// Every block split into singleton blocks in name order.
    pub fn canonical(&self) -> Trace {
        let mut v = Vec::with_capacity(self.0.len());
        for l in &self.0 {
            match l {
                Label::Out(_) => v.push(l.clone()),
                Label::Block(m) => v.extend(m.elements().into_iter().map(Label::input)),
            }
        }
        Trace(v)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("eps");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `ā ↦ {a}`, `{a1..an} ↦ ā1 … ān`.
pub fn cotrace(s: &Trace) -> Trace {
    let mut v = Vec::new();
    for l in &s.0 {
        match l {
            Label::Out(a) => v.push(Label::input(a.clone())),
            Label::Block(m) => v.extend(m.elements().into_iter().map(Label::Out)),
        }
    }
    Trace(v)
}

const REWRITE_CAP: usize = 500_000;

fn is_input(l: &Label) -> bool {
    matches!(l, Label::Block(_))
}

/// Everything reachable from the canonical form of `s` by deleting an
/// input, moving an input one place to the right, or cancelling an input
/// immediately followed by the matching output.
pub fn rewrite_closure(s: &Trace) -> Result<HashSet<Trace>, ExploreError> {
    let start = s.canonical();
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        let v = &t.0;
        let mut next = Vec::new();
        for i in 0..v.len() {
            if !is_input(&v[i]) {
                continue;
            }
            let mut d = v.clone();
            d.remove(i);
            next.push(d);
            if i + 1 < v.len() {
                let mut p = v.clone();
                p.swap(i, i + 1);
                next.push(p);
                if let (Label::Block(m), Label::Out(a)) = (&v[i], &v[i + 1]) {
                    if m.count(a) == 1 {
                        let mut c = v.clone();
                        c.drain(i..i + 2);
                        next.push(c);
                    }
                }
            }
        }
        for n in next {
            let n = Trace(n);
            if seen.insert(n.clone()) {
                if seen.len() > REWRITE_CAP {
                    return Err(ExploreError::ResourceExhausted {
                        what: "trace rewrites",
                        limit: REWRITE_CAP,
                    });
                }
                queue.push_back(n);
            }
        }
    }
    Ok(seen)
}

/// `s' ≼ s` by rewriting `s`.
pub fn trace_preorder_rewrite(s_prime: &Trace, s: &Trace) -> Result<bool, ExploreError> {
    Ok(rewrite_closure(s)?.contains(&s_prime.canonical()))
}

/// `O(ε) = w!`, `O(ā s) = a?.O(s)`, `O({a..} s) = a! | .. | O(s)`.
pub fn observer(s: &Trace) -> Process {
    s.0.iter()
        .rev()
        .fold(Process::output(success_name()), |acc, l| match l {
            Label::Out(a) => Process::input(a.clone(), acc),
            Label::Block(m) => Process::par2(Process::outputs(m), acc),
        })
}

/// States reachable from `start` by weak moves spelling `labels`.
fn weak_sequence(lts: &mut Lts, start: StateId, labels: &[Label]) -> BTreeSet<StateId> {
    let mut cur: BTreeSet<StateId> = lts.tau_closure(start).iter().copied().collect();
    for l in labels {
        let mut next = BTreeSet::new();
        for x in cur {
            next.extend(lts.weak(x, l));
        }
        cur = next;
    }
    cur
}

/// `s' ≼ s` decided on the observer of `s`: it must be able to perform
/// `cotrace(s')` and then signal success.
pub fn trace_preorder_observer(s_prime: &Trace, s: &Trace) -> bool {
    let o = observer(s);
    let names = s.names().into_iter().chain(s_prime.names());
    let mut lts = Lts::new(LtsConfig::new(StateUniverse::new(names, 1)));
    let root = lts.intern(&o);
    let co = cotrace(s_prime);
    let ends = weak_sequence(&mut lts, root, co.labels());
    let w = Label::Out(success_name());
    ends.into_iter().any(|x| !lts.weak(x, &w).is_empty())
}

/// Observers may contain inputs, outputs, parallel composition and the
/// success signal only.
pub fn check_observer(o: &Process) -> Result<(), TermError> {
    fn go(p: &Process, w: &Name) -> Result<(), TermError> {
        match p {
            Process::Nil | Process::Output { .. } => Ok(()),
            Process::Input { channel, body } | Process::Repl { channel, body, .. } => {
                if channel == w {
                    return Err(TermError::ReservedName(w.to_string()));
                }
                go(body, w)
            }
            Process::Par { parts } => parts.iter().try_for_each(|q| go(q, w)),
            Process::Hide { body, name, .. } => {
                if name == w {
                    return Err(TermError::ReservedName(w.to_string()));
                }
                go(body, w)
            }
            Process::Choice { branches } => branches.iter().try_for_each(|b| {
                if b.channel == *w && b.polarity == crate::syntax::Polarity::In {
                    return Err(TermError::ReservedName(w.to_string()));
                }
                go(&b.body, w)
            }),
            Process::Atomic { .. } | Process::Ongoing { .. } => {
                Err(TermError::Invalid("observers cannot contain atomic blocks".into()))
            }
        }
    }
    go(o, &success_name())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MayResult {
    pub passes: bool,
    pub truncated: bool,
    pub explored: usize,
}

fn succeeded(c: &Configuration) -> bool {
    let w = success_name();
    c.state.contains(&w)
        || c.process
            .components()
            .iter()
            .any(|q| matches!(q, Process::Output { channel } if *channel == w))
}

/// Whether some computation of `p | o` from the empty state signals success.
pub fn may_passes(p: &Process, o: &Process, bounds: &Bounds) -> Result<MayResult, TermError> {
    let w = success_name();
    if p.all_names().contains(&w) {
        return Err(TermError::ReservedName(w.to_string()));
    }
    check_observer(o)?;
    let init = Configuration::new(Process::par2(p.clone(), o.clone()), Multiset::new());
    match search(&init, bounds, succeeded) {
        Ok(r) => Ok(MayResult {
            passes: r.path.is_some(),
            truncated: r.truncated,
            explored: r.explored,
        }),
        Err(ExploreError::ResourceExhausted { .. }) => Ok(MayResult {
            passes: false,
            truncated: true,
            explored: bounds.max_nodes,
        }),
        Err(ExploreError::Term(e)) => Err(e),
    }
}

/// Weak traces up to a length, keyed as performed (blocks intact).
#[derive(Clone, Debug, Default)]
pub struct TraceSet {
    pub traces: BTreeSet<Trace>,
    /// Some trace of the maximal length can be extended.
    pub longer: bool,
    pub truncated: bool,
}

pub fn weak_traces(lts: &mut Lts, start: StateId, max_len: usize) -> TraceSet {
    fn go(lts: &mut Lts, set: BTreeSet<StateId>, prefix: &mut Vec<Label>, max: usize, out: &mut TraceSet) {
        out.traces.insert(Trace(prefix.clone()));
        let mut moves: BTreeMap<Label, BTreeSet<StateId>> = BTreeMap::new();
        for x in set {
            out.truncated |= lts.is_truncated(x);
            for (l, y) in lts.successors(x).iter() {
                if !l.is_tau() {
                    let c = lts.tau_closure(*y);
                    moves.entry(l.clone()).or_default().extend(c.iter().copied());
                }
            }
        }
        if moves.is_empty() {
            return;
        }
        if prefix.len() == max {
            out.longer = true;
            return;
        }
        for (l, next) in moves {
            prefix.push(l);
            go(lts, next, prefix, max, out);
            prefix.pop();
        }
    }
    let mut out = TraceSet::default();
    let start_set = lts.tau_closure(start).iter().copied().collect();
    go(lts, start_set, &mut vec![], max_len, &mut out);
    out
}

#[derive(Clone, Debug)]
pub struct AltConfig {
    pub lts: LtsConfig,
    pub trace_len: usize,
}

impl AltConfig {
    /// Free names of both terms, multiplicity 2, traces up to 6 actions.
    pub fn for_pair(p: &Process, q: &Process) -> Self {
        Self {
            lts: LtsConfig::for_terms(&[p, q], 2),
            trace_len: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PreorderVerdict {
    Holds,
    Fails { witness: Trace },
    Unknown { reason: String },
}

impl PreorderVerdict {
    pub fn holds(&self) -> Option<bool> {
        match self {
            PreorderVerdict::Holds => Some(true),
            PreorderVerdict::Fails { .. } => Some(false),
            PreorderVerdict::Unknown { .. } => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            PreorderVerdict::Holds => json!({"verdict": "holds"}),
            PreorderVerdict::Fails { witness } => json!({
                "verdict": "fails",
                "witness": witness.labels().iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            }),
            PreorderVerdict::Unknown { reason } => json!({"verdict": "unknown", "reason": reason}),
        }
    }
}

/// Every weak trace `s` of `p` must have some `s' ≼ s` among the weak
/// traces of `q`. Traces of `p` are explored up to `trace_len` actions.
pub fn alt_preorder(p: &Process, q: &Process, cfg: &AltConfig) -> PreorderVerdict {
    let mut lts = Lts::new(cfg.lts.clone());
    let (ps, qs) = (lts.intern(p), lts.intern(q));
    let tp = weak_traces(&mut lts, ps, cfg.trace_len);
    let need = tp.traces.iter().map(|s| s.canonical().len()).max().unwrap_or(0);
    let tq = weak_traces(&mut lts, qs, need);
    let q_canon: HashSet<Trace> = tq.traces.iter().map(Trace::canonical).collect();
    let mut ordered: Vec<&Trace> = tp.traces.iter().collect();
    ordered.sort_by_key(|s| (s.len(), (*s).clone()));
    for s in ordered {
        if q_canon.contains(&s.canonical()) {
            continue;
        }
        let closure = match rewrite_closure(s) {
            Ok(c) => c,
            Err(e) => return PreorderVerdict::Unknown { reason: e.to_string() },
        };
        if !closure.iter().any(|t| q_canon.contains(t)) {
            if tq.truncated {
                return PreorderVerdict::Unknown {
                    reason: "the right-hand transition system was truncated".into(),
                };
            }
            return PreorderVerdict::Fails { witness: s.clone() };
        }
    }
    if tp.longer {
        return PreorderVerdict::Unknown {
            reason: format!("traces longer than {} actions were not examined", cfg.trace_len),
        };
    }
    if tp.truncated {
        return PreorderVerdict::Unknown {
            reason: "the left-hand transition system was truncated".into(),
        };
    }
    PreorderVerdict::Holds
}

/// Reads in order, then the writes in parallel. A branch without reads
/// cannot be a guarded choice branch: a single write becomes an output
/// branch, several writes are released through a hidden signal
/// `k!.0 + … | k?.(b1! | … | bl!)` so that their order stays free. A bare
/// `end` after other branches adds nothing under may-testing and is dropped.
pub fn ccs_translation(m: &AtomicExpr) -> Result<Process, TermError> {
    if !is_normal_form(m) {
        return Err(TermError::NotNormalForm(m.to_string()));
    }
    if *m == AtomicExpr::Retry {
        return Ok(Process::Nil);
    }
    let branches = top_branches(m);
    let chains: Vec<_> = branches
        .iter()
        .map(|b| chain_actions(b).expect("normal forms are chains"))
        .collect();
    if chains.len() == 1 && chains[0].is_empty() {
        return Ok(Process::Nil);
    }
    let mut fresh = FreshSupply::new();
    let mut released = Vec::new();
    let mut out = Vec::new();
    for (i, chain) in chains.iter().enumerate() {
        let reads: Vec<Name> = chain
            .iter()
            .filter(|a| a.is_read())
            .map(|a| a.channel.clone())
            .collect();
        let writes: Multiset = chain
            .iter()
            .filter(|a| !a.is_read())
            .map(|a| a.channel.clone())
            .collect();
        let body = Process::outputs(&writes);
        match reads.split_first() {
            Some((first, rest)) => {
                let inner = rest.iter().rev().fold(body, |acc, a| Process::input(a.clone(), acc));
                out.push(ChoiceBranch::input(first.clone(), inner));
            }
            None => match writes.elements().as_slice() {
                [] => debug_assert!(i == chains.len() - 1),
                [b] => out.push(ChoiceBranch::output(b.clone(), Process::Nil)),
                _ => {
                    let k = fresh.next("k");
                    out.push(ChoiceBranch::output(k.clone(), Process::Nil));
                    released.push((k, writes));
                }
            },
        }
    }
    let mut parts = vec![Process::choice(out)];
    parts.extend(
        released
            .iter()
            .map(|(k, w)| Process::input(k.clone(), Process::outputs(w))),
    );
    Ok(released
        .into_iter()
        .fold(Process::par(parts), |acc, (k, _)| Process::hide(acc, k, 0)))
}

/// Observers over `names` built from `0`, `w!`, `a!`, `a?.O` and `O | O`,
/// of height at most `depth` (prefixes and binary compositions each add a
/// level); only those that can signal success.
pub fn enumerate_observers(names: &[Name], depth: usize) -> Vec<Process> {
    let w = success_name();
    let mut level: BTreeSet<Process> = BTreeSet::new();
    if depth == 0 {
        return vec![];
    }
    level.insert(Process::Nil);
    level.insert(Process::output(w.clone()));
    for a in names {
        level.insert(Process::output(a.clone()));
    }
    for _ in 1..depth {
        let prev: Vec<Process> = level.iter().cloned().collect();
        for o in &prev {
            for a in names {
                level.insert(Process::input(a.clone(), o.clone()));
            }
        }
        for (i, x) in prev.iter().enumerate() {
            for y in &prev[i..] {
                level.insert(crate::reduce::canonical(&Process::par2(x.clone(), y.clone())));
            }
        }
    }
    level.into_iter().filter(|o| o.all_names().contains(&w)).collect()
}

/// Default exploration bounds for may-testing.
pub fn may_bounds() -> Bounds {
    Bounds {
        max_nodes: 50_000,
        ..Bounds::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_expr, parse_process};

    fn t(s: &str) -> Trace {
        Trace::parse(s).unwrap()
    }

    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    #[test]
    fn cotraces() {
        assert_eq!(cotrace(&t("")).to_string(), "eps");
        assert_eq!(cotrace(&t("a!")).to_string(), "{a}");
        assert_eq!(cotrace(&t("{a,b}")).to_string(), "a! b!");
        assert!(Trace::parse("tau").is_err());
    }

    #[test]
    fn rewrite_laws() {
        assert!(trace_preorder_rewrite(&t("a! b!"), &t("a! {c} b!")).unwrap());
        assert!(trace_preorder_rewrite(&t("{a} {b}"), &t("{a,b}")).unwrap());
        assert!(trace_preorder_rewrite(&t("{a,b}"), &t("{b} {a}")).unwrap());
        assert!(trace_preorder_rewrite(&t("{a} a! b!"), &t("{a} a! b!")).unwrap());
        assert!(trace_preorder_rewrite(&t("{a}"), &t("{a} a! {a}")).unwrap());
        assert!(!trace_preorder_rewrite(&t("a!"), &t("{a}")).unwrap());
        assert!(trace_preorder_rewrite(&t(""), &t("{a} {b}")).unwrap());
        // inputs move later, never earlier
        assert!(trace_preorder_rewrite(&t("a! {b}"), &t("{b} a!")).unwrap());
        assert!(!trace_preorder_rewrite(&t("{b} a!"), &t("a! {b}")).unwrap());
    }

    #[test]
    fn observers() {
        assert_eq!(observer(&t("")).to_string(), "w!");
        assert_eq!(observer(&t("a! {b}")).to_string(), "a?.(b! | w!)");
        assert_eq!(
            crate::reduce::canonical(&observer(&t("{a,b}"))).to_string(),
            "a! | b! | w!"
        );
    }

    #[test]
    fn observer_decision_examples() {
        assert!(trace_preorder_observer(&t("{a}"), &t("{a} a! {a}")));
        assert!(!trace_preorder_observer(&t("a!"), &t("{a}")));
        assert!(trace_preorder_observer(&t(""), &t("{a} {b}")));
        assert!(trace_preorder_observer(&t("a! {b}"), &t("{b} a!")));
        assert!(!trace_preorder_observer(&t("{b} a!"), &t("a! {b}")));
    }

    #[test]
    fn may_examples() {
        let b = may_bounds();
        assert!(may_passes(&p("a!"), &p("a?.w!"), &b).unwrap().passes);
        assert!(may_passes(&p("0"), &p("w!"), &b).unwrap().passes);
        assert!(!may_passes(&p("0"), &p("a?.w!"), &b).unwrap().passes);
        assert!(may_passes(&p("w!"), &p("0"), &b).is_err());
        assert!(may_passes(&p("0"), &p("atomic(end)"), &b).is_err());
    }

    #[test]
    fn alt_examples() {
        let check = |a: &str, b: &str| {
            let (x, y) = (p(a), p(b));
            alt_preorder(&x, &y, &AltConfig::for_pair(&x, &y))
        };
        assert_eq!(check("a?.b!", "a?.b!"), PreorderVerdict::Holds);
        assert_eq!(check("a?.0", "0"), PreorderVerdict::Holds);
        assert_eq!(check("a!", "0"), PreorderVerdict::Fails { witness: t("a!") });
        assert_eq!(check("atomic(a?.b!.end)", "a?.b!"), PreorderVerdict::Holds);
        assert_eq!(check("a?.b!", "atomic(a?.b!.end)"), PreorderVerdict::Holds);
        let m = "b?.c?.end orElse c!.a!.c!.end";
        let tr = ccs_translation(&parse_expr(m).unwrap()).unwrap();
        let at = Process::atomic(parse_expr(m).unwrap());
        let cfg = AltConfig::for_pair(&at, &tr);
        assert_eq!(alt_preorder(&at, &tr, &cfg), PreorderVerdict::Holds);
        assert_eq!(alt_preorder(&tr, &at, &cfg), PreorderVerdict::Holds);
        assert!(matches!(
            check("*a?.a!", "0"),
            PreorderVerdict::Holds | PreorderVerdict::Unknown { .. }
        ));
    }

    #[test]
    fn translations() {
        let tr = |s: &str| ccs_translation(&parse_expr(s).unwrap()).map(|p| p.export_fresh().to_string());
        assert_eq!(tr("end").unwrap(), "0");
        assert_eq!(tr("a?.b!.end").unwrap(), "+a?.b!");
        assert_eq!(tr("a?.end orElse b?.c!.end").unwrap(), "a?.0 + b?.c!");
        assert_eq!(tr("a?.end orElse end").unwrap(), "+a?.0");
        assert_eq!(tr("a?.end orElse b!.end").unwrap(), "a?.0 + b!.0");
        assert_eq!(
            tr("a?.end orElse b!.c!.end").unwrap(),
            "(a?.0 + k1!.0 | k1?.(b! | c!)) \\ k1:0"
        );
        assert!(tr("a?.end orElse a?.b?.end").is_err());
    }

    #[test]
    fn observer_enumeration() {
        let names = [Name::from_static("a")];
        let o1 = enumerate_observers(&names, 1);
        assert_eq!(o1.len(), 1);
        let o2 = enumerate_observers(&names, 2);
        assert!(o2.iter().any(|o| o.to_string() == "a?.w!"));
        assert!(o2.iter().all(|o| check_observer(o).is_ok()));
    }
}
