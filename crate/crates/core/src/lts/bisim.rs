//! Bisimulation games over the lazy LTS.
//!
//! The pair graph is explored breadth-first from the queried pair. Two
//! greatest fixpoints are computed over it: an optimistic one, where pairs
//! that were not fully expanded count as related, and a pessimistic one,
//! where they do not. The pessimistic fixpoint is a genuine bisimulation
//! within the environment; a pair missing from the optimistic one has a
//! complete refutation, which becomes the witness.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::graph::{Lts, LtsConfig, StateId};
use super::label::Label;
use super::symbolic::LtsBounds;
use crate::atomic::StateUniverse;
use crate::multiset::Multiset;
use crate::reduce::canon::erase_repl_counters;
use crate::syntax::Process;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equivalence {
    Strong,
    Weak,
    WeakAsync,
}

impl fmt::Display for Equivalence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Equivalence::Strong => "strong",
            Equivalence::Weak => "weak",
            Equivalence::WeakAsync => "weak-async",
        })
    }
}

#[derive(Clone, Debug)]
pub struct BisimConfig {
    pub lts: LtsConfig,
    /// Cap on top-level pending outputs per name in a compensated pair.
    pub comp_bound: u32,
    pub max_pairs: usize,
}

impl BisimConfig {
    pub fn new(env: StateUniverse) -> Self {
        Self {
            lts: LtsConfig::new(env),
            comp_bound: 4,
            max_pairs: 20_000,
        }
    }

    /// Free names of both terms, multiplicity 2.
    pub fn for_pair(p: &Process, q: &Process) -> Self {
        Self::new(LtsConfig::for_terms(&[p, q], 2).env)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Reply {
    /// The block the defender used, for asynchronous block answers.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub via: Option<Multiset>,
    pub reached: Process,
    pub left: Process,
    pub right: Process,
    pub next: usize,
}

/// One attack: from `(left, right)`, `attacker` moves by `label` to
/// `target`; every answer leads to a node of lower rank.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessNode {
    pub rank: usize,
    pub left: Process,
    pub right: Process,
    pub attacker: Side,
    pub label: Label,
    pub target: Process,
    pub replies: Vec<Reply>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub equivalence: Equivalence,
    pub env: StateUniverse,
    pub comp_bound: u32,
    pub max_repl_unfold: u32,
    pub max_multiplicity: u32,
    pub root: usize,
    pub nodes: Vec<WitnessNode>,
}

impl Witness {
    pub fn root_node(&self) -> &WitnessNode {
        &self.nodes[self.root]
    }

    /// Human-readable strategy, one line per attack.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let who = match n.attacker {
                Side::Left => "left",
                Side::Right => "right",
            };
            s.push_str(&format!(
                "#{i} [{}] {} ~ {}\n  {who} plays {} to {}\n",
                n.rank, n.left, n.right, n.label, n.target
            ));
            if n.replies.is_empty() {
                s.push_str("  no answer\n");
            }
            for r in &n.replies {
                let via = r
                    .via
                    .as_ref()
                    .map(|g| format!(" via {}", Label::Block(g.clone())))
                    .unwrap_or_default();
                s.push_str(&format!("  answer{via} {} -> #{}\n", r.reached, r.next));
            }
        }
        s
    }
}

#[derive(Clone, Debug)]
pub enum BisimVerdict {
    Bisimilar { relation: Vec<(Process, Process)> },
    Distinguished { witness: Box<Witness> },
    Unknown { reason: String },
}

impl BisimVerdict {
    pub fn is_bisimilar(&self) -> bool {
        matches!(self, BisimVerdict::Bisimilar { .. })
    }

    pub fn is_distinguished(&self) -> bool {
        matches!(self, BisimVerdict::Distinguished { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            BisimVerdict::Bisimilar { .. } => "bisimilar",
            BisimVerdict::Distinguished { .. } => "distinguished",
            BisimVerdict::Unknown { .. } => "unknown",
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            BisimVerdict::Bisimilar { relation } => json!({
                "verdict": "bisimilar",
                "relation": relation.iter().map(|(p, q)| [p.to_string(), q.to_string()]).collect::<Vec<_>>(),
            }),
            BisimVerdict::Distinguished { witness } => json!({
                "verdict": "distinguished",
                "witness": witness,
            }),
            BisimVerdict::Unknown { reason } => json!({"verdict": "unknown", "reason": reason}),
        }
    }
}

#[derive(Clone, Debug)]
struct Answer {
    /// Index into the challenge's `blocks`.
    via: Option<u32>,
    reached: u32,
    pair: u32,
}

impl Answer {
    fn new(via: Option<usize>, reached: StateId, pair: usize) -> Self {
        Self {
            via: via.map(|v| v as u32),
            reached: reached as u32,
            pair: pair as u32,
        }
    }

    fn pair(&self) -> usize {
        self.pair as usize
    }
}

/// Defender answers to one challenge.
#[derive(Default)]
struct Answers {
    blocks: Vec<Multiset>,
    list: Vec<Answer>,
}

#[derive(Clone, Debug)]
struct Challenge {
    side: Side,
    label: Label,
    target: StateId,
    blocks: Vec<Multiset>,
    answers: Vec<Answer>,
    complete: bool,
}

#[derive(Clone, Debug)]
struct PairInfo {
    challenges: Vec<Challenge>,
    complete: bool,
}

struct Game {
    lts: Lts,
    mode: Equivalence,
    comp_bound: u32,
    pairs: Vec<(StateId, StateId)>,
    /// Pairs equal up to replication counters, closed without expansion.
    identity: Vec<bool>,
    erased: HashMap<StateId, Process>,
    index: HashMap<(StateId, StateId), usize>,
    info: Vec<Option<PairInfo>>,
    /// Why some pair or answer was left out; the first reason is reported.
    cut: Option<String>,
}

/// Top-level pending outputs of a canonical term.
fn top_outputs(p: &Process) -> Multiset {
    p.components()
        .iter()
        .filter_map(|c| match c {
            Process::Output { channel } => Some(channel.clone()),
            _ => None,
        })
        .collect()
}

impl Game {
    fn new(cfg: &BisimConfig, mode: Equivalence) -> Self {
        Self {
            lts: Lts::new(cfg.lts.clone()),
            mode,
            comp_bound: cfg.comp_bound,
            pairs: vec![],
            identity: vec![],
            erased: HashMap::new(),
            index: HashMap::new(),
            info: vec![],
            cut: None,
        }
    }

    fn note(&mut self, why: impl FnOnce() -> String) {
        if self.cut.is_none() {
            self.cut = Some(why());
        }
    }

    fn pair(&mut self, l: StateId, r: StateId) -> usize {
        if let Some(&i) = self.index.get(&(l, r)) {
            return i;
        }
        let i = self.pairs.len();
        let same = l == r || self.erasure(l) == self.erasure(r);
        self.identity.push(same);
        self.pairs.push((l, r));
        self.index.insert((l, r), i);
        self.info.push(None);
        i
    }

    fn erasure(&mut self, s: StateId) -> Process {
        if let Some(p) = self.erased.get(&s) {
            return p.clone();
        }
        let p = erase_repl_counters(self.lts.state(s));
        self.erased.insert(s, p.clone());
        p
    }

    fn is_identity(&self, i: usize) -> bool {
        self.identity[i]
    }

    fn compensated(&mut self, base: StateId, extra: &Multiset) -> Option<StateId> {
        if extra.is_empty() {
            return Some(base);
        }
        let p = Process::par2(self.lts.state(base).clone(), Process::outputs(extra));
        let id = self.lts.intern(&p);
        if top_outputs(self.lts.state(id)).max_count() > self.comp_bound {
            return None;
        }
        Some(id)
    }

    /// Defender moves of `d` answering `label`; `to` is where the attacker
    /// went, and `side` is the attacker.
    fn answers(&mut self, side: Side, label: &Label, to: StateId, d: StateId) -> (Answers, bool) {
        let orient = |a: StateId, b: StateId| match side {
            Side::Left => (a, b),
            Side::Right => (b, a),
        };
        let mut complete;
        let mut out = Answers::default();
        match (self.mode, label) {
            (Equivalence::Strong, _) => {
                complete = !self.lts.is_truncated(d);
                for (l, y) in self.lts.successors(d).iter() {
                    if l == label {
                        let (a, b) = orient(to, *y);
                        let pair = self.pair(a, b);
                        out.list.push(Answer::new(None, *y, pair));
                    }
                }
            }
            (Equivalence::WeakAsync, Label::Block(theta)) => {
                let blocks = self.lts.weak_blocks(d);
                complete = !self.region_truncated(d, blocks.values().flatten().copied());
                for (gamma, ys) in blocks {
                    let via = out.blocks.len();
                    let (att_extra, def_extra) = (gamma.difference(theta), theta.difference(&gamma));
                    let Some(att) = self.compensated(to, &att_extra) else {
                        complete = false;
                        self.note(|| "compensation bound exceeded".into());
                        continue;
                    };
                    for y in ys {
                        let Some(def) = self.compensated(y, &def_extra) else {
                            complete = false;
                            self.note(|| "compensation bound exceeded".into());
                            continue;
                        };
                        let (a, b) = orient(att, def);
                        let pair = self.pair(a, b);
                        out.list.push(Answer::new(Some(via), y, pair));
                    }
                    out.blocks.push(gamma);
                }
            }
            _ => {
                let ys = self.lts.weak(d, label);
                complete = !self.region_truncated(d, ys.iter().copied());
                for y in ys {
                    let (a, b) = orient(to, y);
                    let pair = self.pair(a, b);
                    out.list.push(Answer::new(None, y, pair));
                }
            }
        }
        if !complete {
            self.note(|| "state bounds reached while matching".into());
        }
        (out, complete)
    }

    /// Whether any state the weak moves of `d` may pass through was cut.
    fn region_truncated(&mut self, d: StateId, reached: impl Iterator<Item = StateId>) -> bool {
        let mut v: Vec<StateId> = self.lts.tau_closure(d).to_vec();
        v.extend(reached);
        v.into_iter().any(|x| self.lts.is_truncated(x))
    }

    fn expand(&mut self, i: usize) -> PairInfo {
        let (l, r) = self.pairs[i];
        let mut challenges = Vec::new();
        let mut complete = !self.lts.is_truncated(l) && !self.lts.is_truncated(r);
        for (side, att, def) in [(Side::Left, l, r), (Side::Right, r, l)] {
            for (label, to) in self.lts.successors(att).iter() {
                let (answers, ok) = self.answers(side, label, *to, def);
                complete &= ok;
                challenges.push(Challenge {
                    side,
                    label: label.clone(),
                    target: *to,
                    blocks: answers.blocks,
                    answers: answers.list,
                    complete: ok,
                });
            }
        }
        if !complete {
            self.note(|| "state bounds reached".into());
        }
        PairInfo { challenges, complete }
    }

    fn explore(&mut self, root: usize, max_pairs: usize) {
        let mut queue = VecDeque::from([root]);
        let mut expanded = 0usize;
        while let Some(i) = queue.pop_front() {
            if self.info[i].is_some() || self.is_identity(i) {
                continue;
            }
            if expanded >= max_pairs {
                self.note(|| format!("pair budget of {max_pairs} exhausted"));
                break;
            }
            expanded += 1;
            let info = self.expand(i);
            for c in &info.challenges {
                for a in &c.answers {
                    if self.info[a.pair()].is_none() {
                        queue.push_back(a.pair());
                    }
                }
            }
            self.info[i] = Some(info);
        }
    }

    /// Jacobi rounds, so a pair removed in round `r` is refuted by answers
    /// that were all removed in earlier rounds. Returns, per pair, the round
    /// and refuting challenge, or `None` if it survives.
    fn optimistic(&self) -> Vec<Option<(usize, usize)>> {
        let n = self.pairs.len();
        let mut removed: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut round = 0;
        loop {
            round += 1;
            let mut now = Vec::new();
            for i in 0..n {
                if removed[i].is_some() || self.is_identity(i) {
                    continue;
                }
                let Some(info) = &self.info[i] else { continue };
                let bad = info
                    .challenges
                    .iter()
                    .position(|c| c.complete && c.answers.iter().all(|a| removed[a.pair()].is_some()));
                if let Some(c) = bad {
                    now.push((i, c));
                }
            }
            if now.is_empty() {
                return removed;
            }
            for (i, c) in now {
                removed[i] = Some((round, c));
            }
        }
    }

    fn pessimistic(&self) -> Vec<bool> {
        let n = self.pairs.len();
        let mut rel: Vec<bool> = (0..n)
            .map(|i| self.is_identity(i) || self.info[i].as_ref().is_some_and(|x| x.complete))
            .collect();
        loop {
            let mut changed = false;
            for i in 0..n {
                if !rel[i] || self.is_identity(i) {
                    continue;
                }
                let info = self.info[i].as_ref().expect("related pairs are expanded");
                if info.challenges.iter().any(|c| !c.answers.iter().any(|a| rel[a.pair()])) {
                    rel[i] = false;
                    changed = true;
                }
            }
            if !changed {
                return rel;
            }
        }
    }

    fn witness(&self, root: usize, removed: &[Option<(usize, usize)>], cfg: &BisimConfig) -> Witness {
        let mut nodes: Vec<WitnessNode> = Vec::new();
        let mut node_of: HashMap<usize, usize> = HashMap::new();
        // post-order so every reply points at an existing node
        fn build(
            g: &Game,
            i: usize,
            removed: &[Option<(usize, usize)>],
            nodes: &mut Vec<WitnessNode>,
            node_of: &mut HashMap<usize, usize>,
        ) -> usize {
            if let Some(&k) = node_of.get(&i) {
                return k;
            }
            let (rank, ci) = removed[i].expect("witness pairs are refuted");
            let c = &g.info[i].as_ref().expect("refuted pairs are expanded").challenges[ci];
            let mut replies = Vec::new();
            for a in &c.answers {
                let next = build(g, a.pair(), removed, nodes, node_of);
                let (l, r) = g.pairs[a.pair()];
                replies.push(Reply {
                    via: a.via.map(|v| c.blocks[v as usize].clone()),
                    reached: g.lts.state(a.reached as usize).clone(),
                    left: g.lts.state(l).clone(),
                    right: g.lts.state(r).clone(),
                    next,
                });
            }
            let (l, r) = g.pairs[i];
            nodes.push(WitnessNode {
                rank,
                left: g.lts.state(l).clone(),
                right: g.lts.state(r).clone(),
                attacker: c.side,
                label: c.label.clone(),
                target: g.lts.state(c.target).clone(),
                replies,
            });
            node_of.insert(i, nodes.len() - 1);
            nodes.len() - 1
        }
        let root = build(self, root, removed, &mut nodes, &mut node_of);
        Witness {
            equivalence: self.mode,
            env: cfg.lts.env.clone(),
            comp_bound: cfg.comp_bound,
            max_repl_unfold: cfg.lts.bounds.max_repl_unfold,
            max_multiplicity: cfg.lts.bounds.max_multiplicity,
            root,
            nodes,
        }
    }
}

pub fn check_bisim(p: &Process, q: &Process, mode: Equivalence, cfg: &BisimConfig) -> BisimVerdict {
    let mut g = Game::new(cfg, mode);
    let l = g.lts.intern(p);
    let r = g.lts.intern(q);
    let root = g.pair(l, r);
    g.explore(root, cfg.max_pairs);
    let pess = g.pessimistic();
    if pess[root] {
        let relation = (0..g.pairs.len())
            .filter(|&i| pess[i])
            .map(|i| {
                let (a, b) = g.pairs[i];
                (g.lts.state(a).clone(), g.lts.state(b).clone())
            })
            .collect();
        return BisimVerdict::Bisimilar { relation };
    }
    let removed = g.optimistic();
    if removed[root].is_some() {
        return BisimVerdict::Distinguished {
            witness: Box::new(g.witness(root, &removed, cfg)),
        };
    }
    BisimVerdict::Unknown {
        reason: g.cut.unwrap_or_else(|| "bounds reached".into()),
    }
}

/// Weak asynchronous bisimulation: block moves may be answered by any weak
/// block, with the difference compensated by pending outputs.
pub fn weak_async_bisim(p: &Process, q: &Process, cfg: &BisimConfig) -> BisimVerdict {
    check_bisim(p, q, Equivalence::WeakAsync, cfg)
}

pub fn weak_bisim(p: &Process, q: &Process, cfg: &BisimConfig) -> BisimVerdict {
    check_bisim(p, q, Equivalence::Weak, cfg)
}

pub fn strong_bisim(p: &Process, q: &Process, cfg: &BisimConfig) -> BisimVerdict {
    check_bisim(p, q, Equivalence::Strong, cfg)
}

/// Re-checks a witness from scratch against `p` and `q`: the root must be
/// the queried pair, every attack must be a real transition, every answer
/// the rules allow must be listed, and replies must lead to lower ranks.
pub fn verify_witness(p: &Process, q: &Process, w: &Witness) -> Result<(), String> {
    let mut cfg = BisimConfig::new(w.env.clone());
    cfg.comp_bound = w.comp_bound;
    cfg.lts.bounds = LtsBounds {
        max_repl_unfold: w.max_repl_unfold,
        max_multiplicity: w.max_multiplicity,
    };
    let mut g = Game::new(&cfg, w.equivalence);
    let root = w.nodes.get(w.root).ok_or("root node missing")?;
    if g.lts.intern(p) != g.lts.intern(&root.left) || g.lts.intern(q) != g.lts.intern(&root.right) {
        return Err("witness root is not the queried pair".into());
    }
    for (k, node) in w.nodes.iter().enumerate() {
        let l = g.lts.intern(&node.left);
        let r = g.lts.intern(&node.right);
        if l == r || g.erasure(l) == g.erasure(r) {
            return Err(format!("node {k}: identical sides cannot be distinguished"));
        }
        let (att, def) = match node.attacker {
            Side::Left => (l, r),
            Side::Right => (r, l),
        };
        let target = g.lts.intern(&node.target);
        if !g
            .lts
            .successors(att)
            .iter()
            .any(|(lab, y)| *lab == node.label && *y == target)
        {
            return Err(format!("node {k}: {} is not a transition of the attacker", node.label));
        }
        let (answers, complete) = g.answers(node.attacker, &node.label, target, def);
        if !complete {
            return Err(format!("node {k}: answers cannot be enumerated within bounds"));
        }
        let mut listed: BTreeMap<(StateId, StateId), usize> = BTreeMap::new();
        for rep in &node.replies {
            let next = w
                .nodes
                .get(rep.next)
                .ok_or_else(|| format!("node {k}: dangling reply"))?;
            if next.rank >= node.rank {
                return Err(format!("node {k}: reply does not decrease the rank"));
            }
            let pair = (g.lts.intern(&rep.left), g.lts.intern(&rep.right));
            if pair != (g.lts.intern(&next.left), g.lts.intern(&next.right)) {
                return Err(format!("node {k}: reply and its node disagree"));
            }
            listed.insert(pair, rep.next);
        }
        for a in answers.list {
            if !listed.contains_key(&g.pairs[a.pair()]) {
                let (x, y) = g.pairs[a.pair()];
                return Err(format!(
                    "node {k}: answer {} ~ {} is not covered",
                    g.lts.state(x),
                    g.lts.state(y)
                ));
            }
        }
    }
    Ok(())
}
