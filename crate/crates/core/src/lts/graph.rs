use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use serde_json::{json, Value};

use super::label::Label;
use super::symbolic::{labeled_successors, LtsBounds};
use crate::atomic::StateUniverse;
use crate::error::ExploreError;
use crate::multiset::Multiset;
use crate::name::Name;
use crate::reduce::canon::canonical;
use crate::reduce::explore::escape;
use crate::syntax::Process;

pub type StateId = usize;
type Edges = Arc<[(Label, StateId)]>;

#[derive(Clone, Debug)]
pub struct LtsConfig {
    pub env: StateUniverse,
    pub bounds: LtsBounds,
    pub max_states: usize,
}

impl LtsConfig {
    pub fn new(env: StateUniverse) -> Self {
        Self {
            env,
            bounds: LtsBounds::default(),
            max_states: 100_000,
        }
    }

    /// Environment over the free names of `ps` with multiplicity `k`.
    pub fn for_terms(ps: &[&Process], k: u32) -> Self {
        let names: BTreeSet<Name> = ps.iter().flat_map(|p| p.free_names()).collect();
        Self::new(StateUniverse::new(names, k))
    }
}

/// Labelled transition system over canonical terms, expanded on demand.
pub struct Lts {
    cfg: LtsConfig,
    states: Vec<Process>,
    index: HashMap<Process, StateId>,
    succ: Vec<Option<Edges>>,
    truncated: Vec<bool>,
    closure: Vec<Option<Arc<[StateId]>>>,
}

impl Lts {
    pub fn new(cfg: LtsConfig) -> Self {
        Self {
            cfg,
            states: vec![],
            index: HashMap::new(),
            succ: vec![],
            truncated: vec![],
            closure: vec![],
        }
    }

    pub fn config(&self) -> &LtsConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, s: StateId) -> &Process {
        &self.states[s]
    }

    pub fn lookup(&self, p: &Process) -> Option<StateId> {
        self.index.get(&canonical(p)).copied()
    }

    pub fn intern(&mut self, p: &Process) -> StateId {
        let p = canonical(p);
        if let Some(&i) = self.index.get(&p) {
            return i;
        }
        let i = self.states.len();
        self.states.push(p.clone());
        self.index.insert(p, i);
        self.succ.push(None);
        self.truncated.push(false);
        self.closure.push(None);
        i
    }

    pub fn successors(&mut self, s: StateId) -> Edges {
        if let Some(e) = &self.succ[s] {
            return e.clone();
        }
        let ls = labeled_successors(&self.states[s], &self.cfg.env, &self.cfg.bounds);
        let edges: Vec<(Label, StateId)> = ls.edges.iter().map(|(l, q)| (l.clone(), self.intern(q))).collect();
        let edges: Edges = edges.into();
        self.succ[s] = Some(edges.clone());
        self.truncated[s] = ls.truncated;
        edges
    }

    /// Whether some successor of `s` was cut by the bounds.
    pub fn is_truncated(&mut self, s: StateId) -> bool {
        self.successors(s);
        self.truncated[s]
    }

    /// States reachable by `τ*`, including `s`, sorted.
    pub fn tau_closure(&mut self, s: StateId) -> Arc<[StateId]> {
        if let Some(c) = &self.closure[s] {
            return c.clone();
        }
        let mut seen = BTreeSet::from([s]);
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for (l, y) in self.successors(x).iter() {
                if l.is_tau() && seen.insert(*y) {
                    queue.push_back(*y);
                }
            }
        }
        let c: Arc<[StateId]> = seen.into_iter().collect::<Vec<_>>().into();
        self.closure[s] = Some(c.clone());
        c
    }

    /// Whether a truncated state lies on some `τ*` path from `s`.
    pub fn closure_truncated(&mut self, s: StateId) -> bool {
        self.tau_closure(s).to_vec().into_iter().any(|x| self.is_truncated(x))
    }

    /// `s ⇒μ⇒`, with `⇒τ⇒` meaning `τ*`.
    pub fn weak(&mut self, s: StateId, label: &Label) -> BTreeSet<StateId> {
        if label.is_tau() {
            return self.tau_closure(s).iter().copied().collect();
        }
        let mut out = BTreeSet::new();
        for x in self.tau_closure(s).to_vec() {
            for (l, y) in self.successors(x).iter() {
                if l == label {
                    out.extend(self.tau_closure(*y).iter().copied());
                }
            }
        }
        out
    }

    /// Every weak block move of `s`, grouped by the consumed multiset; the
    /// empty block maps to the `τ` closure.
    pub fn weak_blocks(&mut self, s: StateId) -> BTreeMap<Multiset, BTreeSet<StateId>> {
        let mut out: BTreeMap<Multiset, BTreeSet<StateId>> = BTreeMap::new();
        let closure = self.tau_closure(s).to_vec();
        out.insert(Multiset::new(), closure.iter().copied().collect());
        for x in closure {
            for (l, y) in self.successors(x).iter() {
                if let Label::Block(m) = l {
                    if !m.is_empty() {
                        let c = self.tau_closure(*y);
                        out.entry(m.clone()).or_default().extend(c.iter().copied());
                    }
                }
            }
        }
        out
    }

    /// Expands everything reachable from `root`.
    pub fn explore_from(&mut self, root: StateId) -> Result<(), ExploreError> {
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for (_, y) in self.successors(x).iter() {
                if seen.insert(*y) {
                    if seen.len() > self.cfg.max_states {
                        return Err(ExploreError::ResourceExhausted {
                            what: "lts states",
                            limit: self.cfg.max_states,
                        });
                    }
                    queue.push_back(*y);
                }
            }
        }
        Ok(())
    }

    /// States whose successors were computed, in id order.
    fn expanded(&self) -> impl Iterator<Item = (StateId, &Edges)> {
        self.succ
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.as_ref().map(|e| (i, e)))
    }

    pub fn any_truncated(&self) -> bool {
        self.truncated.iter().any(|&t| t)
    }

    pub fn to_json(&self) -> Value {
        let states: Vec<Value> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, p)| json!({"id": i, "term": p.to_string()}))
            .collect();
        let mut edges = Vec::new();
        for (i, es) in self.expanded() {
            for (l, j) in es.iter() {
                edges.push(json!({"from": i, "label": l.to_json(), "to": j}));
            }
        }
        json!({
            "env": {"names": self.cfg.env.names, "k": self.cfg.env.k},
            "states": states,
            "edges": edges,
            "truncated": self.any_truncated(),
        })
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph lts {\n");
        for (i, p) in self.states.iter().enumerate() {
            s.push_str(&format!("  s{i} [label=\"{}\"];\n", escape(&p.to_string())));
        }
        for (i, es) in self.expanded() {
            for (l, j) in es.iter() {
                s.push_str(&format!("  s{i} -> s{j} [label=\"{}\"];\n", escape(&l.to_string())));
            }
        }
        s.push_str("}\n");
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, p) in self.states.iter().enumerate() {
            s.push_str(&format!("s{i}: {p}\n"));
        }
        for (i, es) in self.expanded() {
            for (l, j) in es.iter() {
                s.push_str(&format!("s{i} --{l}--> s{j}\n"));
            }
        }
        if self.any_truncated() {
            s.push_str("(truncated)\n");
        }
        s
    }
}

/// Fully expanded LTS of `p`; the root is state 0.
pub fn build_lts(p: &Process, cfg: LtsConfig) -> Result<Lts, ExploreError> {
    let mut lts = Lts::new(cfg);
    let root = lts.intern(p);
    lts.explore_from(root)?;
    Ok(lts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_process;

    #[test]
    fn weak_moves() {
        let p = parse_process("(a! | a?.b?.c!) \\ a:0").unwrap();
        let mut lts = build_lts(&p, LtsConfig::for_terms(&[&p], 1)).unwrap();
        assert_eq!(lts.len(), 5);
        let b = Label::input(Name::from_static("b"));
        let after = lts.weak(0, &b);
        assert_eq!(after.len(), 1);
        let s = *after.iter().next().unwrap();
        assert_eq!(lts.state(s).to_string(), "c!");
        let blocks = lts.weak_blocks(0);
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[&Multiset::new()].len(), 3);
        let j = lts.to_json();
        assert_eq!(j["states"].as_array().unwrap().len(), 5);
        assert!(lts.to_dot().contains("->"));
    }

    #[test]
    fn state_cap() {
        let p = parse_process("*a?.(a! | a!) | a!").unwrap();
        let mut cfg = LtsConfig::for_terms(&[&p], 1);
        cfg.max_states = 3;
        cfg.bounds.max_repl_unfold = 50;
        assert!(build_lts(&p, cfg).is_err());
    }
}
