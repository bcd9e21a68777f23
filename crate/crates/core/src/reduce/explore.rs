//! Bounded breadth-first exploration of configuration graphs.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::canon::{canonical, max_hidden_pending, max_repl_fired};
use super::step::{step_config, Derivation};
use crate::error::ExploreError;
use crate::multiset::Multiset;
use crate::syntax::Process;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Configuration {
    #[serde(serialize_with = "crate::reduce::explore::ser_display")]
    pub process: Process,
    pub state: Multiset,
}

pub(crate) fn ser_display<T: std::fmt::Display, S: serde::Serializer>(t: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(t)
}

impl Configuration {
    pub fn new(process: Process, state: Multiset) -> Self {
        Self { process, state }
    }

    pub fn initial(process: Process) -> Self {
        Self::new(process, Multiset::new())
    }
}

impl std::fmt::Display for Configuration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ; {}", self.process, self.state)
    }
}

#[derive(Clone, Debug)]
pub struct Bounds {
    /// Largest count of any name in the global state or in a hide annotation.
    pub max_multiplicity: u32,
    /// Largest firing counter of a replicated input.
    pub max_repl_unfold: u32,
    /// Breadth-first depth limit.
    pub max_steps: usize,
    /// Hard cap; exceeding it is an error rather than a truncation.
    pub max_nodes: usize,
    /// Skip canonicalisation and keep terms exactly as produced by the rules.
    pub raw: bool,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            max_multiplicity: 4,
            max_repl_unfold: 3,
            max_steps: 10_000,
            max_nodes: 200_000,
            raw: false,
        }
    }
}

impl Bounds {
    pub fn admits(&self, c: &Configuration) -> bool {
        c.state.max_count() <= self.max_multiplicity
            && max_hidden_pending(&c.process) <= self.max_multiplicity
            && max_repl_fired(&c.process) <= self.max_repl_unfold
    }

    pub fn normalise(&self, c: Configuration) -> Configuration {
        if self.raw {
            c
        } else {
            Configuration::new(canonical(&c.process), c.state)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphEdge {
    pub from: usize,
    pub derivation: Derivation,
    pub to: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ReachGraph {
    pub nodes: Vec<Configuration>,
    pub edges: Vec<GraphEdge>,
    pub truncated: bool,
    pub deadlocks: Vec<usize>,
}

/// Successors of one configuration: normalised, with the out-of-bounds ones
/// counted separately.
pub fn successors(c: &Configuration, b: &Bounds) -> (Vec<(Derivation, Configuration)>, usize) {
    let mut kept = Vec::new();
    let mut pruned = 0;
    for st in step_config(&c.process, &c.state) {
        let next = b.normalise(Configuration::new(st.process, st.state));
        if b.admits(&next) {
            kept.push((st.derivation, next));
        } else {
            pruned += 1;
        }
    }
    (kept, pruned)
}

pub fn explore(init: &Configuration, b: &Bounds) -> Result<ReachGraph, ExploreError> {
    let mut g = ReachGraph::default();
    let mut index: HashMap<Configuration, usize> = HashMap::new();
    let root = b.normalise(init.clone());
    index.insert(root.clone(), 0);
    g.nodes.push(root);
    let mut frontier = vec![0usize];
    let mut depth = 0usize;
    while !frontier.is_empty() {
        if depth >= b.max_steps {
            let any_succ = frontier
                .par_iter()
                .any(|&i| !step_config(&g.nodes[i].process, &g.nodes[i].state).is_empty());
            g.truncated |= any_succ;
            break;
        }
        let expanded: Vec<(Vec<(Derivation, Configuration)>, usize)> =
            frontier.par_iter().map(|&i| successors(&g.nodes[i], b)).collect();
        let mut next = Vec::new();
        for (&from, (succ, pruned)) in frontier.iter().zip(expanded) {
            if pruned > 0 {
                g.truncated = true;
            }
            if succ.is_empty() && pruned == 0 {
                g.deadlocks.push(from);
            }
            for (d, c) in succ {
                let to = match index.get(&c) {
                    Some(&t) => t,
                    None => {
                        let t = g.nodes.len();
                        if t >= b.max_nodes {
                            return Err(ExploreError::ResourceExhausted {
                                what: "configurations",
                                limit: b.max_nodes,
                            });
                        }
                        index.insert(c.clone(), t);
                        g.nodes.push(c);
                        next.push(t);
                        t
                    }
                };
                g.edges.push(GraphEdge {
                    from,
                    derivation: d,
                    to,
                });
            }
        }
        frontier = next;
        depth += 1;
    }
    g.deadlocks.sort_unstable();
    Ok(g)
}

impl ReachGraph {
    pub fn successors_of(&self, i: usize) -> impl Iterator<Item = &GraphEdge> + '_ {
        self.edges.iter().filter(move |e| e.from == i)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "nodes": self.nodes.iter().enumerate().map(|(i, c)| json!({
                "id": i,
                "proc": c.process.to_string(),
                "state": c.state,
            })).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| json!({
                "from": e.from,
                "rule": e.derivation.rule().name(),
                "derivation": e.derivation.to_string(),
                "to": e.to,
            })).collect::<Vec<_>>(),
            "truncated": self.truncated,
            "deadlocks": self.deadlocks,
        })
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph reach {\n  node [shape=box, fontname=\"monospace\"];\n");
        for (i, c) in self.nodes.iter().enumerate() {
            let extra = if self.deadlocks.binary_search(&i).is_ok() {
                ", peripheries=2"
            } else {
                ""
            };
            let _ = writeln!(s, "  n{i} [label=\"{}\"{extra}];", escape(&c.to_string()));
        }
        for e in &self.edges {
            let _ = writeln!(s, "  n{} -> n{} [label=\"{}\"];", e.from, e.to, e.derivation.rule());
        }
        s.push_str("}\n");
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, c) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "[{i}] {c}");
        }
        for e in &self.edges {
            let _ = writeln!(s, "{} --{}--> {}", e.from, e.derivation, e.to);
        }
        let _ = writeln!(
            s,
            "nodes={} edges={} deadlocks={:?} truncated={}",
            self.nodes.len(),
            self.edges.len(),
            self.deadlocks,
            self.truncated
        );
        s
    }
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    /// Path from the initial configuration to the first match, if any.
    pub path: Option<Vec<(Option<Derivation>, Configuration)>>,
    pub truncated: bool,
    pub explored: usize,
}

/// Breadth-first search for a configuration satisfying `goal`.
pub fn search(
    init: &Configuration,
    b: &Bounds,
    goal: impl Fn(&Configuration) -> bool,
) -> Result<SearchResult, ExploreError> {
    let root = b.normalise(init.clone());
    let mut nodes = vec![root.clone()];
    let mut parent: Vec<Option<(usize, Derivation)>> = vec![None];
    let mut depth = vec![0usize];
    let mut index: HashMap<Configuration, usize> = HashMap::from([(root, 0)]);
    let mut queue = VecDeque::from([0usize]);
    let mut truncated = false;
    while let Some(i) = queue.pop_front() {
        if goal(&nodes[i]) {
            let mut path = Vec::new();
            let mut cur = Some(i);
            while let Some(k) = cur {
                let (d, up) = match &parent[k] {
                    Some((p, d)) => (Some(d.clone()), Some(*p)),
                    None => (None, None),
                };
                path.push((d, nodes[k].clone()));
                cur = up;
            }
            path.reverse();
            return Ok(SearchResult {
                path: Some(path),
                truncated,
                explored: nodes.len(),
            });
        }
        if depth[i] >= b.max_steps {
            truncated = true;
            continue;
        }
        let (succ, pruned) = successors(&nodes[i], b);
        truncated |= pruned > 0;
        for (d, c) in succ {
            if index.contains_key(&c) {
                continue;
            }
            let t = nodes.len();
            if t >= b.max_nodes {
                return Err(ExploreError::ResourceExhausted {
                    what: "configurations",
                    limit: b.max_nodes,
                });
            }
            index.insert(c.clone(), t);
            nodes.push(c);
            parent.push(Some((i, d)));
            depth.push(depth[i] + 1);
            queue.push_back(t);
        }
    }
    Ok(SearchResult {
        path: None,
        truncated,
        explored: nodes.len(),
    })
}
