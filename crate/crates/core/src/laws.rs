//! The algebraic laws of transactions, instantiated and checked.
//!
//! Atomic laws are checked with the atomic equivalence over a fixed state
//! universe, the metavariables being filled with seeded random expressions;
//! process laws are checked with weak asynchronous bisimulation.

use serde::Serialize;
use serde_json::{json, Value};

use crate::atomic::{atomic_equiv, StateUniverse};
use crate::gen;
use crate::log::Action;
use crate::lts::{weak_async_bisim, BisimConfig, BisimVerdict};
use crate::multiset::Multiset;
use crate::name::Name;
use crate::syntax::{AtomicExpr, Process};

pub const ATOMIC_LAWS: [&str; 7] = ["comm", "dist", "ass", "idem", "absRt1", "absRt2", "absEnd"];
pub const PROCESS_LAWS: [&str; 3] = ["asy", "a-asy", "a-1"];
/// Not a law: `end` against `retry`, kept to show that the suite can fail.
pub const PERTURBED: &str = "perturbed";

pub fn all_laws() -> Vec<&'static str> {
    ATOMIC_LAWS.iter().chain(PROCESS_LAWS.iter()).copied().collect()
}

pub fn is_law(name: &str) -> bool {
    name == PERTURBED || all_laws().contains(&name)
}

/// Both sides of one instance of an atomic law; `absRt2` yields two
/// instances per draw (left and right identity).
pub fn atomic_instances(
    law: &str,
    rng: &mut impl rand::Rng,
    names: &[Name],
    depth: usize,
) -> Vec<(AtomicExpr, AtomicExpr)> {
    let mut m = || gen::expr(rng, names, depth);
    let (m1, m2, m3) = (m(), m(), m());
    let mut act = || {
        let n = names[rng.gen_range(0..names.len())].clone();
        if rng.gen_bool(0.5) {
            Action::read(n)
        } else {
            Action::write(n)
        }
    };
    let (alpha, beta) = (act(), act());
    use AtomicExpr as E;
    match law {
        "comm" => vec![(
            E::prefix(alpha.clone(), E::prefix(beta.clone(), m1.clone())),
            E::prefix(beta, E::prefix(alpha, m1)),
        )],
        "dist" => vec![(
            E::prefix(alpha.clone(), E::or_else(m1.clone(), m2.clone())),
            E::or_else(E::prefix(alpha.clone(), m1), E::prefix(alpha, m2)),
        )],
        "ass" => vec![(
            E::or_else(m1.clone(), E::or_else(m2.clone(), m3.clone())),
            E::or_else(E::or_else(m1, m2), m3),
        )],
        "idem" => vec![(E::or_else(m1.clone(), m1.clone()), m1)],
        "absRt1" => vec![(E::prefix(alpha, E::Retry), E::Retry)],
        "absRt2" => vec![
            (E::or_else(E::Retry, m1.clone()), m1.clone()),
            (m1.clone(), E::or_else(m1, E::Retry)),
        ],
        "absEnd" => vec![(E::or_else(E::End, m1), E::End)],
        PERTURBED => vec![(E::End, E::Retry)],
        _ => vec![],
    }
}

/// Both sides of a process law on channel `a`.
pub fn process_instance(law: &str, a: &Name) -> Option<(Process, Process)> {
    let nil = Process::Nil;
    Some(match law {
        "asy" => (Process::input(a.clone(), Process::output(a.clone())), nil),
        "a-asy" => (
            Process::atomic(AtomicExpr::read(
                a.clone(),
                AtomicExpr::write(a.clone(), AtomicExpr::End),
            )),
            nil,
        ),
        "a-1" => (
            Process::atomic(AtomicExpr::read(a.clone(), AtomicExpr::End)),
            Process::input(a.clone(), nil),
        ),
        _ => return None,
    })
}

#[derive(Clone, Debug)]
pub struct LawConfig {
    pub names: Vec<Name>,
    pub k: u32,
    pub depth: usize,
    pub instances: usize,
    pub seed: u64,
    pub comp_bound: Option<u32>,
}

impl Default for LawConfig {
    fn default() -> Self {
        Self {
            names: gen::names(&["a", "b", "c"]),
            k: 2,
            depth: 3,
            instances: 50,
            seed: 0,
            comp_bound: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LawStatus {
    Pass,
    Fail,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Counterexample {
    pub lhs: String,
    pub rhs: String,
    /// Disagreeing state for atomic laws.
    pub state: Option<Multiset>,
    /// Full bisimulation verdict for process laws.
    pub verdict: Option<Value>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LawReport {
    pub law: String,
    pub status: LawStatus,
    pub checked: usize,
    pub counterexample: Option<Counterexample>,
    pub reason: Option<String>,
}

pub fn check_law(law: &str, cfg: &LawConfig) -> LawReport {
    let mut report = LawReport {
        law: law.to_string(),
        status: LawStatus::Pass,
        checked: 0,
        counterexample: None,
        reason: None,
    };
    if let Some(a) = cfg.names.first().filter(|_| PROCESS_LAWS.contains(&law)) {
        let (p, q) = process_instance(law, a).expect("process law");
        let mut bc = BisimConfig::for_pair(&p, &q);
        if let Some(c) = cfg.comp_bound {
            bc.comp_bound = c;
        }
        report.checked = 1;
        let v = weak_async_bisim(&p, &q, &bc);
        match &v {
            BisimVerdict::Bisimilar { .. } => {}
            BisimVerdict::Distinguished { .. } => {
                report.status = LawStatus::Fail;
                report.counterexample = Some(Counterexample {
                    lhs: p.to_string(),
                    rhs: q.to_string(),
                    state: None,
                    verdict: Some(v.to_json()),
                });
            }
            BisimVerdict::Unknown { reason } => {
                report.status = LawStatus::Unknown;
                report.reason = Some(reason.clone());
            }
        }
        return report;
    }
    if !ATOMIC_LAWS.contains(&law) && law != PERTURBED {
        report.status = LawStatus::Unknown;
        report.reason = Some(format!("unknown law {law}"));
        return report;
    }
    let u = StateUniverse::new(cfg.names.iter().cloned(), cfg.k);
    let mut rng = gen::rng(cfg.seed);
    let rounds = if law == PERTURBED { 1 } else { cfg.instances };
    for _ in 0..rounds {
        for (l, r) in atomic_instances(law, &mut rng, &cfg.names, cfg.depth) {
            report.checked += 1;
            let v = atomic_equiv(&l, &r, &u);
            if !v.holds {
                report.status = LawStatus::Fail;
                report.counterexample = Some(Counterexample {
                    lhs: l.to_string(),
                    rhs: r.to_string(),
                    state: v.witness,
                    verdict: None,
                });
                return report;
            }
        }
    }
    report
}

pub fn suite_json(reports: &[LawReport], cfg: &LawConfig) -> Value {
    let passed = reports.iter().filter(|r| r.status == LawStatus::Pass).count();
    json!({
        "passed": passed,
        "total": reports.len(),
        "bounds": {
            "names": cfg.names,
            "k": cfg.k,
            "depth": cfg.depth,
            "instances": cfg.instances,
            "seed": cfg.seed,
            "compBound": cfg.comp_bound,
        },
        "laws": reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_law_holds_on_a_small_run() {
        let cfg = LawConfig {
            instances: 10,
            k: 1,
            ..LawConfig::default()
        };
        for law in all_laws() {
            let r = check_law(law, &cfg);
            assert_eq!(r.status, LawStatus::Pass, "{law}: {r:?}");
            assert!(r.checked >= 1);
        }
    }

    #[test]
    fn perturbed_law_fails_at_empty_state() {
        let r = check_law(PERTURBED, &LawConfig::default());
        assert_eq!(r.status, LawStatus::Fail);
        let c = r.counterexample.unwrap();
        assert_eq!(c.state, Some(Multiset::new()));
    }

    #[test]
    fn commuting_reads_differ_from_end() {
        // absEnd only absorbs on the right.
        let a = Name::from_static("a");
        let b = Name::from_static("b");
        let m = AtomicExpr::read(a, AtomicExpr::write(b, AtomicExpr::End));
        let u = StateUniverse::new(gen::names(&["a", "b"]), 1);
        assert!(!atomic_equiv(&AtomicExpr::or_else(m.clone(), AtomicExpr::End), &AtomicExpr::End, &u).holds);
        assert!(atomic_equiv(&AtomicExpr::or_else(AtomicExpr::End, m), &AtomicExpr::End, &u).holds);
    }
}
