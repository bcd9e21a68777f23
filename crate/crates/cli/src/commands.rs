use atccs::atomic::{
    atomic_equiv, atomic_preorder, eval_atomic, is_normal_form, normalize, outcomes_agree, StateUniverse,
};
use atccs::encode::{self, JoinSpec};
use atccs::laws::{self, check_law, suite_json, LawConfig, LawReport, LawStatus};
use atccs::lts::{build_lts, check_bisim, verify_witness, BisimConfig, BisimVerdict, Equivalence, LtsConfig, Witness};
use atccs::reduce::{canonical, explore, run_scheduler, Bounds, Configuration};
use atccs::testing::{
    alt_preorder, may_bounds, may_passes, observer, trace_preorder_observer, trace_preorder_rewrite, AltConfig,
    PreorderVerdict, Trace,
};
use atccs::{AtomicExpr, ExploreError, FreshSupply, Name, Process};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::input::{self, gather};
use crate::report::{Code, Failure, Format, Outcome, Report};
use crate::{stepper, Cli, Cmd, EncodeKind, Mode, Opts};

pub fn dispatch(cli: &Cli) -> Outcome {
    let o = &cli.opts;
    let graph_verb = matches!(cli.cmd, Cmd::Explore { .. } | Cmd::Lts { .. });
    if o.format == Format::Dot && !graph_verb {
        return Err(Failure::usage("--format dot is only available for explore and lts"));
    }
    match &cli.cmd {
        Cmd::Parse { terms, expr } => parse(&gather(terms, o, 1, "term")?[0], *expr),
        Cmd::Print { terms, expr, canonical } => print(&gather(terms, o, 1, "term")?[0], *expr, *canonical),
        Cmd::Step {
            terms,
            interactive,
            pick,
        } => {
            let c = Configuration::new(
                input::process(&gather(terms, o, 1, "term")?[0])?,
                input::initial_state(o)?,
            );
            if *interactive {
                stepper::interactive(c)
            } else {
                stepper::list(c, pick)
            }
        }
        Cmd::Explore { terms, raw } => explore_cmd(&gather(terms, o, 1, "term")?[0], o, *raw),
        Cmd::Run { terms, steps, raw } => run(&gather(terms, o, 1, "term")?[0], o, *steps, *raw),
        Cmd::Lts { terms } => lts(&gather(terms, o, 1, "term")?[0], o),
        Cmd::Bisim { terms, mode, replay } => {
            let mode = match mode {
                Mode::Strong => Equivalence::Strong,
                Mode::Weak => Equivalence::Weak,
                Mode::WeakAsync => Equivalence::WeakAsync,
            };
            bisim(terms, o, mode, replay.as_deref())
        }
        Cmd::Wbisim { terms, replay } => bisim(terms, o, Equivalence::Weak, replay.as_deref()),
        Cmd::Aequiv { terms } => atomic_pair(&gather(terms, o, 2, "expression")?, o, false),
        Cmd::Apre { terms } => atomic_pair(&gather(terms, o, 2, "expression")?, o, true),
        Cmd::Normalize { terms } => normalize_cmd(&gather(terms, o, 1, "expression")?[0]),
        Cmd::Laws {
            law,
            perturb,
            instances,
        } => laws_cmd(o, law.as_deref(), *perturb, *instances),
        Cmd::Encode {
            kind,
            terms,
            replicated,
            n,
        } => encode_cmd(*kind, terms, o, *replicated, *n),
        Cmd::May { terms } => may(&gather(terms, o, 2, "term")?, o),
        Cmd::Alt { terms, trace } => alt(&gather(terms, o, 2, "term")?, o, trace.as_deref()),
        Cmd::TracePre { traces } => trace_pre(&gather(traces, o, 2, "trace")?),
    }
}

fn parse(s: &str, is_expr: bool) -> Outcome {
    let (ast, text) = if is_expr {
        let m = input::expr(s)?;
        (serde_json::to_value(&m), m.to_string())
    } else {
        let p = input::process(s)?;
        (serde_json::to_value(&p), p.to_string())
    };
    let ast = ast.map_err(|e| Failure::new(Code::Unknown, e.to_string()))?;
    Ok(Report::new(Code::Ok, json!({"text": text, "ast": ast}), text))
}

fn print(s: &str, is_expr: bool, canon: bool) -> Outcome {
    let looks_json = s.trim_start().starts_with('{') || s.trim_start().starts_with('"');
    let text = if is_expr {
        let m: AtomicExpr = if looks_json {
            serde_json::from_str(s).map_err(|e| Failure::usage(format!("not an expression tree: {e}")))?
        } else {
            input::expr(s)?
        };
        m.to_string()
    } else {
        let p: Process = if looks_json {
            let v: Value = serde_json::from_str(s).map_err(|e| Failure::usage(format!("invalid JSON: {e}")))?;
            let tree = v.get("ast").cloned().unwrap_or(v);
            serde_json::from_value(tree).map_err(|e| Failure::usage(format!("not a process tree: {e}")))?
        } else {
            input::process(s)?
        };
        if canon {
            canonical(&p).to_string()
        } else {
            p.to_string()
        }
    };
    Ok(Report::new(Code::Ok, json!({ "text": text }), text))
}

fn bounds(o: &Opts) -> Bounds {
    let d = Bounds::default();
    Bounds {
        max_multiplicity: o.mult.unwrap_or(d.max_multiplicity),
        max_repl_unfold: o.repl_bound.unwrap_or(d.max_repl_unfold),
        max_steps: o.depth.unwrap_or(d.max_steps),
        max_nodes: o.max_nodes.unwrap_or(d.max_nodes),
        raw: false,
    }
}

fn bounds_json(b: &Bounds) -> Value {
    json!({
        "maxMultiplicity": b.max_multiplicity,
        "maxReplUnfold": b.max_repl_unfold,
        "maxSteps": b.max_steps,
        "maxNodes": b.max_nodes,
    })
}

fn exhausted(e: ExploreError) -> Failure {
    match e {
        ExploreError::ResourceExhausted { .. } => Failure::new(Code::Unknown, e.to_string()),
        ExploreError::Term(t) => Failure::usage(t.to_string()),
    }
}

fn explore_cmd(s: &str, o: &Opts, raw: bool) -> Outcome {
    let p = input::process(s)?;
    let b = Bounds { raw, ..bounds(o) };
    let g = explore(&Configuration::new(p, input::initial_state(o)?), &b).map_err(exhausted)?;
    let code = if g.truncated { Code::Unknown } else { Code::Ok };
    let mut j = g.to_json();
    j["bounds"] = bounds_json(&b);
    Ok(Report::new(code, j, g.to_text()).with_dot(g.to_dot()))
}

fn run(s: &str, o: &Opts, steps: usize, raw: bool) -> Outcome {
    let p = input::process(s)?;
    let r = run_scheduler(&Configuration::new(p, input::initial_state(o)?), o.seed, steps, raw);
    let text = r.to_text();
    let j = serde_json::to_value(&r).map_err(|e| Failure::new(Code::Unknown, e.to_string()))?;
    Ok(Report::new(Code::Ok, j, text))
}

fn env(o: &Opts, terms: &[&Process], default_k: u32) -> Result<StateUniverse, Failure> {
    let free = terms.iter().flat_map(|p| p.free_names());
    Ok(StateUniverse::new(input::names(o, free)?, o.mult.unwrap_or(default_k)))
}

fn env_json(u: &StateUniverse) -> Value {
    json!({"names": u.names, "k": u.k})
}

fn lts_config(o: &Opts, terms: &[&Process]) -> Result<LtsConfig, Failure> {
    let mut cfg = LtsConfig::new(env(o, terms, 2)?);
    if let Some(r) = o.repl_bound {
        cfg.bounds.max_repl_unfold = r;
    }
    if let Some(n) = o.max_nodes {
        cfg.max_states = n;
    }
    Ok(cfg)
}

fn lts(s: &str, o: &Opts) -> Outcome {
    let p = input::process(s)?;
    let l = build_lts(&p, lts_config(o, &[&p])?).map_err(exhausted)?;
    let code = if l.any_truncated() { Code::Unknown } else { Code::Ok };
    Ok(Report::new(code, l.to_json(), l.to_text()).with_dot(l.to_dot()))
}

fn witness_from(path: &str) -> Result<Witness, Failure> {
    let raw = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {path}: {e}")))?;
    let v: Value = serde_json::from_str(&raw).map_err(|e| Failure::usage(format!("invalid JSON in {path}: {e}")))?;
    let w = v
        .pointer("/result/witness")
        .or_else(|| v.get("witness"))
        .cloned()
        .unwrap_or(v);
    serde_json::from_value(w).map_err(|e| Failure::usage(format!("{path} holds no bisimulation witness: {e}")))
}

fn bisim(terms: &[String], o: &Opts, mode: Equivalence, replay: Option<&str>) -> Outcome {
    if let Some(path) = replay {
        let w = witness_from(path)?;
        let all = gather(terms, o, terms.len() + o.files.len(), "term")?;
        let (p, q) = match all.as_slice() {
            [] => (w.root_node().left.clone(), w.root_node().right.clone()),
            [a, b] => (input::process(a)?, input::process(b)?),
            _ => return Err(Failure::usage("replay takes either no terms or two")),
        };
        let root = w.root_node();
        return Ok(match verify_witness(&p, &q, &w) {
            Ok(()) => Report::new(
                Code::Violation,
                json!({"replay": "reproduced", "left": p.to_string(), "right": q.to_string(), "label": root.label}),
                format!(
                    "witness reproduced: {p} and {q} are not {} bisimilar ({} plays {})",
                    w.equivalence,
                    side(root.attacker),
                    root.label
                ),
            ),
            Err(e) => Report::new(
                Code::Unknown,
                json!({"replay": "rejected", "reason": e}),
                format!("witness rejected: {e}"),
            ),
        });
    }
    let all = gather(terms, o, 2, "term")?;
    let (p, q) = (input::process(&all[0])?, input::process(&all[1])?);
    let lc = lts_config(o, &[&p, &q])?;
    let mut cfg = BisimConfig::new(lc.env.clone());
    cfg.lts = lc;
    if let Some(c) = o.comp_bound {
        cfg.comp_bound = c;
    }
    if let Some(n) = o.max_nodes {
        cfg.max_pairs = n;
    }
    let v = check_bisim(&p, &q, mode, &cfg);
    let mut result = v.to_json();
    if let BisimVerdict::Bisimilar { relation } = &v {
        result["relation"] = json!(relation.len());
    }
    let j = json!({
        "equivalence": mode.to_string(),
        "left": p.to_string(),
        "right": q.to_string(),
        "env": env_json(&cfg.lts.env),
        "bounds": {
            "compBound": cfg.comp_bound,
            "maxPairs": cfg.max_pairs,
            "maxReplUnfold": cfg.lts.bounds.max_repl_unfold,
            "maxMultiplicity": cfg.lts.bounds.max_multiplicity,
        },
        "result": result,
    });
    let within = format!(
        "names {:?} k={}",
        cfg.lts.env.names.iter().map(Name::as_str).collect::<Vec<_>>(),
        cfg.lts.env.k
    );
    let (code, text) = match &v {
        BisimVerdict::Bisimilar { relation } => (
            Code::Ok,
            format!("{mode} bisimilar within {within} ({} related pairs)", relation.len()),
        ),
        BisimVerdict::Distinguished { witness } => {
            let r = witness.root_node();
            (
                Code::Violation,
                format!(
                    "not {mode} bisimilar within {within}: {} plays {}\n{}",
                    side(r.attacker),
                    r.label,
                    witness.to_text()
                ),
            )
        }
        BisimVerdict::Unknown { reason } => (Code::Unknown, format!("unknown within {within}: {reason}")),
    };
    Ok(Report::new(code, j, text))
}

fn side(s: atccs::lts::Side) -> &'static str {
    match s {
        atccs::lts::Side::Left => "left",
        atccs::lts::Side::Right => "right",
    }
}

/// Default universe: free names of both, multiplicity 2 or the largest
/// number of reads of one name if that is higher.
fn atomic_universe(o: &Opts, m: &AtomicExpr, n: &AtomicExpr) -> Result<StateUniverse, Failure> {
    let auto = StateUniverse::automatic(&[m, n]);
    Ok(StateUniverse::new(
        input::names(o, auto.names.clone())?,
        o.mult.unwrap_or(auto.k.max(2)),
    ))
}

fn atomic_pair(terms: &[String], o: &Opts, preorder: bool) -> Outcome {
    let (m, n) = (input::expr(&terms[0])?, input::expr(&terms[1])?);
    let verb = if preorder { "preorder" } else { "equivalent" };
    if let Some(s) = &o.state {
        let s = input::state(s)?;
        let (a, b) = (eval_atomic(&m, &s), eval_atomic(&n, &s));
        let ok = if preorder {
            !b.is_committed() || a.is_committed()
        } else {
            outcomes_agree(&a, &b, &s)
        };
        let code = if ok { Code::Ok } else { Code::Violation };
        let j = json!({"state": s, "left": a, "right": b, verb: ok});
        let text = format!(
            "at {s}: {m} gives {a}, {n} gives {b}: {}",
            if ok { "agree" } else { "violation" }
        );
        return Ok(Report::new(code, j, text));
    }
    let u = atomic_universe(o, &m, &n)?;
    let v = if preorder {
        atomic_preorder(&m, &n, &u)
    } else {
        atomic_equiv(&m, &n, &u)
    };
    let mut j = v.to_json(verb);
    j["left"] = json!(m.to_string());
    j["right"] = json!(n.to_string());
    let text = match &v.witness {
        None => format!(
            "{verb} on all {} states of names {:?} k={}",
            u.size(),
            names_of(&u),
            u.k
        ),
        Some(s) => format!(
            "not {verb}: at {s} {m} gives {}, {n} gives {}",
            eval_atomic(&m, s),
            eval_atomic(&n, s)
        ),
    };
    if let Some(s) = &v.witness {
        j["outcomes"] = json!({"left": eval_atomic(&m, s), "right": eval_atomic(&n, s)});
    }
    Ok(Report::new(if v.holds { Code::Ok } else { Code::Violation }, j, text))
}

fn names_of(u: &StateUniverse) -> Vec<&str> {
    u.names.iter().map(Name::as_str).collect()
}

fn normalize_cmd(s: &str) -> Outcome {
    let m = input::expr(s)?;
    let nf = normalize(&m);
    let j = json!({"input": m.to_string(), "normalForm": nf.to_string(), "isNormalForm": is_normal_form(&nf)});
    Ok(Report::new(Code::Ok, j, nf.to_string()))
}

fn laws_cmd(o: &Opts, law: Option<&str>, perturb: bool, instances: usize) -> Outcome {
    let mut list: Vec<&str> = match law {
        Some(l) if laws::is_law(l) => vec![l],
        Some(l) => {
            return Err(Failure::usage(format!(
                "unknown law `{l}`; known: {}, {}",
                laws::all_laws().join(", "),
                laws::PERTURBED
            )))
        }
        None => laws::all_laws(),
    };
    if perturb && !list.contains(&laws::PERTURBED) {
        list.push(laws::PERTURBED);
    }
    let d = LawConfig::default();
    let names = match &o.names {
        Some(_) => input::names(o, [])?.into_iter().collect(),
        None => d.names.clone(),
    };
    if names.is_empty() {
        return Err(Failure::usage("laws need at least one name"));
    }
    let cfg = LawConfig {
        names,
        k: o.mult.unwrap_or(d.k),
        depth: o.depth.unwrap_or(d.depth),
        instances,
        seed: o.seed,
        comp_bound: o.comp_bound,
    };
    let reports: Vec<LawReport> = list.par_iter().map(|l| check_law(l, &cfg)).collect();
    let passed = reports.iter().filter(|r| r.status == LawStatus::Pass).count();
    let mut text = String::new();
    for r in &reports {
        let status = match r.status {
            LawStatus::Pass => "pass",
            LawStatus::Fail => "FAIL",
            LawStatus::Unknown => "unknown",
        };
        text.push_str(&format!("{:<10} {status} ({} checked)\n", r.law, r.checked));
        if let Some(c) = &r.counterexample {
            match &c.state {
                Some(s) => text.push_str(&format!("  {} vs {} differ at {s}\n", c.lhs, c.rhs)),
                None => text.push_str(&format!("  {} vs {} distinguished\n", c.lhs, c.rhs)),
            }
        }
        if let Some(why) = &r.reason {
            text.push_str(&format!("  {why}\n"));
        }
    }
    text.push_str(&format!("{passed}/{} laws pass (seed {})\n", reports.len(), cfg.seed));
    let code = if reports.iter().any(|r| r.status == LawStatus::Fail) {
        Code::Violation
    } else if passed < reports.len() {
        Code::Unknown
    } else {
        Code::Ok
    };
    Ok(Report::new(code, suite_json(&reports, &cfg), text))
}

fn encode_cmd(kind: EncodeKind, terms: &[String], o: &Opts, replicated: bool, n: usize) -> Outcome {
    let mut fresh = FreshSupply::new();
    let bad = |e: atccs::TermError| Failure::usage(e.to_string());
    let p = match kind {
        EncodeKind::Choice => {
            let p = input::process(&gather(terms, o, 1, "term")?[0])?;
            encode::encode_process(&p, &mut fresh).map_err(bad)?
        }
        EncodeKind::Join => {
            let spec = input::join_spec(&gather(terms, o, 1, "pattern")?[0], replicated)?;
            encode::encode_join(&spec, &mut fresh).map_err(bad)?
        }
        EncodeKind::Joindef => {
            let all = gather(terms, o, terms.len() + o.files.len(), "pattern")?;
            let specs: Vec<JoinSpec> = all
                .iter()
                .map(|s| input::join_spec(s, false))
                .collect::<Result<_, _>>()?;
            encode::encode_join_definition(&specs, &mut fresh).map_err(bad)?
        }
        EncodeKind::Leader => encode::leader_election(n).map_err(bad)?,
        EncodeKind::Philosophers => encode::dining_philosophers(),
    }
    .export_fresh();
    let ast = serde_json::to_value(&p).map_err(|e| Failure::new(Code::Unknown, e.to_string()))?;
    Ok(Report::new(
        Code::Ok,
        json!({"text": p.to_string(), "ast": ast}),
        p.to_string(),
    ))
}

fn may_bounds_from(o: &Opts) -> Bounds {
    let d = may_bounds();
    Bounds {
        max_multiplicity: o.mult.unwrap_or(d.max_multiplicity),
        max_repl_unfold: o.repl_bound.unwrap_or(d.max_repl_unfold),
        max_steps: o.depth.unwrap_or(d.max_steps),
        max_nodes: o.max_nodes.unwrap_or(d.max_nodes),
        raw: false,
    }
}

fn may(terms: &[String], o: &Opts) -> Outcome {
    let (p, obs) = (input::process(&terms[0])?, input::process(&terms[1])?);
    let b = may_bounds_from(o);
    let r = may_passes(&p, &obs, &b).map_err(|e| Failure::usage(e.to_string()))?;
    let (code, verdict) = match (r.passes, r.truncated) {
        (true, _) => (Code::Ok, "passes"),
        (false, false) => (Code::Violation, "fails"),
        (false, true) => (Code::Unknown, "unknown"),
    };
    let j = json!({
        "process": p.to_string(),
        "observer": obs.to_string(),
        "verdict": verdict,
        "explored": r.explored,
        "truncated": r.truncated,
        "bounds": bounds_json(&b),
    });
    let text = format!("{p} {verdict} {obs} ({} configurations explored)", r.explored);
    Ok(Report::new(code, j, text))
}

fn alt(terms: &[String], o: &Opts, trace: Option<&str>) -> Outcome {
    let (p, q) = (input::process(&terms[0])?, input::process(&terms[1])?);
    if let Some(t) = trace {
        let s = Trace::parse(t).map_err(|e| Failure::usage(e.to_string()))?;
        let obs = observer(&s);
        let b = may_bounds_from(o);
        let bad = |e: atccs::TermError| Failure::usage(e.to_string());
        let (rp, rq) = (
            may_passes(&p, &obs, &b).map_err(bad)?,
            may_passes(&q, &obs, &b).map_err(bad)?,
        );
        let (code, what) = if rp.passes && !rq.passes && !rq.truncated {
            (Code::Violation, "reproduced: only the left process passes")
        } else if !rp.passes && rp.truncated || !rq.passes && rq.truncated {
            (Code::Unknown, "inconclusive within bounds")
        } else {
            (Code::Ok, "the trace does not separate the processes")
        };
        let j = json!({
            "trace": s.labels().iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "observer": obs.to_string(),
            "left": rp.passes,
            "right": rq.passes,
            "replay": what,
        });
        return Ok(Report::new(code, j, format!("observer {obs}: {what}")));
    }
    let mut cfg = AltConfig::for_pair(&p, &q);
    cfg.lts = lts_config(o, &[&p, &q])?;
    if let Some(n) = o.trace_len {
        cfg.trace_len = n;
    }
    let v = alt_preorder(&p, &q, &cfg);
    let mut j = v.to_json();
    j["left"] = json!(p.to_string());
    j["right"] = json!(q.to_string());
    j["env"] = env_json(&cfg.lts.env);
    j["traceLen"] = json!(cfg.trace_len);
    let (code, text) = match &v {
        PreorderVerdict::Holds => (
            Code::Ok,
            format!("{p} may-precedes {q} (traces up to {})", cfg.trace_len),
        ),
        PreorderVerdict::Fails { witness } => (
            Code::Violation,
            format!(
                "fails: {p} has trace {witness} that {q} cannot match\nobserver {}",
                observer(witness)
            ),
        ),
        PreorderVerdict::Unknown { reason } => (Code::Unknown, format!("unknown: {reason}")),
    };
    Ok(Report::new(code, j, text))
}

fn trace_pre(terms: &[String]) -> Outcome {
    let parse = |s: &str| Trace::parse(s).map_err(|e| Failure::usage(e.to_string()));
    let (small, big) = (parse(&terms[0])?, parse(&terms[1])?);
    let by_rewrite = trace_preorder_rewrite(&small, &big).map_err(exhausted)?;
    let by_observer = trace_preorder_observer(&small, &big);
    let j = json!({
        "left": small.to_string(),
        "right": big.to_string(),
        "rewrite": by_rewrite,
        "observer": by_observer,
    });
    if by_rewrite != by_observer {
        return Ok(Report::new(
            Code::Unknown,
            j,
            format!("routes disagree: rewriting {by_rewrite}, observer {by_observer}"),
        ));
    }
    let code = if by_rewrite { Code::Ok } else { Code::Violation };
    let rel = if by_rewrite { "≼" } else { "⋠" };
    Ok(Report::new(code, j, format!("{small} {rel} {big}")))
}
