//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero when any criterion fails. Positional arguments select
//! criteria by number, e.g. `cargo test --test acceptance -- 3 7`.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use atccs::atomic::{atomic_equiv, eval_atomic, is_normal_form, normalize, Outcome, StateUniverse};
use atccs::encode::{
    chopsticks_of, dining_philosophers, encode_choice, encode_join, leader_election, philosopher_signal, JoinSpec,
};
use atccs::gen::{self, ProcessShape};
use atccs::laws::{self, LawConfig, LawStatus};
use atccs::lts::{
    labeled_successors, strong_bisim, weak_async_bisim, BisimConfig, BisimVerdict, Label, Lts, LtsBounds, LtsConfig,
};
use atccs::reduce::canon::erase_repl_counters;
use atccs::reduce::{canonical, explore, step_config, Bounds, Configuration};
use atccs::testing::{
    self, alt_preorder, ccs_translation, enumerate_observers, observer, AltConfig, PreorderVerdict, Trace,
};
use atccs::{log_effect_eq, FreshSupply, Multiset, Name, Polarity, Process};
use rand::Rng;

use common::{enumerated_successors, may_oracle, n, ns, p};

type Check = fn() -> Result<String, String>;

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Option<Duration>,
    check: Check,
}

fn criteria() -> Vec<Criterion> {
    let secs = |s| Some(Duration::from_secs(s));
    vec![
        Criterion {
            id: 1,
            title: "algebraic law suite",
            limit: secs(60),
            check: c01_laws,
        },
        Criterion {
            id: 2,
            title: "normal-form soundness",
            limit: secs(30),
            check: c02_normal_forms,
        },
        Criterion {
            id: 3,
            title: "labelled semantics vs reduction enumeration",
            limit: None,
            check: c03_cross_oracle,
        },
        Criterion {
            id: 4,
            title: "labelled-transition implications and output properties",
            limit: None,
            check: c04_transition_properties,
        },
        Criterion {
            id: 5,
            title: "transaction evaluation confluence",
            limit: None,
            check: c05_confluence,
        },
        Criterion {
            id: 6,
            title: "choice and join encodings up to weak async bisimilarity",
            limit: secs(300),
            check: c06_encodings,
        },
        Criterion {
            id: 7,
            title: "leader election: exactly one leader",
            limit: secs(60),
            check: c07_leader_election,
        },
        Criterion {
            id: 8,
            title: "dining philosophers: no deadlock, no adjacent eaters",
            limit: secs(120),
            check: c08_philosophers,
        },
        Criterion {
            id: 9,
            title: "trace preorder: rewriting vs observers",
            limit: None,
            check: c09_trace_preorder,
        },
        Criterion {
            id: 10,
            title: "alternative preorder vs brute-force may-testing",
            limit: None,
            check: c10_full_abstraction,
        },
        Criterion {
            id: 11,
            title: "may-blindness of normal forms",
            limit: None,
            check: c11_may_blindness,
        },
        Criterion {
            id: 12,
            title: "congruence spot-checks",
            limit: None,
            check: c12_congruence,
        },
    ]
}

fn main() -> ExitCode {
    let wanted: BTreeSet<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = vec![];
    let mut ran = 0;
    for c in criteria() {
        if !wanted.is_empty() && !wanted.contains(&c.id) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = (c.check)();
        let took = start.elapsed();
        let late = c.limit.is_some_and(|l| took > l);
        let limit = c
            .limit
            .map(|l| format!(" (limit {}s)", l.as_secs()))
            .unwrap_or_default();
        let (status, detail) = match (&result, late) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("over time: {d}")),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        println!(
            "criterion {:>2} {status} [{:.1}s{limit}] {}: {detail}",
            c.id,
            took.as_secs_f64(),
            c.title
        );
        if status == "FAIL" {
            failed.push(c.id);
        }
    }
    println!("acceptance: {}/{} criteria passed", ran - failed.len(), ran);
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}

fn verdict_ok(v: &BisimVerdict) -> bool {
    v.is_bisimilar()
}

// ---------------------------------------------------------------------------

fn c01_laws() -> Result<String, String> {
    let mut checked = 0;
    for k in 0..=2 {
        let cfg = LawConfig {
            names: ns(&["a", "b", "c"]),
            k,
            depth: 3,
            instances: 50,
            seed: 100 + k as u64,
            comp_bound: None,
        };
        for law in laws::ATOMIC_LAWS {
            let r = laws::check_law(law, &cfg);
            if r.status != LawStatus::Pass || r.checked < 50 {
                return Err(format!("{law} at k={k}: {r:?}"));
            }
            checked += r.checked;
        }
    }
    for law in laws::PROCESS_LAWS {
        let r = laws::check_law(law, &LawConfig::default());
        if r.status != LawStatus::Pass {
            return Err(format!("{law}: {r:?}"));
        }
    }
    Ok(format!(
        "7 atomic laws over {checked} instances (k = 0, 1, 2), 3 process laws bisimilar"
    ))
}

fn c02_normal_forms() -> Result<String, String> {
    let names = ns(&["a", "b", "c"]);
    let mut rng = gen::rng(2);
    for i in 0..500 {
        let e = gen::expr(&mut rng, &names, 4);
        let nf = normalize(&e);
        if !is_normal_form(&nf) {
            return Err(format!("#{i}: {nf} is not a normal form (input {e})"));
        }
        if normalize(&nf) != nf {
            return Err(format!("#{i}: normalize is not idempotent on {nf}"));
        }
        let u = StateUniverse::automatic(&[&e, &nf]);
        let v = atomic_equiv(&e, &nf, &u);
        if !v.holds {
            return Err(format!("#{i}: {e} vs {nf} differ at {:?}", v.witness));
        }
    }
    Ok("500 expressions of depth <= 4".into())
}

/// Compares both routes on every state reachable from each sampled process,
/// up to 200 states per process.
fn c03_cross_oracle() -> Result<String, String> {
    let names = ns(&["a", "b", "c"]);
    let mut shape = ProcessShape::new(names.clone(), 3);
    shape.choice = true;
    let env = StateUniverse::new(names, 2);
    let bounds = LtsBounds::default();
    let mut rng = gen::rng(3);
    let (mut edges, mut states) = (0, 0);
    for i in 0..200 {
        let root = canonical(&gen::process(&mut rng, &shape));
        let mut seen = BTreeSet::from([root.clone()]);
        let mut queue = std::collections::VecDeque::from([root.clone()]);
        while let Some(q) = queue.pop_front() {
            let sym: BTreeSet<(Label, Process)> = labeled_successors(&q, &env, &bounds).edges.into_iter().collect();
            let enu = enumerated_successors(&q, &env, &bounds);
            if sym != enu {
                let only_sym: Vec<_> = sym.difference(&enu).map(|(l, r)| format!("{l} {r}")).collect();
                let only_enu: Vec<_> = enu.difference(&sym).map(|(l, r)| format!("{l} {r}")).collect();
                return Err(format!(
                    "#{i} {root}, at {q}: only symbolic {only_sym:?}, only enumerated {only_enu:?}"
                ));
            }
            states += 1;
            edges += sym.len();
            for (_, r) in sym {
                if seen.len() < 200 && seen.insert(r.clone()) {
                    queue.push_back(r);
                }
            }
        }
    }
    Ok(format!(
        "200 processes, {states} reachable states, {edges} labelled edges identical"
    ))
}

// ---------------------------------------------------------------------------
// criterion 4

#[derive(Default)]
struct Tally {
    checked: BTreeMap<&'static str, usize>,
    violations: BTreeMap<&'static str, usize>,
    first: BTreeMap<&'static str, String>,
}

impl Tally {
    fn record(&mut self, rule: &'static str, ok: bool, what: impl FnOnce() -> String) {
        *self.checked.entry(rule).or_default() += 1;
        if !ok {
            *self.violations.entry(rule).or_default() += 1;
            self.first.entry(rule).or_insert_with(what);
        }
    }
}

struct EdgeOracle {
    env: StateUniverse,
    bounds: LtsBounds,
    cache: HashMap<Process, BTreeSet<(Label, Process)>>,
}

impl EdgeOracle {
    fn edges(&mut self, p: &Process) -> &BTreeSet<(Label, Process)> {
        let c = canonical(p);
        let (env, bounds) = (&self.env, &self.bounds);
        self.cache
            .entry(c.clone())
            .or_insert_with(|| labeled_successors(&c, env, bounds).edges.into_iter().collect())
    }

    fn has(&mut self, p: &Process, l: &Label, q: &Process) -> bool {
        let q = canonical(q);
        self.edges(p).contains(&(l.clone(), q))
    }
}

fn c04_transition_properties() -> Result<String, String> {
    let names = ns(&["a", "b"]);
    let env = StateUniverse::new(names.clone(), 2);
    let mut shape = ProcessShape::new(names.clone(), 3);
    shape.max_pending = 2;
    let mut oracle = EdgeOracle {
        env: env.clone(),
        bounds: LtsBounds::default(),
        cache: HashMap::new(),
    };
    let partners = [p("b!"), p("a?.0"), p("atomic(a?.b!.end)")];
    let senders = [p("a!"), p("a! | b?.0")];
    let receivers = [p("a?.0"), p("atomic(a?.end)"), p("a?.b!")];
    let mut rng = gen::rng(4);
    let mut tally = Tally::default();
    let mut sampled = 0;
    let mut states = 0;
    while sampled < 100 {
        let root = gen::process(&mut rng, &shape);
        let mut lts = Lts::new(LtsConfig::new(env.clone()));
        let r = lts.intern(&root);
        if lts.explore_from(r).is_err() || lts.len() > 300 {
            continue;
        }
        sampled += 1;
        states += lts.len();
        for s in 0..lts.len() {
            let sp = lts.state(s).clone();
            for (label, t) in lts.successors(s).iter() {
                let tp = lts.state(*t).clone();
                let edge = || format!("{sp} --{label}--> {tp}");
                for q in &partners {
                    let ok = oracle.has(
                        &Process::par2(sp.clone(), q.clone()),
                        label,
                        &Process::par2(tp.clone(), q.clone()),
                    );
                    tally.record("par", ok, || format!("{} with partner {q}", edge()));
                }
                match label {
                    Label::Block(th) if th.size() == 1 => {
                        let a = th.elements()[0].clone();
                        for q in &senders {
                            let q = q.rename(&|x| if x.as_str() == "a" { a.clone() } else { x.clone() });
                            let outs: Vec<Process> = oracle
                                .edges(&q)
                                .iter()
                                .filter(|(l, _)| *l == Label::Out(a.clone()))
                                .map(|(_, r)| r.clone())
                                .collect();
                            for q2 in outs {
                                let ok = oracle.has(
                                    &Process::par2(sp.clone(), q.clone()),
                                    &Label::tau(),
                                    &Process::par2(tp.clone(), q2.clone()),
                                );
                                tally.record("com", ok, || format!("{} against sender {q}", edge()));
                            }
                        }
                    }
                    Label::Out(a) => {
                        for q in &receivers {
                            let q = q.rename(&|x| if x.as_str() == "a" { a.clone() } else { x.clone() });
                            let ins: Vec<Process> = oracle
                                .edges(&q)
                                .iter()
                                .filter(|(l, _)| *l == Label::input(a.clone()))
                                .map(|(_, r)| r.clone())
                                .collect();
                            for q2 in ins {
                                let ok = oracle.has(
                                    &Process::par2(q.clone(), sp.clone()),
                                    &Label::tau(),
                                    &Process::par2(q2.clone(), tp.clone()),
                                );
                                tally.record("com", ok, || format!("{} against receiver {q}", edge()));
                            }
                        }
                    }
                    _ => {}
                }
                for x in &names {
                    let mentions = label.names().contains(x);
                    for k in 0..=2u32 {
                        if !mentions {
                            let ok = oracle.has(
                                &Process::hide(sp.clone(), x.clone(), k),
                                label,
                                &Process::hide(tp.clone(), x.clone(), k),
                            );
                            tally.record("hid", ok, || format!("{} under \\ {x}:{k}", edge()));
                        }
                        if *label == Label::Out(x.clone()) {
                            let ok = oracle.has(
                                &Process::hide(sp.clone(), x.clone(), k),
                                &Label::tau(),
                                &Process::hide(tp.clone(), x.clone(), k + 1),
                            );
                            tally.record("hidOut", ok, || format!("{} under \\ {x}:{k}", edge()));
                        }
                        if let Label::Block(th) = label {
                            let m = th.count(x);
                            if m > 0 {
                                let rest = Label::Block(th.without(x));
                                let ok = oracle.has(
                                    &Process::hide(sp.clone(), x.clone(), k + m),
                                    &rest,
                                    &Process::hide(tp.clone(), x.clone(), k),
                                );
                                tally.record("hidAt", ok, || format!("{} under \\ {x}:{}", edge(), k + m));
                            }
                        }
                    }
                }
                if let Label::Out(a) = label {
                    let with_out = canonical(&Process::par2(tp.clone(), Process::output(a.clone())));
                    let ok =
                        with_out == sp || strong_bisim(&sp, &with_out, &BisimConfig::new(env.clone())).is_bisimilar();
                    tally.record("output persistence", ok, edge);
                    for (l2, u) in lts.successors(*t).iter() {
                        let up = lts.state(*u).clone();
                        let ok = oracle
                            .edges(&sp)
                            .clone()
                            .iter()
                            .any(|(l1, mid)| l1 == l2 && oracle.has(mid, label, &up));
                        tally.record("output delay", ok, || format!("{} then {l2} to {up}", edge()));
                    }
                }
            }
        }
    }
    let summary: Vec<String> = tally
        .checked
        .iter()
        .map(|(r, c)| format!("{r} {}/{c}", c - tally.violations.get(r).copied().unwrap_or(0)))
        .collect();
    let head = format!("{sampled} LTSs, {states} states; holding: {}", summary.join(", "));
    if tally.violations.is_empty() {
        Ok(head)
    } else {
        let firsts: Vec<String> = tally.first.iter().map(|(r, e)| format!("{r}: {e}")).collect();
        Err(format!("{head}; first violations: {}", firsts.join("; ")))
    }
}

// ---------------------------------------------------------------------------

fn c05_confluence() -> Result<String, String> {
    let names = ns(&["a", "b", "c"]);
    let mut rng = gen::rng(5);
    let mut runs = 0;
    for i in 0..200 {
        let e = gen::small_expr(&mut rng, &names, 7);
        let s = gen::state(&mut rng, &names, 2);
        let reference = eval_atomic(&e, &s);
        let direct = common::big_step(&e, &s);
        match (&reference, &direct) {
            (Outcome::Aborted, None) => {}
            (Outcome::Committed(l), Some(d)) if log_effect_eq(l, d, &s).holds() => {}
            _ => return Err(format!("#{i} {e} at {s}: evaluator {reference}, big-step {direct:?}")),
        }
        for o in common::interleaving_outcomes(&e, &s) {
            runs += 1;
            let agree = match (&reference, &o) {
                (Outcome::Aborted, None) => true,
                (Outcome::Committed(l), Some(d)) => log_effect_eq(l, d, &s).holds(),
                _ => false,
            };
            if !agree {
                return Err(format!(
                    "#{i} {e} at {s}: left-first {reference}, some interleaving {o:?}"
                ));
            }
        }
    }
    Ok(format!(
        "200 expressions of size <= 7: every interleaving ends in one of {runs} terminal outcomes, all agreeing"
    ))
}

// ---------------------------------------------------------------------------
// criterion 6

/// Some configuration reachable from `start` has state `target` and a
/// process weakly asynchronously bisimilar to `expected`. Candidates equal
/// to `expected` up to replication counters are tried first.
fn reaches_equivalent(start: &Configuration, target: &Multiset, expected: &Process) -> Result<(), String> {
    let bounds = Bounds {
        max_steps: 24,
        max_nodes: 20_000,
        ..Bounds::default()
    };
    let g = explore(start, &bounds).map_err(|e| e.to_string())?;
    let goal = erase_repl_counters(expected);
    let mut candidates: Vec<&Configuration> = g.nodes.iter().filter(|c| c.state == *target).collect();
    candidates.sort_by_key(|c| erase_repl_counters(&c.process) != goal);
    let mut unknown = None;
    for c in candidates {
        match weak_async_bisim(&c.process, expected, &BisimConfig::for_pair(&c.process, expected)) {
            BisimVerdict::Bisimilar { .. } => return Ok(()),
            BisimVerdict::Unknown { reason } => unknown = Some(reason),
            BisimVerdict::Distinguished { .. } => {}
        }
    }
    Err(match unknown {
        Some(r) => format!("unknown ({r})"),
        None => format!("no reachable match among {} configurations", g.nodes.len()),
    })
}

fn c06_encodings() -> Result<String, String> {
    let names = ns(&["a", "b", "c"]);
    let mut shape = ProcessShape::new(names.clone(), 1);
    shape.atomic = false;
    shape.hiding = false;
    let mut rng = gen::rng(6);
    let mut rules: BTreeMap<&'static str, usize> = BTreeMap::new();
    for i in 0..100 {
        let spec = gen::choice_spec(&mut rng, &shape, 3);
        let native = Process::choice(spec.clone());
        let enc = encode_choice(&spec, &mut FreshSupply::new()).map_err(|e| e.to_string())?;
        let chans: BTreeSet<Name> = spec.iter().map(|b| b.channel.clone()).collect();
        for s in StateUniverse::new(chans, 1).states() {
            for st in step_config(&native, &s) {
                let rule = st.derivation.rule().name();
                if !matches!(rule, "c-inp" | "c-out" | "c-pass") {
                    continue;
                }
                *rules.entry(rule).or_default() += 1;
                reaches_equivalent(&Configuration::new(enc.clone(), s.clone()), &st.state, &st.process)
                    .map_err(|e| format!("choice #{i} {native} at {s} by {rule}: {e}"))?;
            }
        }
    }
    let mut joins = [0usize; 2];
    for i in 0..100 {
        let len = rng.gen_range(1..=3);
        let pattern: Vec<(Polarity, Name)> = (0..len)
            .map(|_| {
                let pol = if rng.gen_bool(0.7) { Polarity::In } else { Polarity::Out };
                (pol, names[rng.gen_range(0..names.len())].clone())
            })
            .collect();
        let cont = gen::process(&mut rng, &shape);
        let mut spec = JoinSpec::new(pattern.clone(), cont.clone());
        spec.replicated = i % 2 == 1;
        let enc = encode_join(&spec, &mut FreshSupply::new()).map_err(|e| e.to_string())?;
        let reads: Multiset = pattern
            .iter()
            .filter(|(p, _)| *p == Polarity::In)
            .map(|(_, a)| a.clone())
            .collect();
        let writes: Multiset = pattern
            .iter()
            .filter(|(p, _)| *p == Polarity::Out)
            .map(|(_, a)| a.clone())
            .collect();
        let rest = gen::state(&mut rng, &names, 1);
        let expected = if spec.replicated {
            Process::par2(cont.clone(), enc.clone())
        } else {
            cont.clone()
        };
        reaches_equivalent(
            &Configuration::new(enc.clone(), rest.union(&reads)),
            &rest.union(&writes),
            &expected,
        )
        .map_err(|e| format!("join #{i} {pattern:?}.{cont} from {}: {e}", rest.union(&reads)))?;
        joins[spec.replicated as usize] += 1;
    }
    Ok(format!(
        "100 choices ({}), 100 joins ({} plain, {} replicated)",
        rules
            .iter()
            .map(|(r, c)| format!("{r} x{c}"))
            .collect::<Vec<_>>()
            .join(", "),
        joins[0],
        joins[1]
    ))
}

// ---------------------------------------------------------------------------
// criterion 7

fn top_outputs(p: &Process, out: &mut Multiset) {
    match p {
        Process::Output { channel } => out.insert(channel.clone()),
        Process::Par { parts } => parts.iter().for_each(|q| top_outputs(q, out)),
        _ => {}
    }
}

/// Outputs emitted so far: those in the state plus unguarded ones not yet
/// moved there.
fn emitted(c: &Configuration) -> Multiset {
    let mut m = c.state.clone();
    top_outputs(&c.process, &mut m);
    m
}

fn c07_leader_election() -> Result<String, String> {
    let mut report = vec![];
    let mut problems = vec![];
    for size in [2usize, 3] {
        let sys = leader_election(size).map_err(|e| e.to_string())?;
        let bounds = Bounds {
            max_nodes: 500_000,
            max_steps: usize::MAX,
            ..Bounds::default()
        };
        let g = explore(&Configuration::initial(sys), &bounds).map_err(|e| e.to_string())?;
        if g.truncated {
            problems.push(format!("n={size}: exploration truncated"));
        }
        let win = |i: usize| n(&format!("win_{i}"));
        let loose = |i: usize| n(&format!("loose_{i}"));
        let t = n("t");
        let (mut tokens, mut many_wins, mut bad_ends) = (0, 0, 0);
        let mut example = None;
        for c in &g.nodes {
            let e = emitted(c);
            if e.count(&t) > 1 {
                tokens += 1;
            }
            if (1..=size).map(|i| e.count(&win(i))).sum::<u32>() > 1 {
                many_wins += 1;
                example.get_or_insert_with(|| format!("wins emitted together in {e}"));
            }
        }
        for &d in &g.deadlocks {
            let e = emitted(&g.nodes[d]);
            let winners: Vec<usize> = (1..=size).filter(|&i| e.count(&win(i)) == 1).collect();
            let ok = winners.len() == 1 && (1..=size).all(|j| e.count(&win(j)) + e.count(&loose(j)) == 1);
            if !ok {
                bad_ends += 1;
                example.get_or_insert_with(|| format!("maximal path ending in state {}", e));
            }
        }
        report.push(format!(
            "n={size}: {} states, {} terminal, {bad_ends} terminal without exactly one leader, {many_wins} states with several wins, {tokens} with several tokens",
            g.nodes.len(),
            g.deadlocks.len()
        ));
        if bad_ends + many_wins + tokens > 0 {
            problems.push(format!("n={size}: {}", example.unwrap_or_default()));
        }
    }
    if problems.is_empty() {
        Ok(report.join("; "))
    } else {
        Err(format!("{}; e.g. {}", report.join("; "), problems.join("; ")))
    }
}

// ---------------------------------------------------------------------------
// criterion 8

/// Philosophers between picking up and putting down their chopsticks: the
/// commit signal is pending or emitted, or an `e_i?`/`t_i?` prefix is
/// active.
fn eating(p: &Process, out: &mut BTreeSet<usize>) {
    let signal = |name: &Name| (0..4).find(|&i| *name == philosopher_signal(i));
    let prefix = |name: &Name| (0..4).find(|&i| name.as_str() == format!("e{i}") || name.as_str() == format!("t{i}"));
    match p {
        Process::Par { parts } => parts.iter().for_each(|q| eating(q, out)),
        Process::Hide { body, name, pending } => {
            if *pending > 0 {
                out.extend(signal(name));
            }
            eating(body, out);
        }
        Process::Output { channel } => out.extend(signal(channel)),
        Process::Input { channel, .. } => out.extend(prefix(channel)),
        _ => {}
    }
}

/// The closed system in which every philosopher's `e_i`/`t_i` is already
/// available. A deadlock is a configuration from which the run where every
/// philosopher has eaten and thought can no longer be reached.
fn c08_philosophers() -> Result<String, String> {
    let signals: Multiset = (0..4)
        .flat_map(|i| [n(&format!("e{i}")), n(&format!("t{i}"))])
        .collect();
    let bounds = Bounds {
        max_nodes: 1_000_000,
        max_steps: usize::MAX,
        ..Bounds::default()
    };
    let g = explore(&Configuration::new(dining_philosophers(), signals), &bounds).map_err(|e| e.to_string())?;
    if g.truncated {
        return Err("exploration truncated".into());
    }
    let mut most = 0;
    for c in &g.nodes {
        let mut who = BTreeSet::new();
        eating(&c.process, &mut who);
        for &i in &who {
            if who.contains(&((i + 1) % 4)) {
                let (l, r) = chopsticks_of(i);
                return Err(format!(
                    "philosophers {i} and {} both eat (sharing {r}, {l} on the left): {}",
                    (i + 1) % 4,
                    c.process
                ));
            }
        }
        most = most.max(who.len());
    }
    let done: Vec<usize> = g
        .deadlocks
        .iter()
        .copied()
        .filter(|&d| g.nodes[d].state.is_empty())
        .collect();
    if let Some(&d) = g.deadlocks.iter().find(|&&d| !g.nodes[d].state.is_empty()) {
        let c = &g.nodes[d];
        return Err(format!("deadlock: {} with {} unconsumed", c.process, c.state));
    }
    let mut preds = vec![vec![]; g.nodes.len()];
    for e in &g.edges {
        preds[e.to].push(e.from);
    }
    let mut live = vec![false; g.nodes.len()];
    let mut stack = done.clone();
    for &d in &done {
        live[d] = true;
    }
    while let Some(x) = stack.pop() {
        for &y in &preds[x] {
            if !live[y] {
                live[y] = true;
                stack.push(y);
            }
        }
    }
    if let Some(bad) = live.iter().position(|l| !l) {
        return Err(format!("no way to finish from {}", g.nodes[bad]));
    }
    Ok(format!(
        "{} configurations, {} edges, every one can still finish, at most {most} eating at once",
        g.nodes.len(),
        g.edges.len()
    ))
}

// ---------------------------------------------------------------------------

fn all_traces(alphabet: &[Label], max_len: usize) -> Vec<Trace> {
    let mut out = vec![Trace::empty()];
    let mut level = vec![vec![]];
    for _ in 0..max_len {
        let mut next = vec![];
        for t in &level {
            for l in alphabet {
                let mut u: Vec<Label> = t.clone();
                u.push(l.clone());
                next.push(u);
            }
        }
        out.extend(next.iter().map(|t| Trace::new(t.clone()).unwrap()));
        level = next;
    }
    out
}

fn c09_trace_preorder() -> Result<String, String> {
    let (a, b) = (n("a"), n("b"));
    let alphabet = vec![
        Label::Out(a.clone()),
        Label::Out(b.clone()),
        Label::input(a.clone()),
        Label::input(b.clone()),
        Label::Block([a, b].into_iter().collect()),
    ];
    let traces = all_traces(&alphabet, 4);
    let mut pairs = 0;
    let mut related = 0;
    for s in &traces {
        for s2 in &traces {
            if s.len() + s2.len() > 4 {
                continue;
            }
            pairs += 1;
            let by_rewriting = testing::trace_preorder_rewrite(s2, s).map_err(|e| e.to_string())?;
            let by_observer = testing::trace_preorder_observer(s2, s);
            if by_rewriting != by_observer {
                return Err(format!("{s2} vs {s}: rewriting {by_rewriting}, observer {by_observer}"));
            }
            related += by_rewriting as usize;
        }
    }
    Ok(format!(
        "{pairs} pairs with combined length <= 4 over 2 names, {related} related, all agree"
    ))
}

/// Height of `o` as counted by the observer enumeration: prefixes and
/// binary parallel compositions each add one level.
fn observer_depth(o: &Process) -> usize {
    match o {
        Process::Nil | Process::Output { .. } => 1,
        Process::Input { body, .. } => 1 + observer_depth(body),
        Process::Par { parts } => {
            let mut hs: Vec<usize> = parts.iter().map(observer_depth).collect();
            while hs.len() > 1 {
                hs.sort_unstable_by(|a, b| b.cmp(a));
                let (x, y) = (hs.pop().unwrap(), hs.pop().unwrap());
                hs.push(x.max(y) + 1);
            }
            hs.pop().unwrap_or(1)
        }
        _ => usize::MAX,
    }
}

fn c10_full_abstraction() -> Result<String, String> {
    let names = ns(&["a", "b"]);
    let mut shape = ProcessShape::new(names.clone(), 3);
    shape.max_pending = 1;
    let observers = enumerate_observers(&names, 3);
    let mut rng = gen::rng(10);
    let (mut agree, mut unknown, mut beyond, mut holds) = (0, vec![], vec![], 0);
    for i in 0..50 {
        let pp = gen::process(&mut rng, &shape);
        let qq = if i % 2 == 0 {
            Process::par2(pp.clone(), gen::process(&mut rng, &shape))
        } else {
            gen::process(&mut rng, &shape)
        };
        let mut cfg = AltConfig::for_pair(&pp, &qq);
        cfg.trace_len = 10;
        let alt = alt_preorder(&pp, &qq, &cfg);
        let mut brute = Some(true);
        let mut separating = None;
        for o in &observers {
            let mp = may_oracle(&pp, o, 20_000, 4, 3);
            let mq = may_oracle(&qq, o, 20_000, 4, 3);
            match (mp, mq) {
                (Some(true), Some(false)) => {
                    brute = Some(false);
                    separating = Some(o.clone());
                    break;
                }
                (Some(true), None) | (None, _) => brute = brute.and(None),
                _ => {}
            }
        }
        match (alt.holds(), brute) {
            (Some(x), Some(y)) if x == y => {
                agree += 1;
                holds += x as usize;
            }
            (None, _) | (_, None) => unknown.push(format!("#{i}: alt {:?}, brute {brute:?}", alt.holds())),
            (Some(false), Some(true)) => {
                let PreorderVerdict::Fails { witness } = &alt else {
                    unreachable!()
                };
                let o = observer(witness);
                let needed = observer_depth(&o);
                let direct = (may_oracle(&pp, &o, 20_000, 4, 3), may_oracle(&qq, &o, 20_000, 4, 3));
                if needed > 3 && direct == (Some(true), Some(false)) {
                    beyond.push(format!("#{i} by {o} (depth {needed})"));
                } else {
                    return Err(format!(
                        "#{i} {pp} vs {qq}: alt fails with {witness}, no observer separates"
                    ));
                }
            }
            (Some(true), Some(false)) => {
                return Err(format!(
                    "#{i} {pp} vs {qq}: alt holds, observer {} separates",
                    separating.map(|o| o.to_string()).unwrap_or_default()
                ))
            }
            _ => unreachable!(),
        }
    }
    let mut msg = format!(
        "50 pairs, {} observers: {agree} agree ({holds} related)",
        observers.len()
    );
    if !beyond.is_empty() {
        msg.push_str(&format!(
            ", {} separated only by deeper observers, confirmed directly: {}",
            beyond.len(),
            beyond.join("; ")
        ));
    }
    if !unknown.is_empty() {
        msg.push_str(&format!(
            ", {} unknown within the bounds: {}",
            unknown.len(),
            unknown.join("; ")
        ));
    }
    Ok(msg)
}

fn c11_may_blindness() -> Result<String, String> {
    let names = ns(&["a", "b", "c"]);
    let mut rng = gen::rng(11);
    for i in 0..100 {
        let m = gen::normal_form(&mut rng, &names, 3, 3);
        let at = Process::atomic(m.clone());
        let tr = ccs_translation(&m).map_err(|e| e.to_string())?;
        let cfg = AltConfig::for_pair(&at, &tr);
        let there = alt_preorder(&at, &tr, &cfg);
        let back = alt_preorder(&tr, &at, &cfg);
        if there != PreorderVerdict::Holds || back != PreorderVerdict::Holds {
            return Err(format!(
                "#{i} {m} vs {tr}: {:?} / {:?}",
                there.to_json(),
                back.to_json()
            ));
        }
    }
    Ok("100 normal forms related both ways to their translations".into())
}

// ---------------------------------------------------------------------------

fn equivalent_candidates(rng: &mut impl Rng, names: &[Name]) -> (Process, Process) {
    let shape = ProcessShape::new(names.to_vec(), 2);
    let a = names[rng.gen_range(0..names.len())].clone();
    match rng.gen_range(0..4) {
        0..=2 => {
            let law = laws::PROCESS_LAWS[rng.gen_range(0..3)];
            let (l, r) = laws::process_instance(law, &a).unwrap();
            let ctx = gen::process(rng, &shape);
            (Process::par2(ctx.clone(), l), Process::par2(ctx, r))
        }
        _ => {
            let law = laws::ATOMIC_LAWS[rng.gen_range(0..7)];
            let (l, r) = laws::atomic_instances(law, rng, names, 2).swap_remove(0);
            (Process::atomic(l), Process::atomic(r))
        }
    }
}

type Context<'a> = Box<dyn Fn(&Process) -> Process + 'a>;

fn c12_congruence() -> Result<String, String> {
    let names = ns(&["a", "b"]);
    let mut rng = gen::rng(12);
    let (r, a, b) = (n("r"), n("a"), n("b"));
    let contexts: [(&str, Context); 4] = [
        (
            "[] | r!",
            Box::new(|x: &Process| Process::par2(x.clone(), Process::output(r.clone()))),
        ),
        ("a?.[]", Box::new(|x: &Process| Process::input(a.clone(), x.clone()))),
        (
            "[] \\ a:0",
            Box::new(|x: &Process| Process::hide(x.clone(), a.clone(), 0)),
        ),
        (
            "[] | b?.0",
            Box::new(|x: &Process| Process::par2(x.clone(), Process::input(b.clone(), Process::Nil))),
        ),
    ];
    let (mut found, mut tried, mut kept_unknown) = (0, 0, 0);
    while found < 50 {
        tried += 1;
        if tried > 2000 {
            return Err(format!("only {found} equivalent pairs among {tried} candidates"));
        }
        let (x, y) = equivalent_candidates(&mut rng, &names);
        if !verdict_ok(&weak_async_bisim(&x, &y, &BisimConfig::for_pair(&x, &y))) {
            continue;
        }
        found += 1;
        for (label, ctx) in &contexts {
            let (cx, cy) = (ctx(&x), ctx(&y));
            let cfg = BisimConfig::for_pair(&cx, &cy);
            match weak_async_bisim(&cx, &cy, &cfg) {
                BisimVerdict::Bisimilar { .. } => {}
                BisimVerdict::Unknown { .. } => kept_unknown += 1,
                BisimVerdict::Distinguished { .. } => {
                    return Err(format!("{x} ~ {y} but not in context {label}"));
                }
            }
        }
    }
    Ok(format!(
        "50 equivalent pairs (from {tried} candidates) x 4 contexts, {kept_unknown} unknown, none distinguished"
    ))
}
