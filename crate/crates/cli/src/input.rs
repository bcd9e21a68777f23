use std::collections::BTreeSet;

use atccs::encode::JoinSpec;
use atccs::lts::{parse_label, Label};
use atccs::{parse_expr, parse_process, AtomicExpr, Multiset, Name, Polarity, Process};

use crate::report::Failure;
use crate::Opts;

/// Command-line terms followed by the contents of `-f` files.
pub fn gather(args: &[String], opts: &Opts, want: usize, what: &str) -> Result<Vec<String>, Failure> {
    let mut all = args.to_vec();
    for f in &opts.files {
        let s = std::fs::read_to_string(f).map_err(|e| Failure::usage(format!("cannot read {f}: {e}")))?;
        all.push(s.trim().to_string());
    }
    if all.len() != want {
        let plural = if want == 1 { "" } else { "s" };
        return Err(Failure::usage(format!(
            "expected {want} {what}{plural}, got {}",
            all.len()
        )));
    }
    Ok(all)
}

pub fn process(s: &str) -> Result<Process, Failure> {
    parse_process(s).map_err(|e| Failure::usage(format!("{e} in `{s}`")))
}

pub fn expr(s: &str) -> Result<AtomicExpr, Failure> {
    parse_expr(s).map_err(|e| Failure::usage(format!("{e} in `{s}`")))
}

pub fn name(s: &str) -> Result<Name, Failure> {
    Name::new(s.trim()).map_err(|e| Failure::usage(e.to_string()))
}

/// `--names` if given, otherwise the supplied default.
pub fn names(opts: &Opts, default: impl IntoIterator<Item = Name>) -> Result<BTreeSet<Name>, Failure> {
    match &opts.names {
        Some(list) => list.iter().filter(|s| !s.trim().is_empty()).map(|s| name(s)).collect(),
        None => Ok(default.into_iter().collect()),
    }
}

/// `{a,b}`, `a,b`, `{}` or nothing.
pub fn state(s: &str) -> Result<Multiset, Failure> {
    let t = s.trim();
    let inner = t.strip_prefix('{').and_then(|r| r.strip_suffix('}')).unwrap_or(t);
    if inner.trim().is_empty() {
        return Ok(Multiset::new());
    }
    match parse_label(&format!("{{{inner}}}")) {
        Ok(Label::Block(m)) => Ok(m),
        Ok(_) => Err(Failure::usage(format!("not a state: `{s}`"))),
        Err(e) => Err(Failure::usage(format!("{e}"))),
    }
}

pub fn initial_state(opts: &Opts) -> Result<Multiset, Failure> {
    opts.state.as_deref().map(state).unwrap_or_else(|| Ok(Multiset::new()))
}

/// `a?,b! => P` (`×` also separates pattern elements).
pub fn join_spec(s: &str, replicated: bool) -> Result<JoinSpec, Failure> {
    let (pat, cont) = s
        .split_once("=>")
        .ok_or_else(|| Failure::usage(format!("expected `PATTERN => P`, got `{s}`")))?;
    let mut pattern = Vec::new();
    for item in pat.split([',', '×']).map(str::trim).filter(|x| !x.is_empty()) {
        let (pol, n) = if let Some(n) = item.strip_suffix('?') {
            (Polarity::In, n)
        } else if let Some(n) = item.strip_suffix('!') {
            (Polarity::Out, n)
        } else {
            return Err(Failure::usage(format!("pattern element `{item}` must end in ? or !")));
        };
        pattern.push((pol, name(n)?));
    }
    let mut spec = JoinSpec::new(pattern, process(cont.trim())?);
    spec.replicated = replicated;
    Ok(spec)
}
