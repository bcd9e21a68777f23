use std::io::{BufRead, Write};

use atccs::reduce::{canonical, step_config, Configuration};
use serde_json::{json, Value};

use crate::report::{Code, Failure, Outcome, Report};

fn menu(c: &Configuration) -> Vec<(String, Configuration)> {
    step_config(&c.process, &c.state)
        .into_iter()
        .map(|s| {
            (
                s.derivation.to_string(),
                Configuration::new(canonical(&s.process), s.state),
            )
        })
        .collect()
}

fn menu_text(c: &Configuration, items: &[(String, Configuration)]) -> String {
    let mut s = format!("{c}\n");
    if items.is_empty() {
        s.push_str("stuck: no reduction applies\n");
    }
    for (i, (d, next)) in items.iter().enumerate() {
        s.push_str(&format!("  [{i}] {d}  ->  {next}\n"));
    }
    s
}

fn menu_json(c: &Configuration, items: &[(String, Configuration)]) -> Value {
    json!({
        "config": {"proc": c.process.to_string(), "state": c.state},
        "stuck": items.is_empty(),
        "steps": items.iter().enumerate().map(|(i, (d, n))| json!({
            "index": i,
            "derivation": d,
            "proc": n.process.to_string(),
            "state": n.state,
        })).collect::<Vec<_>>(),
    })
}

/// Applies `picks` in order, then lists the enabled reductions.
pub fn list(start: Configuration, picks: &[usize]) -> Outcome {
    let mut cur = canon(start);
    let mut path = Vec::new();
    for &k in picks {
        let items = menu(&cur);
        let (d, next) = items
            .into_iter()
            .nth(k)
            .ok_or_else(|| Failure::usage(format!("no step [{k}] from {cur}")))?;
        path.push(d);
        cur = next;
    }
    let items = menu(&cur);
    let mut j = menu_json(&cur, &items);
    j["path"] = json!(path);
    Ok(Report::new(Code::Ok, j, menu_text(&cur, &items)))
}

fn canon(c: Configuration) -> Configuration {
    Configuration::new(canonical(&c.process), c.state)
}

/// Numbered menu on stdin: an index takes that step, `u` undoes, `q` quits.
pub fn interactive(start: Configuration) -> Outcome {
    let stdin = std::io::stdin();
    let mut out = std::io::stdout().lock();
    let mut history = vec![canon(start)];
    let mut lines = stdin.lock().lines();
    loop {
        let cur = history.last().expect("history never empty").clone();
        let items = menu(&cur);
        let _ = write!(out, "{}> ", menu_text(&cur, &items));
        let _ = out.flush();
        let Some(Ok(line)) = lines.next() else { break };
        match line.trim() {
            "q" => break,
            "u" => {
                if history.len() > 1 {
                    history.pop();
                } else {
                    let _ = writeln!(out, "nothing to undo");
                }
            }
            "" => {}
            other => match other.parse::<usize>().ok().and_then(|k| items.get(k)) {
                Some((_, next)) => history.push(next.clone()),
                None => {
                    let _ = writeln!(out, "no such step: {other}");
                }
            },
        }
    }
    let _ = writeln!(out);
    let last = history.last().expect("history never empty");
    let j = json!({"final": {"proc": last.process.to_string(), "state": last.state}, "steps": history.len() - 1});
    Ok(Report::new(Code::Ok, j, format!("final {last}")))
}
