//! `atccs`: command-line front end.
//!
//! Exit codes: 0 success, 1 violation (with a witness where one exists),
//! 2 unknown or bounds hit, 3 parse or usage error.

mod commands;
mod input;
mod report;
mod stepper;

use std::io::Write;
use std::panic;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{Code, Failure, Format};

#[derive(Parser, Debug)]
#[command(name = "atccs", version, about = "Asynchronous CCS with atomic blocks")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Opts,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Report shape.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Environment names, comma separated (default: free names of the inputs).
    #[arg(long, global = true, value_delimiter = ',')]
    pub names: Option<Vec<String>>,
    /// Environment multiplicity.
    #[arg(long, global = true)]
    pub mult: Option<u32>,
    /// Exploration depth, or expression depth for `laws`.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long = "repl-bound", global = true)]
    pub repl_bound: Option<u32>,
    /// Pending-output cap in asynchronous bisimulation answers.
    #[arg(long = "comp-bound", global = true)]
    pub comp_bound: Option<u32>,
    #[arg(long = "trace-len", global = true)]
    pub trace_len: Option<usize>,
    #[arg(long = "max-nodes", global = true)]
    pub max_nodes: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for the engine.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Read a term from a file; terms given this way follow the ones on the command line.
    #[arg(short = 'f', long = "file", global = true)]
    pub files: Vec<String>,
    /// Initial global state, e.g. `{a,a,b}`.
    #[arg(long, global = true)]
    pub state: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Parse a term and show its syntax tree.
    Parse {
        terms: Vec<String>,
        /// Read a transaction expression instead of a process.
        #[arg(long)]
        expr: bool,
    },
    /// Print a term given as text or as a JSON syntax tree.
    Print {
        terms: Vec<String>,
        #[arg(long)]
        expr: bool,
        #[arg(long)]
        canonical: bool,
    },
    /// List the reductions of a configuration, optionally walking them.
    Step {
        terms: Vec<String>,
        #[arg(short, long)]
        interactive: bool,
        /// Menu choices to apply in order before listing.
        #[arg(long, value_delimiter = ',')]
        pick: Vec<usize>,
    },
    /// Exhaustive reachability from a configuration.
    Explore {
        terms: Vec<String>,
        /// Keep terms exactly as produced by the rules.
        #[arg(long)]
        raw: bool,
    },
    /// One seeded random run.
    Run {
        terms: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long)]
        raw: bool,
    },
    /// Labelled transition system over the environment.
    Lts { terms: Vec<String> },
    /// Bisimulation check (weak asynchronous unless `--mode` says otherwise).
    Bisim {
        terms: Vec<String>,
        #[arg(long, value_enum, default_value_t = Mode::WeakAsync)]
        mode: Mode,
        /// Re-check a witness saved from a JSON report.
        #[arg(long)]
        replay: Option<String>,
    },
    /// Weak (synchronous) bisimulation.
    Wbisim {
        terms: Vec<String>,
        #[arg(long)]
        replay: Option<String>,
    },
    /// Equivalence of two transactions over a state universe.
    Aequiv { terms: Vec<String> },
    /// `M ⊒ N`: wherever N commits, M commits.
    Apre { terms: Vec<String> },
    /// Normal form of a transaction.
    Normalize { terms: Vec<String> },
    /// The algebraic law suite.
    Laws {
        /// Check a single law.
        #[arg(long)]
        law: Option<String>,
        /// Also check the deliberately false `end` = `retry`.
        #[arg(long)]
        perturb: bool,
        #[arg(long, default_value_t = 50)]
        instances: usize,
    },
    /// Encode choices, joins or the example systems.
    Encode {
        #[arg(value_enum)]
        kind: EncodeKind,
        /// Choice term, or `PATTERN => P` with PATTERN like `a?,b!`.
        terms: Vec<String>,
        #[arg(long)]
        replicated: bool,
        /// Participants for `leader`.
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// May-testing of a process against an observer.
    May { terms: Vec<String> },
    /// Trace-based may preorder `P ⊑ Q`.
    Alt {
        terms: Vec<String>,
        /// Replay a separating trace through its observer.
        #[arg(long)]
        trace: Option<String>,
    },
    /// Trace preorder `S' ≼ S` by rewriting and by observers.
    TracePre { traces: Vec<String> },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Strong,
    Weak,
    WeakAsync,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncodeKind {
    Choice,
    Join,
    Joindef,
    Leader,
    Philosophers,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Code::Usage } else { Code::Ok };
            let _ = e.print();
            return code.into();
        }
    };
    if let Some(j) = cli.opts.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: {e}");
            return Code::Usage.into();
        }
    }
    panic::set_hook(Box::new(|_| {}));
    let format = cli.opts.format;
    let outcome = panic::catch_unwind(|| commands::dispatch(&cli)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(Failure::new(Code::Unknown, format!("internal error: {msg}")))
    });
    match outcome {
        Ok(r) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(r.render(format).as_bytes());
            r.code.into()
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code.into()
        }
    }
}
