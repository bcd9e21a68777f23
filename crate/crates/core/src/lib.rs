//! Asynchronous CCS with atomic blocks: syntax, reduction semantics,
//! transaction analysis, labelled transitions, may-testing and encodings.

pub mod atomic;
pub mod encode;
pub mod error;
pub mod gen;
pub mod laws;
pub mod log;
pub mod lts;
pub mod multiset;
pub mod name;
pub mod parse;
pub mod print;
pub mod reduce;
pub mod syntax;
pub mod testing;

pub use error::{ExploreError, ParseError, TermError};
pub use log::{apply_effect, log_effect_eq, Action, ActionKind, EffectComparison, Log};
pub use multiset::Multiset;
pub use name::{FreshSupply, Name};
pub use parse::{parse_expr, parse_process};
pub use syntax::{AtomicExpr, ChoiceBranch, OngoingExpr, Polarity, Process};
