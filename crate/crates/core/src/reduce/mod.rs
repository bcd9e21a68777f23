//! Reduction semantics of configurations and its exploration.

pub mod canon;
pub mod explore;
pub mod sched;
pub mod step;

pub use canon::canonical;
pub use explore::{explore, search, successors, Bounds, Configuration, GraphEdge, ReachGraph, SearchResult};
pub use sched::{run_scheduler, Run, StopReason};
pub use step::{
    replay, replay_ongoing, step_config, step_ongoing, Derivation, OngoingDerivation, OngoingRule, Rule, Step,
};
