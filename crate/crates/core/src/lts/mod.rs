//! Labelled transitions over a bounded environment and equivalence checking.

pub mod bisim;
pub mod graph;
pub mod label;
pub mod symbolic;

pub use bisim::{
    check_bisim, strong_bisim, verify_witness, weak_async_bisim, weak_bisim, BisimConfig, BisimVerdict, Equivalence,
    Side, Witness,
};
pub use graph::{build_lts, Lts, LtsConfig, StateId};
pub use label::{parse_label, parse_labels, Label};
pub use symbolic::{labeled_successors, LabeledSuccessors, LtsBounds};
