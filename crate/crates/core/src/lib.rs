//! Minimum-measurement observability analysis for probabilistic Boolean
//! networks in the algebraic state-space representation.
//!
//! The pipeline: parse a [`PbnModel`], build the pair-state
//! [`AugmentedSystem`], split pair-states by output ([`Partition`]), find the
//! indistinguishable pairs and the minimal target sets that must be made
//! output-distinguishable ([`minimal_targets`]), then choose the fewest
//! variables to measure ([`global_min_sensors`]).

pub mod analysis;
pub mod augmented;
pub mod error;
mod feedback;
pub mod model;
pub mod partition;
pub mod reach;
pub mod report;
pub mod sensors;
pub mod simulate;
pub mod stateset;
pub mod stp;

pub use analysis::{
    analyze, is_observable, maximum_invariant_set, minimal_targets, minimal_targets_with,
    omega_sets, omega_sets_capped, AnalysisConfig, AnalysisReport, Observability,
};
pub use augmented::{build_augmented, build_augmented_with, AugmentedSystem, StochasticMatrix};
pub use error::{Error, Result};
pub use model::{parse_model, render_model, BoolExpr, PbnModel};
pub use partition::{partition_states, PairSpace, Partition};
pub use reach::{robust_reach, ReachResult};
pub use report::{s1_graph_dot, Report};
pub use sensors::{global_min_sensors, min_cover, truth_matrix, SensorPlan, TruthMatrix};
pub use simulate::{estimate_distinguishability, exhaustive_distinguishability, sample_trajectory};
pub use stateset::StateSet;
pub use stp::{BooleanMatrix, Limits, LogicalMatrix, RealMatrix};
