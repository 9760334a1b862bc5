//! Experiment orchestration and statistical comparison.

pub mod experiment;
pub mod stats;

pub use experiment::{run_bulk_convergence, run_edge_convergence, ExperimentConfig, ExperimentReport, ReferenceKind};
pub use stats::{compare_pmf, ComparisonReport};
