//! Benchmark harness for the mixbo toolkit: grid runs with resumable
//! JSON-lines records, rank curves, Friedman and Wilcoxon significance
//! tests, reports and the model-fit probe.

pub mod error;
pub mod grid;
pub mod probe;
pub mod ranks;
pub mod records;
pub mod report;
pub mod stats;
pub mod svg;

pub use error::{BenchError, Result};
pub use grid::{run_grid, run_single, ExperimentConfig, GridOptimizer, GridOutcome};
pub use probe::{fit_quality_probe, probe_fit, ProbeConfig, ProbeRow};
pub use ranks::{rank_curves, Facet, RankTable};
pub use records::{load_records, RunRecord, RunSpec};
pub use report::{emit_report, significance, ReportOptions};
pub use stats::{best_so_far, friedman_test, holm, pearson, wilcoxon_signed_rank};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "MIXBO_OUT";
