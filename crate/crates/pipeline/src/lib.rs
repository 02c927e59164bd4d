//! End-to-end driver: separator, shrinking, training, cut/uncut/classical
//! sampling and analysis, plus the artifacts each stage writes.

pub mod classical;
pub mod config;
pub mod run;

pub use config::{InstanceSource, Mode, OracleKind, RunConfig};
pub use run::{compare_runs, run_pipeline, RunReport, RunSummary};
