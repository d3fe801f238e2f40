//! Library half of the `permcert` command-line tool: experiment
//! configuration, instance generation, batch evaluation with JSONL logging,
//! and log analysis with alarm replay.
//!
//! The binary front end in `main.rs` handles argument parsing and exit
//! codes; everything testable lives here.

pub mod explore;
pub mod report;

pub use explore::{
    derive_seed, evaluate_instance, generate_instances, run_experiment, ExperimentConfig,
    ExperimentRecord, ExploreError, Filter, InstanceData, LogHeader, LogLine, LogSummary, Mode,
    Strategy, Verdict,
};
pub use report::{analyze_log, render_report, AlarmRecord, LogAnalysis, ReplayStatus, ReportError};
