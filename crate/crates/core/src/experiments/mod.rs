//! Stream generators, the run harness and trace serialization behind the CLI.

pub mod config;
pub mod generators;
pub mod harness;
pub mod output;

pub use config::{ExperimentConfig, GeneratorSpec, LearnerSpec, OutputFormat};
pub use harness::{run_experiment, scale_test, RegretTrace, ScaleTestReport, Summary};
