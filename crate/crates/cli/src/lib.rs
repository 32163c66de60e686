//! Experiment harness: config parsing, experiment runners and record output.

// `!(x > bound)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{
    parse_config, ConfigError, ConfigErrors, Experiment, ExperimentConfig, Family, FunctionSpec,
    OutputFormat, Truncation,
};
pub use experiments::{run, ResultRecord, RunError};
pub use output::{write_csv, write_json, write_records, OutputError};
