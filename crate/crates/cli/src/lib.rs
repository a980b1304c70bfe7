//! Configuration, sweep orchestration and tabular output for the `xyecho`
//! command line tool.

pub mod config;
pub mod output;
pub mod sweep;

pub use config::{
    parse_config, validate_config, ConfigError, Experiment, Format, Grid, Quantity, SweepConfig,
};
pub use output::{format_number, write_rows, CSV_HEADER};
pub use sweep::{
    oracle_deviation, oracle_instances, run_experiment, run_with_threads, OracleInstance,
    ResultRow, RunError,
};
