//! Experiment front end for `qlb-core`: argument handling, trial
//! orchestration and CSV / JSON output. This is the only layer that runs
//! work in parallel; per-trial seeds are derived from the master seed and
//! results are emitted in trial order, so output does not depend on the
//! thread count.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, RunOutput};
pub use config::{Cli, Command};
pub use output::{write_rows, Format, ResultRow, Value};
