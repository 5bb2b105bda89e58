//! Scenario files, runs, sweeps and reports on top of `nullpass-core`.
//!
//! A scenario is a JSON file (or one of the built-in benchmark runs) naming a
//! system, a target and the pulses. Running it writes a trajectory CSV, a JSON
//! summary keyed by the hash of the resolved configuration, and a separate
//! timing record so that summaries stay bit-identical between runs.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cnum;
pub mod error;
pub mod instances;
pub mod run;
pub mod scenario;
pub mod sweep;

pub use error::AppError;
pub use run::{run, write_outputs, RunOutcome, RunRecord};
pub use scenario::{load_scenario, Scenario};
