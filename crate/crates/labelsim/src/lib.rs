//! labelsim — simulation toolkit for the economics of data labeling in
//! ML-based cyberthreat detection.
//!
//! The library answers three questions about a labeled corpus and a
//! random-forest detector trained on it:
//!
//! 1. How does detection quality grow with the number of labeled samples?
//!    ([`experiments::run_size_sweep`])
//! 2. How much does annotator error (label flipping) hurt, and which class
//!    of error hurts most? ([`experiments::run_poison_grid`])
//! 3. Under a fixed labeling budget, what does iterative active learning
//!    buy over labeling everything in one batch, and where does the gain
//!    plateau? ([`experiments::run_al_schedules`])
//!
//! Everything is deterministic: every random draw derives from a master
//! seed through [`data::Seed`], so repeated runs produce byte-identical
//! results.
//!
//! Start with the runnable examples (`cargo run --example size_sweep`) or
//! the thin CLI (`cargo run --bin labelsim -- sweep --config <file>`).

pub mod active;
pub mod cli;
pub mod data;
pub mod error;
pub mod experiments;
pub mod forest;
pub mod metrics;

pub use error::{Error, Result};
