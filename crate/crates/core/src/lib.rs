//! Offline multi-modal (EMG + accelerometer) gesture-recognition benchmark
//! pipeline.
//!
//! The crate covers the full offline path: canonical dataset bundles,
//! filtering and windowing, four classic feature sets, four classifier
//! families, leave-one-trial-out evaluation of three classification tasks
//! (limb position, within-position gesture, sequential two-stage), paired
//! significance testing, and deterministic synthetic dataset generators for
//! controlled positional-variance studies.
//!
//! Start with the runnable examples (`cargo run --example full_study`) or
//! the `myobench` binary, which exposes each pipeline stage as a
//! subcommand.

pub mod bundle;
pub mod classify;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod filter;
pub mod pipeline;
pub mod preprocess;
pub mod report;
pub mod seeding;
pub mod store;
pub mod synth;
pub mod window;

pub use error::{Error, Result};
