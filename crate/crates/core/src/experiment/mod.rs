//! Reproducible experiment runs driven by [`ExperimentConfig`].
//!
//! Each `run_*` function computes in memory; [`execute`] runs the command
//! named by the config and writes its artifacts together with the resolved
//! configuration into `output_dir`.

mod config;
mod run;

pub use config::{schema, schema_doc, Command, ExperimentConfig, KeySpec, Source};
pub use run::{
    execute, run_denoise, run_exponent, run_phantom, run_tomo, DenoiseRun, ExponentRun, RegularizerKind, TomoRun,
};
