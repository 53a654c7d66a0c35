//! Experiment orchestration: declarative JSON configs in, deterministic
//! CSV/SVG/metadata artifacts out.

pub mod chart;
pub mod config;
pub mod error;
pub mod manifest;
pub mod runner;
pub mod table;

pub use chart::{emit_svg, Chart, Series};
pub use config::{
    DecomposeTarget, ExperimentConfig, KdvRunConfig, LorenzConfig, PcaConfig, SystemKind,
};
pub use error::PipelineError;
pub use manifest::{ArtifactEntry, ArtifactKind, RunArtifacts};
pub use runner::{run_experiment, run_kdv_experiment, run_lorenz_experiment};
pub use table::{emit_csv, Cell, Table};
