//! Configuration, orchestration, manifests and plot data for the lab
//! experiments. The `lab` binary is a thin wrapper around [`run`] and
//! [`emit_plot_data`].

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod plot;
pub mod run;

pub use config::{Experiment, ExperimentConfig};
pub use error::{LabError, Result};
pub use manifest::{ManifestEntry, Metrics, RunInfo, RunManifest};
pub use plot::{emit_plot_data, PlotData, PlotSeries};
pub use run::{run, CONFIG_FILE, MANIFEST_FILE, RUN_INFO_FILE};
