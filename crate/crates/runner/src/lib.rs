//! Ensemble driver for the `ffcirc` simulator: configuration, parallel
//! realizations, CSV output and fits.

pub mod analysis;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod fits;
pub mod observe;
pub mod run;
pub mod table;

pub use analysis::Analysis;
pub use config::{Experiment, ExperimentConfig, Overrides, Plan};
pub use ensemble::{run_ensemble, EnsembleOutcome};
pub use error::{Result, RunError};
pub use fits::{early_time_collapse, fit_entropy_scaling, fit_power_law, scan_collapse_parameter};
pub use run::{refit, run, Manifest, RunOutput};
