//! Trend fitting and resampling uncertainty.

pub mod bootstrap;
pub mod fit;

pub use bootstrap::{
    bootstrap_ci, percentile, BootstrapCI, BootstrapConfig, BootstrapError, Statistic,
};
pub use fit::{fit_decay, fit_decay_f64, months_between, DecayFit, FitError};
