//! Unsupervised parameter estimation: k-means initialization followed by
//! stochastic EM.

mod kmeans;
mod sem;

use thiserror::Error;

use crate::chain::ChainError;
use crate::models::ModelError;

pub use kmeans::{
    kmeans_1d, kmeans_init, kmeans_init_evidential, KMeans, EVIDENTIAL_INIT_OMEGA_MASS,
};
pub use sem::{
    estimate_evidential_from_path, estimate_hmc_from_path, sem_run, sem_step_evidential,
    sem_step_hmc, write_trace_csv, SemConfig, SemModel, SemOutcome, SemStep,
};

/// Variance floor applied to every estimated class variance by default.
pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("need at least {classes} distinct observation values, found {distinct}")]
    InsufficientData { classes: usize, distinct: usize },
    #[error("invalid estimation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("failed to write trace: {0}")]
    Trace(#[from] csv::Error),
}
