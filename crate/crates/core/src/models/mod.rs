//! Potential chains for the three segmentation models.
//!
//! * HMC-PS: hidden Markov chain along the Peano scan, one Gaussian per site.
//! * HMC-CPS: same chain, but every site also carries the observations of
//!   its off-scan neighbors through orientation-specific mixtures.
//! * HEMC-CPS: evidential chain over compound states `(class, focal set)`
//!   with the contextual emissions, focal sets restricted to the singletons
//!   and `Omega`.
//!
//! Observations are always passed in scan order.

mod bba;
mod emission;
mod evidential;
mod hmc;
mod params;

use thiserror::Error;

use crate::chain::ChainError;
use crate::scan::{ContextMap, Orientation};

pub use bba::{emc_from_bba, Bba, EvidentialChain};
pub use emission::{
    contextual_likelihood, gaussian_density, gaussian_log_density, site_emission_cps,
};
pub use evidential::{
    build_hemc_cps, marginalize_evidential, EvidentialState, EvidentialStateSpace,
};
pub use hmc::{build_hmc_cps, build_hmc_ps};
pub use params::{EvidentialParams, HmcParams, JointMatrix, NORMALIZATION_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{what}: expected {expected} entries, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("probabilities must be finite and nonnegative")]
    InvalidProbability,
    #[error("probabilities sum to {total}, not 1")]
    NotNormalized { total: f64 },
    #[error("{orientation:?} pair law has an all-zero row for state {row}")]
    ZeroRow {
        orientation: Orientation,
        row: usize,
    },
    #[error("emission variance {0} is not a positive finite number")]
    InvalidVariance(f64),
    #[error("emission means must be finite")]
    InvalidMean,
    #[error("observation at scan position {0} is not finite")]
    InvalidObservation(usize),
    #[error("chain of length {0} is too short; at least two sites are needed")]
    TooShort(usize),
    #[error("at least one class is required")]
    NoClasses,
    #[error(transparent)]
    Chain(#[from] ChainError),
}

fn check_inputs(
    observations: &[f64],
    n: usize,
    context: Option<&ContextMap>,
) -> Result<(), ModelError> {
    if observations.len() != n {
        return Err(ModelError::Dimension {
            what: "observations",
            expected: n,
            actual: observations.len(),
        });
    }
    if n < 2 {
        return Err(ModelError::TooShort(n));
    }
    if let Some(ctx) = context {
        if ctx.len() != n {
            return Err(ModelError::Dimension {
                what: "context map",
                expected: n,
                actual: ctx.len(),
            });
        }
    }
    if let Some(pos) = observations.iter().position(|y| !y.is_finite()) {
        return Err(ModelError::InvalidObservation(pos));
    }
    Ok(())
}
