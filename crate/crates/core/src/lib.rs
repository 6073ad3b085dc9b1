//! Unsupervised image segmentation with hidden Markov chains along a Peano
//! (Hilbert) scan.
//!
//! The pipeline linearizes a `2^k x 2^k` image with [`scan::build_scan`],
//! optionally attaches the off-scan neighbors of every pixel
//! ([`scan::build_context`]), turns a model into per-step potentials
//! ([`models`]), and runs exact inference on the resulting chain
//! ([`chain`]). Parameters are estimated by stochastic EM ([`estimation`]).
//! [`segment`] wires these together.

pub mod chain;
pub mod estimation;
pub mod imaging;
pub mod models;
pub mod scan;
pub mod segment;

pub use chain::{
    backward_pass, chain_from_potentials, mpm_decode, sample_path, sample_path_seeded, ChainError,
    PosteriorChain, PotentialChain,
};
pub use estimation::{kmeans_init, kmeans_init_evidential, sem_run, SemConfig, SemOutcome};
pub use imaging::{error_rate, GrayImage, ImagingError, LabelImage, ObservedImage};
pub use models::{EvidentialParams, HmcParams, JointMatrix, ModelError};
pub use scan::{build_context, build_scan, ContextMap, GridShape, Orientation, Pixel, ScanLayout};
pub use segment::{
    decode, segment, segment_with, FittedParams, Geometry, Method, SegmentError, Segmentation,
};
