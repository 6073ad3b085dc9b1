//! End-to-end segmentation: k-means initialization, stochastic EM, and MPM
//! decoding under one of the supported models.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::chain::{chain_from_potentials, mpm_decode};
use crate::estimation::{
    kmeans_init, sem_run, EstimationError, SemConfig, EVIDENTIAL_INIT_OMEGA_MASS,
};
use crate::imaging::{ImagingError, LabelImage, ObservedImage};
use crate::models::{
    build_hemc_cps, build_hmc_cps, build_hmc_ps, marginalize_evidential, EvidentialParams,
    EvidentialStateSpace, HmcParams, JointMatrix, ModelError,
};
use crate::scan::{build_context, build_scan, ContextMap, Orientation, ScanError, ScanLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Classic hidden Markov chain on the plain scan.
    HmcPs,
    /// Contextual emissions on the plain scan.
    HmcCps,
    /// Evidential chain with contextual emissions.
    HemcCps,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::HmcPs, Method::HmcCps, Method::HemcCps];

    pub fn name(self) -> &'static str {
        match self {
            Method::HmcPs => "hmc-ps",
            Method::HmcCps => "hmc-cps",
            Method::HemcCps => "hemc-cps",
        }
    }

    pub fn uses_context(self) -> bool {
        !matches!(self, Method::HmcPs)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = SegmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| SegmentError::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("unknown method '{0}' (expected hmc-ps, hmc-cps or hemc-cps)")]
    UnknownMethod(String),
    #[error("at least one class is required")]
    NoClasses,
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}

impl From<crate::chain::ChainError> for SegmentError {
    fn from(e: crate::chain::ChainError) -> Self {
        SegmentError::Model(e.into())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedParams {
    Hmc(HmcParams),
    Evidential(EvidentialParams),
}

impl FittedParams {
    pub fn means(&self) -> &[f64] {
        match self {
            FittedParams::Hmc(p) => p.means(),
            FittedParams::Evidential(p) => p.means(),
        }
    }

    pub fn variances(&self) -> &[f64] {
        match self {
            FittedParams::Hmc(p) => p.variances(),
            FittedParams::Evidential(p) => p.variances(),
        }
    }

    pub fn joint(&self, orientation: Orientation) -> &JointMatrix {
        match self {
            FittedParams::Hmc(p) => p.joint(orientation),
            FittedParams::Evidential(p) => p.joint(orientation),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub labels: LabelImage,
    pub params: FittedParams,
    pub iterations: usize,
    pub converged: bool,
}

/// Scan order and context for one image size, reusable across runs.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub layout: ScanLayout,
    pub context: ContextMap,
}

impl Geometry {
    pub fn new(order: u32) -> Result<Self, ScanError> {
        let layout = build_scan(order)?;
        let context = build_context(&layout);
        Ok(Self { layout, context })
    }
}

/// Unsupervised segmentation of `image` into `classes` classes.
pub fn segment(
    image: &ObservedImage,
    method: Method,
    classes: usize,
    config: &SemConfig,
) -> Result<Segmentation, SegmentError> {
    let geometry = Geometry::new(image.shape().order())?;
    segment_with(image, &geometry, method, classes, config)
}

/// [`segment`] with a precomputed [`Geometry`] matching the image.
pub fn segment_with(
    image: &ObservedImage,
    geometry: &Geometry,
    method: Method,
    classes: usize,
    config: &SemConfig,
) -> Result<Segmentation, SegmentError> {
    if classes == 0 {
        return Err(SegmentError::NoClasses);
    }
    config.validate()?;
    let layout = &geometry.layout;
    let obs = layout.to_scan_order(image.values());
    let context = method.uses_context().then_some(&geometry.context);
    let init = kmeans_init(&obs, classes, layout)?;

    let (params, iterations, converged) = match method {
        Method::HmcPs | Method::HmcCps => {
            let out = sem_run(init, &obs, layout, context, config)?;
            (FittedParams::Hmc(out.params), out.iterations, out.converged)
        }
        Method::HemcCps => {
            let init = EvidentialParams::embed(&init, EVIDENTIAL_INIT_OMEGA_MASS)?;
            let out = sem_run(init, &obs, layout, context, config)?;
            (
                FittedParams::Evidential(out.params),
                out.iterations,
                out.converged,
            )
        }
    };
    let labels = decode(image, geometry, method, &params)?;
    Ok(Segmentation {
        labels,
        params,
        iterations,
        converged,
    })
}

/// MPM segmentation under fixed parameters.
///
/// `FittedParams::Hmc` must be paired with `HmcPs` or `HmcCps`, and
/// `FittedParams::Evidential` with `HemcCps`; mismatches are promoted where
/// that is lossless (class parameters used with `HemcCps` are embedded with
/// no `Omega` mass) and rejected otherwise.
pub fn decode(
    image: &ObservedImage,
    geometry: &Geometry,
    method: Method,
    params: &FittedParams,
) -> Result<LabelImage, SegmentError> {
    let layout = &geometry.layout;
    let obs = layout.to_scan_order(image.values());
    let (k, class_marginals) = match (method, params) {
        (Method::HmcPs, FittedParams::Hmc(p)) => {
            let post = chain_from_potentials(&build_hmc_ps(p, &obs, layout)?)?;
            (p.classes(), post.marginals().to_vec())
        }
        (Method::HmcCps, FittedParams::Hmc(p)) => {
            let post = chain_from_potentials(&build_hmc_cps(p, &obs, layout, &geometry.context)?)?;
            (p.classes(), post.marginals().to_vec())
        }
        (Method::HemcCps, FittedParams::Hmc(p)) => {
            let e = EvidentialParams::embed(p, 0.0)?;
            return decode(image, geometry, method, &FittedParams::Evidential(e));
        }
        (Method::HemcCps, FittedParams::Evidential(p)) => {
            let post = chain_from_potentials(&build_hemc_cps(p, &obs, layout, &geometry.context)?)?;
            let space = EvidentialStateSpace::new(p.classes())?;
            (
                p.classes(),
                marginalize_evidential(post.marginals(), &space),
            )
        }
        (_, FittedParams::Evidential(p)) => {
            return Err(ModelError::Dimension {
                what: "class alphabet",
                expected: p.classes(),
                actual: 2 * p.classes(),
            }
            .into())
        }
    };
    let states = layout.to_row_major(&mpm_decode(&class_marginals, k));
    Ok(LabelImage::from_zero_based(image.shape(), k, &states)?)
}

/// Parameters of a known truth: pair laws counted along the scan of
/// `truth`, with the given noise moments. A class never seen at the start of
/// a step gets a self-transition row.
pub fn params_from_truth(
    truth: &LabelImage,
    layout: &ScanLayout,
    means: &[f64],
    variances: &[f64],
) -> Result<HmcParams, SegmentError> {
    let k = truth.classes();
    let path = layout.to_scan_order(truth.labels());
    let mut co_h = vec![0.0; k * k];
    let mut co_v = vec![0.0; k * k];
    for (step, pair) in path.windows(2).enumerate() {
        let target = match layout.step_orientation(step) {
            Orientation::Horizontal => &mut co_h,
            Orientation::Vertical => &mut co_v,
        };
        target[(pair[0] - 1) * k + pair[1] - 1] += 1.0;
    }
    for co in [&mut co_h, &mut co_v] {
        for i in 0..k {
            if co[i * k..(i + 1) * k].iter().all(|&c| c == 0.0) {
                co[i * k + i] = 1.0;
            }
        }
    }
    Ok(HmcParams::new(
        JointMatrix::from_weights(k, co_h)?,
        JointMatrix::from_weights(k, co_v)?,
        means.to_vec(),
        variances.to_vec(),
    )?)
}
