//! Stochastic EM.
//!
//! Each iteration draws one hidden path from the exact posterior chain under
//! the current parameters and re-estimates the parameters from that
//! completion: pair laws by counting consecutive labels over the horizontal
//! and vertical scan steps separately, class moments from the sites carrying
//! each label.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{chain_from_potentials, sample_path};
use crate::models::{
    build_hemc_cps, build_hmc_cps, build_hmc_ps, EvidentialParams, EvidentialStateSpace, HmcParams,
    JointMatrix,
};
use crate::scan::{ContextMap, Orientation, ScanLayout};

use super::{EstimationError, DEFAULT_VARIANCE_FLOOR};

#[derive(Debug, Clone, PartialEq)]
pub struct SemConfig {
    pub max_iters: usize,
    /// Stop once no parameter moves by more than this between iterations.
    pub tol: f64,
    pub seed: u64,
    pub variance_floor: f64,
    /// Sample from the plain-scan posterior instead of the contextual one.
    pub approx: bool,
}

impl Default for SemConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 1e-4,
            seed: 0,
            variance_floor: DEFAULT_VARIANCE_FLOOR,
            approx: false,
        }
    }
}

impl SemConfig {
    pub fn validate(&self) -> Result<(), EstimationError> {
        if self.max_iters == 0 {
            return Err(EstimationError::InvalidConfig(
                "max_iters must be at least 1".into(),
            ));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(EstimationError::InvalidConfig(
                "tol must be nonnegative".into(),
            ));
        }
        if !(self.variance_floor > 0.0 && self.variance_floor.is_finite()) {
            return Err(EstimationError::InvalidConfig(
                "variance_floor must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Parameters after one SEM iteration and the path they were counted from.
#[derive(Debug, Clone, PartialEq)]
pub struct SemStep<P> {
    pub params: P,
    pub path: Vec<usize>,
}

/// A parameter set that stochastic EM can iterate on.
pub trait SemModel: Clone + Sized {
    /// One iteration; `context: None` samples from the plain-scan posterior.
    fn sem_step<R: Rng + ?Sized>(
        &self,
        observations: &[f64],
        layout: &ScanLayout,
        context: Option<&ContextMap>,
        variance_floor: f64,
        rng: &mut R,
    ) -> Result<SemStep<Self>, EstimationError>;

    fn max_abs_diff(&self, other: &Self) -> f64;

    /// Flattened `(name, value)` view used by the trace export.
    fn named_values(&self) -> Vec<(String, f64)>;
}

pub fn sem_step_hmc<R: Rng + ?Sized>(
    params: &HmcParams,
    observations: &[f64],
    layout: &ScanLayout,
    context: Option<&ContextMap>,
    variance_floor: f64,
    rng: &mut R,
) -> Result<SemStep<HmcParams>, EstimationError> {
    let chain = match context {
        Some(ctx) => build_hmc_cps(params, observations, layout, ctx)?,
        None => build_hmc_ps(params, observations, layout)?,
    };
    let posterior = chain_from_potentials(&chain)?;
    let path = sample_path(&posterior, rng);
    let params = estimate_hmc_from_path(params, &path, observations, layout, variance_floor)?;
    Ok(SemStep { params, path })
}

pub fn sem_step_evidential<R: Rng + ?Sized>(
    params: &EvidentialParams,
    observations: &[f64],
    layout: &ScanLayout,
    context: Option<&ContextMap>,
    variance_floor: f64,
    rng: &mut R,
) -> Result<SemStep<EvidentialParams>, EstimationError> {
    let empty;
    let ctx = match context {
        Some(ctx) => ctx,
        None => {
            empty = ContextMap::empty(layout.len());
            &empty
        }
    };
    let chain = build_hemc_cps(params, observations, layout, ctx)?;
    let posterior = chain_from_potentials(&chain)?;
    let path = sample_path(&posterior, rng);
    let params =
        estimate_evidential_from_path(params, &path, observations, layout, variance_floor)?;
    Ok(SemStep { params, path })
}

/// Class-level re-estimation from a sampled label path (scan order).
pub fn estimate_hmc_from_path(
    previous: &HmcParams,
    path: &[usize],
    observations: &[f64],
    layout: &ScanLayout,
    variance_floor: f64,
) -> Result<HmcParams, EstimationError> {
    let k = previous.classes();
    let (joint_h, joint_v) = pair_laws(path, k, layout, previous.joint_h(), previous.joint_v())?;
    let (means, variances) = class_moments(
        path.iter().copied(),
        observations,
        previous.means(),
        previous.variances(),
        variance_floor,
    );
    Ok(HmcParams::new(joint_h, joint_v, means, variances)?)
}

/// Evidential re-estimation from a sampled compound path: focal-set pair
/// laws from the `u` components, class moments from the `x` components.
pub fn estimate_evidential_from_path(
    previous: &EvidentialParams,
    path: &[usize],
    observations: &[f64],
    layout: &ScanLayout,
    variance_floor: f64,
) -> Result<EvidentialParams, EstimationError> {
    let space = EvidentialStateSpace::new(previous.classes())?;
    let focal: Vec<usize> = path.iter().map(|&z| space.state(z).focal).collect();
    let (joint_h, joint_v) = pair_laws(
        &focal,
        space.focal_sets(),
        layout,
        previous.joint_h(),
        previous.joint_v(),
    )?;
    let (means, variances) = class_moments(
        path.iter().map(|&z| space.state(z).class),
        observations,
        previous.means(),
        previous.variances(),
        variance_floor,
    );
    Ok(EvidentialParams::new(
        previous.classes(),
        joint_h,
        joint_v,
        means,
        variances,
    )?)
}

fn pair_laws(
    states: &[usize],
    size: usize,
    layout: &ScanLayout,
    prev_h: &JointMatrix,
    prev_v: &JointMatrix,
) -> Result<(JointMatrix, JointMatrix), EstimationError> {
    let mut counts_h = vec![0.0; size * size];
    let mut counts_v = vec![0.0; size * size];
    let (mut n_h, mut n_v) = (0usize, 0usize);
    for (step, pair) in states.windows(2).enumerate() {
        let (counts, n) = match layout.step_orientation(step) {
            Orientation::Horizontal => (&mut counts_h, &mut n_h),
            Orientation::Vertical => (&mut counts_v, &mut n_v),
        };
        counts[pair[0] * size + pair[1]] += 1.0;
        *n += 1;
    }
    Ok((
        counts_to_joint(counts_h, n_h, prev_h)?,
        counts_to_joint(counts_v, n_v, prev_v)?,
    ))
}

// Empty rows keep the previous iterate's row; the matrix is then renormalized.
fn counts_to_joint(
    mut counts: Vec<f64>,
    n_pairs: usize,
    previous: &JointMatrix,
) -> Result<JointMatrix, EstimationError> {
    if n_pairs == 0 {
        return Ok(previous.clone());
    }
    let size = previous.size();
    for i in 0..size {
        let row = &mut counts[i * size..(i + 1) * size];
        if row.iter().all(|&c| c == 0.0) {
            for (j, c) in row.iter_mut().enumerate() {
                *c = previous.get(i, j) * n_pairs as f64;
            }
        }
    }
    Ok(JointMatrix::from_weights(size, counts)?)
}

fn class_moments(
    labels: impl Iterator<Item = usize>,
    observations: &[f64],
    prev_means: &[f64],
    prev_vars: &[f64],
    variance_floor: f64,
) -> (Vec<f64>, Vec<f64>) {
    let k = prev_means.len();
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    let labels: Vec<usize> = labels.collect();
    for (&l, &y) in labels.iter().zip(observations) {
        sums[l] += y;
        counts[l] += 1;
    }
    let means: Vec<f64> = (0..k)
        .map(|i| {
            if counts[i] > 0 {
                sums[i] / counts[i] as f64
            } else {
                prev_means[i]
            }
        })
        .collect();
    let mut sq = vec![0.0; k];
    for (&l, &y) in labels.iter().zip(observations) {
        sq[l] += (y - means[l]).powi(2);
    }
    let variances = (0..k)
        .map(|i| {
            if counts[i] > 0 {
                (sq[i] / counts[i] as f64).max(variance_floor)
            } else {
                prev_vars[i]
            }
        })
        .collect();
    (means, variances)
}

impl SemModel for HmcParams {
    fn sem_step<R: Rng + ?Sized>(
        &self,
        observations: &[f64],
        layout: &ScanLayout,
        context: Option<&ContextMap>,
        variance_floor: f64,
        rng: &mut R,
    ) -> Result<SemStep<Self>, EstimationError> {
        sem_step_hmc(self, observations, layout, context, variance_floor, rng)
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        self.joint_h()
            .max_abs_diff(other.joint_h())
            .max(self.joint_v().max_abs_diff(other.joint_v()))
            .max(max_abs(self.means(), other.means()))
            .max(max_abs(self.variances(), other.variances()))
    }

    fn named_values(&self) -> Vec<(String, f64)> {
        let names: Vec<String> = (1..=self.classes()).map(|i| i.to_string()).collect();
        named(
            self.joint_h(),
            self.joint_v(),
            &names,
            self.means(),
            self.variances(),
        )
    }
}

impl SemModel for EvidentialParams {
    fn sem_step<R: Rng + ?Sized>(
        &self,
        observations: &[f64],
        layout: &ScanLayout,
        context: Option<&ContextMap>,
        variance_floor: f64,
        rng: &mut R,
    ) -> Result<SemStep<Self>, EstimationError> {
        sem_step_evidential(self, observations, layout, context, variance_floor, rng)
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        self.joint_h()
            .max_abs_diff(other.joint_h())
            .max(self.joint_v().max_abs_diff(other.joint_v()))
            .max(max_abs(self.means(), other.means()))
            .max(max_abs(self.variances(), other.variances()))
    }

    fn named_values(&self) -> Vec<(String, f64)> {
        let mut names: Vec<String> = (1..=self.classes()).map(|i| i.to_string()).collect();
        names.push("omega".into());
        named(
            self.joint_h(),
            self.joint_v(),
            &names,
            self.means(),
            self.variances(),
        )
    }
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn named(
    joint_h: &JointMatrix,
    joint_v: &JointMatrix,
    states: &[String],
    means: &[f64],
    variances: &[f64],
) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for (label, joint) in [("joint_h", joint_h), ("joint_v", joint_v)] {
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                out.push((format!("{label}[{a},{b}]"), joint.get(i, j)));
            }
        }
    }
    for (i, m) in means.iter().enumerate() {
        out.push((format!("mean[{}]", i + 1), *m));
    }
    for (i, v) in variances.iter().enumerate() {
        out.push((format!("variance[{}]", i + 1), *v));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemOutcome<P> {
    pub params: P,
    pub iterations: usize,
    pub converged: bool,
    /// Iterates `theta^1, theta^2, ...`; the initial parameters are not included.
    pub trace: Vec<P>,
}

/// Runs stochastic EM from `init` until `config.max_iters` iterations or
/// until the largest parameter change drops below `config.tol`.
///
/// `context: None` (or `config.approx`) samples from the plain-scan
/// posterior at every iteration.
pub fn sem_run<P: SemModel>(
    init: P,
    observations: &[f64],
    layout: &ScanLayout,
    context: Option<&ContextMap>,
    config: &SemConfig,
) -> Result<SemOutcome<P>, EstimationError> {
    config.validate()?;
    let sampling_context = if config.approx { None } else { context };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut current = init;
    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..config.max_iters {
        let step = current.sem_step(
            observations,
            layout,
            sampling_context,
            config.variance_floor,
            &mut rng,
        )?;
        let change = step.params.max_abs_diff(&current);
        current = step.params;
        trace.push(current.clone());
        if change < config.tol {
            converged = true;
            break;
        }
    }
    Ok(SemOutcome {
        iterations: trace.len(),
        params: current,
        converged,
        trace,
    })
}

/// Writes a trace as CSV rows `iteration,parameter,value` (iterations from 1).
pub fn write_trace_csv<P: SemModel, W: Write>(trace: &[P], out: W) -> Result<(), EstimationError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "parameter", "value"])?;
    for (it, params) in trace.iter().enumerate() {
        for (name, value) in params.named_values() {
            w.write_record([(it + 1).to_string(), name, value.to_string()])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
