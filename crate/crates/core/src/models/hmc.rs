use crate::chain::PotentialChain;
use crate::scan::{ContextMap, Orientation, ScanLayout};

use super::emission::{assemble_chain, EmissionKernel};
use super::{check_inputs, HmcParams, ModelError};

/// Posterior potentials of the classic chain along the scan.
pub fn build_hmc_ps(
    params: &HmcParams,
    observations: &[f64],
    layout: &ScanLayout,
) -> Result<PotentialChain, ModelError> {
    check_inputs(observations, layout.len(), None)?;
    build(
        params,
        observations,
        layout,
        &ContextMap::empty(layout.len()),
    )
}

/// Posterior potentials of the contextual chain: every emission also
/// includes the mixtures of the off-scan neighbors listed in `context`.
pub fn build_hmc_cps(
    params: &HmcParams,
    observations: &[f64],
    layout: &ScanLayout,
    context: &ContextMap,
) -> Result<PotentialChain, ModelError> {
    check_inputs(observations, layout.len(), Some(context))?;
    build(params, observations, layout, context)
}

fn build(
    params: &HmcParams,
    observations: &[f64],
    layout: &ScanLayout,
    context: &ContextMap,
) -> Result<PotentialChain, ModelError> {
    let k = params.classes();
    let cond_h = params.joint_h.conditional(Orientation::Horizontal)?;
    let cond_v = params.joint_v.conditional(Orientation::Vertical)?;
    let kernel = EmissionKernel {
        means: &params.means,
        variances: &params.variances,
        rows: k,
        weights_h: cond_h.clone(),
        weights_v: cond_v.clone(),
        state_class: (0..k).collect(),
        state_row: (0..k).collect(),
        state_alive: vec![true; k],
    };
    let emissions = kernel.emissions(observations, context);
    assemble_chain(
        k,
        layout,
        &emissions,
        params.joint_h.as_slice(),
        params.joint_v.as_slice(),
        &cond_h,
        &cond_v,
    )
}
