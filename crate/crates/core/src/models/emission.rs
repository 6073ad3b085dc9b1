use std::f64::consts::PI;

use crate::chain::PotentialChain;
use crate::scan::{ContextMap, Orientation, ScanLayout};

use super::{HmcParams, ModelError};

pub fn gaussian_density(y: f64, mean: f64, variance: f64) -> f64 {
    gaussian_log_density(y, mean, variance).exp()
}

pub fn gaussian_log_density(y: f64, mean: f64, variance: f64) -> f64 {
    let d = y - mean;
    -0.5 * ((2.0 * PI * variance).ln() + d * d / variance)
}

/// Density of an off-scan neighbor's observation given the class of the
/// site: `sum_j p(j | class) N(y; m_j, s_j^2)`, where `p(. | class)` is the
/// row-normalized pair law of the given orientation.
pub fn contextual_likelihood(
    y: f64,
    orientation: Orientation,
    class: usize,
    params: &HmcParams,
) -> Result<f64, ModelError> {
    let joint = params.joint(orientation);
    let s = joint.row_sum(class);
    if s <= 0.0 {
        return Err(ModelError::ZeroRow {
            orientation,
            row: class,
        });
    }
    Ok(joint
        .row(class)
        .iter()
        .enumerate()
        .map(|(j, p)| p / s * params.density(y, j))
        .sum())
}

/// Emission of scan position `pos` in the contextual model: the site's own
/// density times one contextual factor per off-scan neighbor.
pub fn site_emission_cps(
    pos: usize,
    observations: &[f64],
    context: &ContextMap,
    class: usize,
    params: &HmcParams,
) -> Result<f64, ModelError> {
    let mut e = params.density(observations[pos], class);
    for extra in context.extras(pos) {
        e *= contextual_likelihood(
            observations[extra.position],
            extra.orientation,
            class,
            params,
        )?;
    }
    Ok(e)
}

/// Log-space emission tables shared by every model.
///
/// Each hidden state `z` has a central class and a context row; the row holds
/// mixture weights over classes for horizontal and vertical neighbors. States
/// marked dead get zero emission.
pub(crate) struct EmissionKernel<'a> {
    pub means: &'a [f64],
    pub variances: &'a [f64],
    pub rows: usize,
    pub weights_h: Vec<f64>,
    pub weights_v: Vec<f64>,
    pub state_class: Vec<usize>,
    pub state_row: Vec<usize>,
    pub state_alive: Vec<bool>,
}

impl EmissionKernel<'_> {
    fn classes(&self) -> usize {
        self.means.len()
    }

    fn states(&self) -> usize {
        self.state_class.len()
    }

    /// Per-site emission vectors, site-major, each scaled to a unit maximum.
    pub fn emissions(&self, observations: &[f64], context: &ContextMap) -> Vec<f64> {
        let k = self.classes();
        let m = self.states();
        let n = observations.len();

        let mut log_dens = Vec::with_capacity(n * k);
        for &y in observations {
            for c in 0..k {
                log_dens.push(gaussian_log_density(y, self.means[c], self.variances[c]));
            }
        }
        let log_w = |w: &[f64]| w.iter().map(|v| v.ln()).collect::<Vec<_>>();
        let log_wh = log_w(&self.weights_h);
        let log_wv = log_w(&self.weights_v);

        let mut out = vec![0.0; n * m];
        let mut row_term = vec![0.0; self.rows];
        let mut scratch = vec![0.0; k];
        let mut site = vec![0.0; m];
        for pos in 0..n {
            row_term.fill(0.0);
            for extra in context.extras(pos) {
                let lw = match extra.orientation {
                    Orientation::Horizontal => &log_wh,
                    Orientation::Vertical => &log_wv,
                };
                let ld = &log_dens[extra.position * k..(extra.position + 1) * k];
                for (r, term) in row_term.iter_mut().enumerate() {
                    for (j, s) in scratch.iter_mut().enumerate() {
                        *s = lw[r * k + j] + ld[j];
                    }
                    *term += log_sum_exp(&scratch);
                }
            }
            let ld = &log_dens[pos * k..(pos + 1) * k];
            let mut max = f64::NEG_INFINITY;
            for z in 0..m {
                site[z] = if self.state_alive[z] {
                    ld[self.state_class[z]] + row_term[self.state_row[z]]
                } else {
                    f64::NEG_INFINITY
                };
                max = max.max(site[z]);
            }
            for (o, s) in out[pos * m..(pos + 1) * m].iter_mut().zip(&site) {
                *o = (s - max).exp();
            }
        }
        out
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Assembles the potentials of a first-order chain:
/// `phi_1(z, z') = first(z, z') e_1(z) e_2(z')` and
/// `phi_n(z, z') = trans(z, z') e_{n+1}(z')` afterwards, with the
/// matrices picked by the orientation of each scan step.
pub(crate) fn assemble_chain(
    states: usize,
    layout: &ScanLayout,
    emissions: &[f64],
    first_h: &[f64],
    first_v: &[f64],
    trans_h: &[f64],
    trans_v: &[f64],
) -> Result<PotentialChain, ModelError> {
    let m = states;
    let n = layout.len();
    let mut pot = vec![0.0; (n - 1) * m * m];
    for (step, block) in pot.chunks_exact_mut(m * m).enumerate() {
        let horizontal = layout.step_orientation(step) == Orientation::Horizontal;
        let next = &emissions[(step + 1) * m..(step + 2) * m];
        if step == 0 {
            let first = if horizontal { first_h } else { first_v };
            let cur = &emissions[..m];
            for z in 0..m {
                for w in 0..m {
                    block[z * m + w] = first[z * m + w] * cur[z] * next[w];
                }
            }
        } else {
            let trans = if horizontal { trans_h } else { trans_v };
            for z in 0..m {
                for w in 0..m {
                    block[z * m + w] = trans[z * m + w] * next[w];
                }
            }
        }
    }
    Ok(PotentialChain::new(m, n, pot)?)
}
