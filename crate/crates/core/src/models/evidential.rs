use crate::chain::PotentialChain;
use crate::scan::{ContextMap, Orientation, ScanLayout};

use super::emission::{assemble_chain, EmissionKernel};
use super::{check_inputs, EvidentialParams, ModelError};

/// A compound hidden state: a class together with a focal set containing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvidentialState {
    pub class: usize,
    /// Focal set index; `0..K` are the singletons, `K` is `Omega`.
    pub focal: usize,
}

/// Compound alphabet `(x, u)` with `x` in `u` and `u` either a singleton or
/// `Omega`, listed as `(i, {i})` for every class, then `(i, Omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvidentialStateSpace {
    classes: usize,
}

impl EvidentialStateSpace {
    pub fn new(classes: usize) -> Result<Self, ModelError> {
        if classes == 0 {
            return Err(ModelError::NoClasses);
        }
        Ok(Self { classes })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Number of compound states, `2K`.
    pub fn len(&self) -> usize {
        2 * self.classes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of focal sets, `K + 1`.
    pub fn focal_sets(&self) -> usize {
        self.classes + 1
    }

    pub fn omega(&self) -> usize {
        self.classes
    }

    pub fn state(&self, z: usize) -> EvidentialState {
        if z < self.classes {
            EvidentialState { class: z, focal: z }
        } else {
            EvidentialState {
                class: z - self.classes,
                focal: self.classes,
            }
        }
    }

    pub fn index(&self, state: EvidentialState) -> Option<usize> {
        if state.focal == self.classes && state.class < self.classes {
            Some(self.classes + state.class)
        } else if state.focal < self.classes && state.class == state.focal {
            Some(state.class)
        } else {
            None
        }
    }

    pub fn states(&self) -> impl Iterator<Item = EvidentialState> + '_ {
        (0..self.len()).map(|z| self.state(z))
    }

    /// Cardinality of a focal set.
    pub fn cardinality(&self, focal: usize) -> usize {
        if focal == self.classes {
            self.classes
        } else {
            1
        }
    }

    /// `p(x | u) = 1 / |u|` for the compound state `z`.
    pub fn weight(&self, z: usize) -> f64 {
        1.0 / self.cardinality(self.state(z).focal) as f64
    }
}

/// Posterior potentials of the evidential chain with contextual emissions.
///
/// Focal sets that carry no mass in either pair law are dropped from the
/// alphabet (their compound states get zero potential).
pub fn build_hemc_cps(
    params: &EvidentialParams,
    observations: &[f64],
    layout: &ScanLayout,
    context: &ContextMap,
) -> Result<PotentialChain, ModelError> {
    check_inputs(observations, layout.len(), Some(context))?;
    let space = EvidentialStateSpace::new(params.classes)?;
    let k = params.classes;
    let l = space.focal_sets();
    let m = space.len();
    let nulls = params.null_focal_sets();

    let cond_h = params
        .joint_h
        .conditional_with(Orientation::Horizontal, |u| nulls[u])?;
    let cond_v = params
        .joint_v
        .conditional_with(Orientation::Vertical, |u| nulls[u])?;

    // class weights of a neighbor given the site's focal set:
    // w_u(x) = p({x} | u) + p(Omega | u) / K
    let class_weights = |cond: &[f64]| {
        let mut w = vec![0.0; l * k];
        for u in 0..l {
            let omega = cond[u * l + k] / k as f64;
            for x in 0..k {
                w[u * k + x] = cond[u * l + x] + omega;
            }
        }
        w
    };

    let states: Vec<EvidentialState> = space.states().collect();
    let kernel = EmissionKernel {
        means: &params.means,
        variances: &params.variances,
        rows: l,
        weights_h: class_weights(&cond_h),
        weights_v: class_weights(&cond_v),
        state_class: states.iter().map(|s| s.class).collect(),
        state_row: states.iter().map(|s| s.focal).collect(),
        state_alive: states.iter().map(|s| !nulls[s.focal]).collect(),
    };
    let emissions = kernel.emissions(observations, context);

    let compound = |focal_matrix: &[f64], weight_source: bool| {
        let mut out = vec![0.0; m * m];
        for (z, a) in states.iter().enumerate() {
            for (w, b) in states.iter().enumerate() {
                let mut v = focal_matrix[a.focal * l + b.focal] * space.weight(w);
                if weight_source {
                    v *= space.weight(z);
                }
                out[z * m + w] = v;
            }
        }
        out
    };
    let first_h = compound(params.joint_h.as_slice(), true);
    let first_v = compound(params.joint_v.as_slice(), true);
    let trans_h = compound(&cond_h, false);
    let trans_v = compound(&cond_v, false);

    assemble_chain(
        m, layout, &emissions, &first_h, &first_v, &trans_h, &trans_v,
    )
}

/// Sums site-major compound marginals over focal sets, giving class
/// marginals `p(x_n | y)`.
pub fn marginalize_evidential(
    compound_marginals: &[f64],
    space: &EvidentialStateSpace,
) -> Vec<f64> {
    let k = space.classes();
    let m = space.len();
    let mut out = Vec::with_capacity(compound_marginals.len() / 2);
    for site in compound_marginals.chunks_exact(m) {
        let mut row: Vec<f64> = (0..k).map(|x| site[x] + site[k + x]).collect();
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
        out.extend(row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_space_enumeration() {
        let s = EvidentialStateSpace::new(2).unwrap();
        let pairs: Vec<_> = s.states().map(|st| (st.class, st.focal)).collect();
        assert_eq!(pairs, vec![(0, 0), (1, 1), (0, 2), (1, 2)]);
        let w: Vec<_> = (0..4).map(|z| s.weight(z)).collect();
        assert_eq!(w, vec![1.0, 1.0, 0.5, 0.5]);

        let s1 = EvidentialStateSpace::new(1).unwrap();
        assert_eq!(s1.len(), 2);
        assert_eq!(
            (0..2).map(|z| s1.weight(z)).collect::<Vec<_>>(),
            vec![1.0, 1.0]
        );

        let s3 = EvidentialStateSpace::new(3).unwrap();
        assert_eq!(s3.len(), 6);
        assert!((s3.weight(4) - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(EvidentialStateSpace::new(0), Err(ModelError::NoClasses));
    }

    #[test]
    fn states_are_consistent() {
        let s = EvidentialStateSpace::new(3).unwrap();
        for z in 0..s.len() {
            let st = s.state(z);
            assert_eq!(s.index(st), Some(z));
        }
        assert_eq!(s.index(EvidentialState { class: 1, focal: 0 }), None);
        // sum_x p(x | u) = 1
        for u in 0..s.focal_sets() {
            let total: f64 = (0..s.len())
                .filter(|&z| s.state(z).focal == u)
                .map(|z| s.weight(z))
                .sum();
            assert!((total - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn marginalization() {
        let s = EvidentialStateSpace::new(2).unwrap();
        let m = marginalize_evidential(&[0.4, 0.2, 0.3, 0.1, 0.25, 0.25, 0.25, 0.25], &s);
        assert!((m[0] - 0.7).abs() < 1e-15 && (m[1] - 0.3).abs() < 1e-15);
        assert_eq!(&m[2..], &[0.5, 0.5]);
    }
}
