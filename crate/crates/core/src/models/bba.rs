//! Evidential Markov chain built from a Markovian basic belief assignment.
//!
//! The mass function lives on the focal sets `{1}, ..., {K}, Omega`. The
//! chain over `(x_n, u_n)` is the normalization of
//! `1[x_1 in u_1] m(u_1) prod_n 1[x_{n+1} in u_{n+1}] m(u_{n+1} | u_n)`.
//! Summing out the classes turns every indicator into the factor `|u|`, so
//! the backward recursion runs on the focal sets alone.

use crate::chain::{ChainError, DEGENERATE_THRESHOLD};

use super::{EvidentialStateSpace, ModelError, NORMALIZATION_TOLERANCE};

/// Markovian mass function over `{1}, ..., {K}, Omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bba {
    classes: usize,
    init: Vec<f64>,
    trans: Vec<f64>,
}

impl Bba {
    pub fn new(classes: usize, init: Vec<f64>, trans: Vec<f64>) -> Result<Self, ModelError> {
        if classes == 0 {
            return Err(ModelError::NoClasses);
        }
        let l = classes + 1;
        if init.len() != l {
            return Err(ModelError::Dimension {
                what: "initial mass",
                expected: l,
                actual: init.len(),
            });
        }
        if trans.len() != l * l {
            return Err(ModelError::Dimension {
                what: "transition mass",
                expected: l * l,
                actual: trans.len(),
            });
        }
        if init
            .iter()
            .chain(&trans)
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(ModelError::InvalidProbability);
        }
        for row in std::iter::once(&init[..]).chain(trans.chunks_exact(l)) {
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(ModelError::NotNormalized { total });
            }
        }
        Ok(Self {
            classes,
            init,
            trans,
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn init(&self) -> &[f64] {
        &self.init
    }

    pub fn trans(&self) -> &[f64] {
        &self.trans
    }
}

/// Law of the evidential Markov chain of length `len`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidentialChain {
    space: EvidentialStateSpace,
    focal_initial: Vec<f64>,
    initial: Vec<f64>,
    focal_transitions: Vec<f64>,
}

impl EvidentialChain {
    pub fn space(&self) -> &EvidentialStateSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        let l = self.space.focal_sets();
        self.focal_transitions.len() / (l * l) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `p(u_1)` over focal sets.
    pub fn focal_initial(&self) -> &[f64] {
        &self.focal_initial
    }

    /// `p(x_1, u_1)` over compound states.
    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// Row-stochastic `p(u_{step+1} | u_step)`.
    pub fn focal_transition(&self, step: usize) -> &[f64] {
        let b = self.space.focal_sets().pow(2);
        &self.focal_transitions[step * b..(step + 1) * b]
    }

    /// `p(x_{n+1}, u_{n+1} | x_n, u_n) = p(u_{n+1} | u_n) p(x_{n+1} | u_{n+1})`.
    pub fn compound_transition(&self, step: usize, from: usize, to: usize) -> f64 {
        let l = self.space.focal_sets();
        let a = self.space.state(from).focal;
        let b = self.space.state(to).focal;
        self.focal_transition(step)[a * l + b] * self.space.weight(to)
    }
}

pub fn emc_from_bba(bba: &Bba, len: usize) -> Result<EvidentialChain, ModelError> {
    if len < 2 {
        return Err(ModelError::TooShort(len));
    }
    let space = EvidentialStateSpace::new(bba.classes)?;
    let l = space.focal_sets();
    let card: Vec<f64> = (0..l).map(|u| space.cardinality(u) as f64).collect();

    // beta*[n] for sites 2..=N (index n - 2), rescaled to a unit maximum
    let mut beta = vec![vec![1.0; l]; len - 1];
    for site in (0..len - 2).rev() {
        let next = beta[site + 1].clone();
        let cur = &mut beta[site];
        let mut max = 0.0f64;
        for (u, out) in cur.iter_mut().enumerate() {
            *out = (0..l)
                .map(|w| card[w] * bba.trans[u * l + w] * next[w])
                .sum();
            max = max.max(*out);
        }
        if max.is_nan() || max < DEGENERATE_THRESHOLD {
            return Err(ChainError::DegenerateChain { site: site + 1 }.into());
        }
        cur.iter_mut().for_each(|v| *v /= max);
    }

    let uniform = 1.0 / l as f64;
    let mut focal_transitions = Vec::with_capacity((len - 1) * l * l);
    for next in &beta {
        for u in 0..l {
            let row: Vec<f64> = (0..l)
                .map(|w| card[w] * bba.trans[u * l + w] * next[w])
                .collect();
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                focal_transitions.extend(row.iter().map(|v| v / s));
            } else {
                focal_transitions.extend(std::iter::repeat_n(uniform, l));
            }
        }
    }

    // p(u_1) is proportional to |u_1| m(u_1) sum_{u_2} |u_2| m(u_2 | u_1) beta*_2(u_2)
    let mut focal_initial: Vec<f64> = (0..l)
        .map(|u| {
            let tail: f64 = (0..l)
                .map(|w| card[w] * bba.trans[u * l + w] * beta[0][w])
                .sum();
            card[u] * bba.init[u] * tail
        })
        .collect();
    let s: f64 = focal_initial.iter().sum();
    if s.is_nan() || s <= 0.0 {
        return Err(ChainError::DegenerateChain { site: 0 }.into());
    }
    focal_initial.iter_mut().for_each(|v| *v /= s);

    let initial = (0..space.len())
        .map(|z| focal_initial[space.state(z).focal] * space.weight(z))
        .collect();

    Ok(EvidentialChain {
        space,
        focal_initial,
        initial,
        focal_transitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_bba_weights_omega_by_cardinality() {
        let third = 1.0 / 3.0;
        let bba = Bba::new(2, vec![third; 3], vec![third; 9]).unwrap();
        let chain = emc_from_bba(&bba, 5).unwrap();
        for step in 0..4 {
            let t = chain.focal_transition(step);
            for u in 0..3 {
                assert!((t[u * 3] - 0.25).abs() < 1e-15);
                assert!((t[u * 3 + 1] - 0.25).abs() < 1e-15);
                assert!((t[u * 3 + 2] - 0.5).abs() < 1e-15);
            }
        }
        assert!((chain.focal_initial()[2] - 0.5).abs() < 1e-15);
        assert!((chain.initial()[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn no_omega_mass_reduces_to_class_chain() {
        let trans = vec![0.7, 0.3, 0.0, 0.2, 0.8, 0.0, 0.5, 0.5, 0.0];
        let bba = Bba::new(2, vec![0.6, 0.4, 0.0], trans.clone()).unwrap();
        let chain = emc_from_bba(&bba, 4).unwrap();
        for step in 0..3 {
            let t = chain.focal_transition(step);
            for (a, b) in t[..6].iter().zip(&trans[..6]) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        assert!((chain.initial()[0] - 0.6).abs() < 1e-15);
        assert_eq!(chain.initial()[2], 0.0);
        assert_eq!(chain.compound_transition(0, 0, 2), 0.0);
        assert!((chain.compound_transition(0, 1, 0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(matches!(
            Bba::new(2, vec![0.5, 0.5, 0.1], vec![1.0 / 3.0; 9]),
            Err(ModelError::NotNormalized { .. })
        ));
        assert!(matches!(
            Bba::new(2, vec![0.5, 0.5], vec![1.0 / 3.0; 9]),
            Err(ModelError::Dimension { .. })
        ));
        let bba = Bba::new(1, vec![0.5, 0.5], vec![0.5; 4]).unwrap();
        assert_eq!(emc_from_bba(&bba, 1), Err(ModelError::TooShort(1)));
    }
}
