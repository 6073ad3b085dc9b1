//! Exact inference on a finite-state Markov chain given up to a constant by
//! per-step nonnegative potentials.
//!
//! A chain of length `N` over `M` states is described by `N - 1` matrices
//! `phi_n`, and the path law is proportional to `prod_n phi_n(z_n, z_{n+1})`.
//! A backward recursion yields the initial law and the transitions of that
//! Markov chain; a forward pass then gives the site marginals. The global
//! normalizing constant is never formed: every backward vector is rescaled to
//! a unit maximum and only the logarithm of the scale is kept.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Backward vectors whose largest entry falls below this are treated as zero.
pub const DEGENERATE_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("chain needs at least one site and one state")]
    Empty,
    #[error("expected {expected} potential entries, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("potential {step} has a negative or non-finite entry")]
    InvalidPotential { step: usize },
    #[error("backward vector vanished at site {site}: potentials admit no path")]
    DegenerateChain { site: usize },
}

/// Unnormalized chain law `prod_n phi_n(z_n, z_{n+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialChain {
    alphabet: usize,
    len: usize,
    // (len - 1) row-major alphabet x alphabet blocks
    potentials: Vec<f64>,
}

impl PotentialChain {
    pub fn new(alphabet: usize, len: usize, potentials: Vec<f64>) -> Result<Self, ChainError> {
        if alphabet == 0 || len == 0 {
            return Err(ChainError::Empty);
        }
        let block = alphabet * alphabet;
        let expected = (len - 1) * block;
        if potentials.len() != expected {
            return Err(ChainError::Dimension {
                expected,
                actual: potentials.len(),
            });
        }
        if let Some(bad) = potentials
            .iter()
            .position(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(ChainError::InvalidPotential { step: bad / block });
        }
        Ok(Self {
            alphabet,
            len,
            potentials,
        })
    }

    /// Builds a chain from one row-major matrix per step.
    pub fn from_matrices(alphabet: usize, matrices: &[Vec<f64>]) -> Result<Self, ChainError> {
        let flat = matrices.iter().flatten().copied().collect();
        Self::new(alphabet, matrices.len() + 1, flat)
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Number of sites `N`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Row-major matrix linking site `step` to site `step + 1`.
    pub fn potential(&self, step: usize) -> &[f64] {
        let block = self.alphabet * self.alphabet;
        &self.potentials[step * block..(step + 1) * block]
    }

    pub fn potential_mut(&mut self, step: usize) -> &mut [f64] {
        let block = self.alphabet * self.alphabet;
        &mut self.potentials[step * block..(step + 1) * block]
    }
}

/// Rescaled backward vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Backward {
    alphabet: usize,
    beta: Vec<f64>,
    log_scale: Vec<f64>,
}

impl Backward {
    /// Backward vector at `site`, scaled to a unit maximum.
    pub fn beta(&self, site: usize) -> &[f64] {
        &self.beta[site * self.alphabet..(site + 1) * self.alphabet]
    }

    /// Natural log of the factor removed from each site's vector.
    pub fn log_scale(&self) -> &[f64] {
        &self.log_scale
    }
}

pub fn backward_pass(chain: &PotentialChain) -> Result<Backward, ChainError> {
    let m = chain.alphabet;
    let n = chain.len;
    let mut beta = vec![0.0; n * m];
    let mut log_scale = vec![0.0; n];
    beta[(n - 1) * m..].fill(1.0);

    for site in (0..n - 1).rev() {
        let phi = chain.potential(site);
        let (head, tail) = beta.split_at_mut((site + 1) * m);
        let next = &tail[..m];
        let cur = &mut head[site * m..];
        let mut max = 0.0f64;
        for (z, out) in cur.iter_mut().enumerate() {
            let row = &phi[z * m..(z + 1) * m];
            let s: f64 = row.iter().zip(next).map(|(p, b)| p * b).sum();
            *out = s;
            max = max.max(s);
        }
        if max.is_nan() || max < DEGENERATE_THRESHOLD {
            return Err(ChainError::DegenerateChain { site });
        }
        cur.iter_mut().for_each(|v| *v /= max);
        log_scale[site] = max.ln();
    }

    Ok(Backward {
        alphabet: m,
        beta,
        log_scale,
    })
}

/// The Markov chain defined by a [`PotentialChain`].
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorChain {
    alphabet: usize,
    len: usize,
    initial: Vec<f64>,
    transitions: Vec<f64>,
    marginals: Vec<f64>,
    log_scale: Vec<f64>,
    log_normalizer: f64,
}

pub fn chain_from_potentials(chain: &PotentialChain) -> Result<PosteriorChain, ChainError> {
    let backward = backward_pass(chain)?;
    let m = chain.alphabet;
    let n = chain.len;

    let beta1 = backward.beta(0);
    let total: f64 = beta1.iter().sum();
    let initial: Vec<f64> = beta1.iter().map(|b| b / total).collect();
    let log_normalizer = total.ln() + backward.log_scale.iter().sum::<f64>();

    let uniform = 1.0 / m as f64;
    let mut transitions = vec![0.0; (n - 1) * m * m];
    for site in 0..n - 1 {
        let phi = chain.potential(site);
        let next = backward.beta(site + 1);
        let block = &mut transitions[site * m * m..(site + 1) * m * m];
        for z in 0..m {
            let row = &mut block[z * m..(z + 1) * m];
            let mut s = 0.0;
            for (w, out) in row.iter_mut().enumerate() {
                *out = phi[z * m + w] * next[w];
                s += *out;
            }
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            } else {
                row.fill(uniform);
            }
        }
    }

    let mut marginals = vec![0.0; n * m];
    marginals[..m].copy_from_slice(&initial);
    for site in 0..n - 1 {
        let t = &transitions[site * m * m..(site + 1) * m * m];
        let (head, tail) = marginals.split_at_mut((site + 1) * m);
        let prev = &head[site * m..];
        let cur = &mut tail[..m];
        for (z, &pz) in prev.iter().enumerate() {
            if pz == 0.0 {
                continue;
            }
            for (w, out) in cur.iter_mut().enumerate() {
                *out += pz * t[z * m + w];
            }
        }
        let s: f64 = cur.iter().sum();
        cur.iter_mut().for_each(|v| *v /= s);
    }

    Ok(PosteriorChain {
        alphabet: m,
        len: n,
        initial,
        transitions,
        marginals,
        log_scale: backward.log_scale,
        log_normalizer,
    })
}

impl PosteriorChain {
    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// Row-stochastic matrix of `p(z_{step+1} | z_step)`.
    pub fn transition(&self, step: usize) -> &[f64] {
        let b = self.alphabet * self.alphabet;
        &self.transitions[step * b..(step + 1) * b]
    }

    pub fn marginal(&self, site: usize) -> &[f64] {
        &self.marginals[site * self.alphabet..(site + 1) * self.alphabet]
    }

    /// All site marginals, site-major.
    pub fn marginals(&self) -> &[f64] {
        &self.marginals
    }

    pub fn log_scale(&self) -> &[f64] {
        &self.log_scale
    }

    /// `ln sum_path prod_n phi_n`, recovered from the rescaling exponents.
    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }
}

// Inverse-CDF draw; never returns a zero-weight state.
fn draw<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if target < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Draws one path, consuming exactly one uniform variate per site.
pub fn sample_path<R: Rng + ?Sized>(posterior: &PosteriorChain, rng: &mut R) -> Vec<usize> {
    let m = posterior.alphabet;
    let mut path = Vec::with_capacity(posterior.len);
    let mut z = draw(&posterior.initial, rng);
    path.push(z);
    for step in 0..posterior.len - 1 {
        let t = posterior.transition(step);
        z = draw(&t[z * m..(z + 1) * m], rng);
        path.push(z);
    }
    path
}

pub fn sample_path_seeded(posterior: &PosteriorChain, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_path(posterior, &mut rng)
}

/// Per-site argmax of site-major marginals; ties go to the lowest state.
pub fn mpm_decode(marginals: &[f64], alphabet: usize) -> Vec<usize> {
    marginals
        .chunks_exact(alphabet)
        .map(|p| {
            let mut best = 0;
            for (i, &v) in p.iter().enumerate().skip(1) {
                if v > p[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}
