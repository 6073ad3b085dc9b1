//! Brute-force reference computations shared by the integration tests and
//! the acceptance harness. Everything here enumerates paths explicitly and
//! only reads the library's inputs, never its intermediate results.

#![allow(dead_code)]

use peanoseg::chain::PotentialChain;
use rand::Rng;

/// Rank grid of the order-2 scan, transcribed by hand.
pub const RANKS_4X4: [[usize; 4]; 4] = [
    [1, 2, 15, 16],
    [4, 3, 14, 13],
    [5, 8, 9, 12],
    [6, 7, 10, 11],
];

/// First eight ranks of the order-2 scan (the left 4x2 strip).
pub const RANKS_STRIP: [[usize; 2]; 4] = [[1, 2], [4, 3], [5, 8], [6, 7]];

/// Off-scan 4-neighbors of every rank of the order-2 scan, as
/// `(rank, horizontal?)`, transcribed by hand from the rank grid.
pub fn golden_extras() -> Vec<Vec<(usize, bool)>> {
    const H: bool = true;
    const V: bool = false;
    vec![
        vec![(4, V)],
        vec![(15, H)],
        vec![(14, H), (8, V)],
        vec![(1, V)],
        vec![(8, H)],
        vec![],
        vec![(10, H)],
        vec![(3, V), (5, H)],
        vec![(14, V), (12, H)],
        vec![(7, H)],
        vec![],
        vec![(9, H)],
        vec![(16, V)],
        vec![(3, H), (9, V)],
        vec![(2, H)],
        vec![(13, V)],
    ]
}

/// Walks a rank grid: pixel of every rank, the orientation of every step
/// (`true` = horizontal) and the off-scan neighbors of every rank, all
/// 0-based.
pub struct GridPath {
    pub steps_horizontal: Vec<bool>,
    pub extras: Vec<Vec<(usize, bool)>>,
}

pub fn grid_path<const W: usize>(ranks: &[[usize; W]]) -> GridPath {
    let n = ranks.len() * W;
    let mut at = vec![(0usize, 0usize); n];
    for (r, row) in ranks.iter().enumerate() {
        for (c, &k) in row.iter().enumerate() {
            at[k - 1] = (r, c);
        }
    }
    let steps_horizontal = at.windows(2).map(|w| w[0].0 == w[1].0).collect();
    let mut extras = vec![Vec::new(); n];
    for (i, &(r, c)) in at.iter().enumerate() {
        for (j, &(r2, c2)) in at.iter().enumerate() {
            let adjacent = r.abs_diff(r2) + c.abs_diff(c2) == 1;
            if adjacent && i.abs_diff(j) != 1 {
                extras[i].push((j, r == r2));
            }
        }
    }
    GridPath {
        steps_horizontal,
        extras,
    }
}

/// Calls `f` on every path of length `n` over `m` states, in
/// lexicographic order.
pub fn for_each_path(m: usize, n: usize, mut f: impl FnMut(&[usize])) {
    let mut path = vec![0usize; n];
    loop {
        f(&path);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            path[i] += 1;
            if path[i] < m {
                break;
            }
            path[i] = 0;
        }
    }
}

/// Exact posterior quantities of a path law given by nonnegative weights.
#[derive(Debug, Clone)]
pub struct Enumerated {
    pub m: usize,
    pub n: usize,
    pub total: f64,
    pub marginals: Vec<f64>,
    pub pairs: Vec<f64>,
}

impl Enumerated {
    /// Enumerates every path, weighting it with `weight`.
    pub fn new(m: usize, n: usize, mut weight: impl FnMut(&[usize]) -> f64) -> Self {
        let mut marginals = vec![0.0; n * m];
        let mut pairs = vec![0.0; (n - 1) * m * m];
        let mut total = 0.0;
        for_each_path(m, n, |p| {
            let w = weight(p);
            if w == 0.0 {
                return;
            }
            total += w;
            for (site, &z) in p.iter().enumerate() {
                marginals[site * m + z] += w;
            }
            for (step, z) in p.windows(2).enumerate() {
                pairs[step * m * m + z[0] * m + z[1]] += w;
            }
        });
        marginals.iter_mut().for_each(|v| *v /= total);
        pairs.iter_mut().for_each(|v| *v /= total);
        Self {
            m,
            n,
            total,
            marginals,
            pairs,
        }
    }

    pub fn of_chain(chain: &PotentialChain) -> Self {
        let m = chain.alphabet();
        Self::new(m, chain.len(), |p| {
            p.windows(2)
                .enumerate()
                .map(|(step, z)| chain.potential(step)[z[0] * m + z[1]])
                .product()
        })
    }

    pub fn marginal(&self, site: usize) -> &[f64] {
        &self.marginals[site * self.m..(site + 1) * self.m]
    }

    /// `p(z_{step+1} = b | z_step = a)`; `None` when `a` has no mass.
    pub fn transition(&self, step: usize, a: usize, b: usize) -> Option<f64> {
        let pa = self.marginal(step)[a];
        (pa > 0.0).then(|| self.pairs[step * self.m * self.m + a * self.m + b] / pa)
    }
}

/// Random chain with potentials `exp(U(-3, 3))`.
pub fn random_chain<R: Rng>(rng: &mut R, m: usize, n: usize) -> PotentialChain {
    let data = (0..(n - 1) * m * m)
        .map(|_| rng.random_range(-3.0f64..3.0).exp())
        .collect();
    PotentialChain::new(m, n, data).unwrap()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn normal_pdf(y: f64, mean: f64, var: f64) -> f64 {
    (-(y - mean).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Random row-major `size x size` joint law with entries bounded away from 0.
pub fn random_joint<R: Rng>(rng: &mut R, size: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..size * size)
        .map(|_| rng.random_range(0.05..1.0))
        .collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Row-conditional of a joint: `p(j | i) = J[i][j] / sum_j J[i][j]`.
pub fn row_conditional(joint: &[f64], size: usize) -> Vec<f64> {
    let mut out = joint.to_vec();
    for row in out.chunks_exact_mut(size) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
    }
    out
}

/// Class-level model parameters in plain arrays.
#[derive(Debug, Clone)]
pub struct RawHmc {
    pub k: usize,
    pub joint_h: Vec<f64>,
    pub joint_v: Vec<f64>,
    pub means: Vec<f64>,
    pub vars: Vec<f64>,
}

/// Posterior of the classic (`contextual = false`) or contextual chain on a
/// grid path, by normalizing the joint density over all `K^N` label paths.
pub fn enumerate_hmc(raw: &RawHmc, path: &GridPath, y: &[f64], contextual: bool) -> Enumerated {
    let k = raw.k;
    let n = y.len();
    let cond_h = row_conditional(&raw.joint_h, k);
    let cond_v = row_conditional(&raw.joint_v, k);
    let f = |obs: f64, class: usize| normal_pdf(obs, raw.means[class], raw.vars[class]);
    // site emission tables, p(y_n, y_v(n), y_w(n) | x_n)
    let emission: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            (0..k)
                .map(|x| {
                    let mut e = f(y[s], x);
                    if contextual {
                        for &(t, horizontal) in &path.extras[s] {
                            let cond = if horizontal { &cond_h } else { &cond_v };
                            e *= (0..k).map(|j| cond[x * k + j] * f(y[t], j)).sum::<f64>();
                        }
                    }
                    e
                })
                .collect()
        })
        .collect();
    Enumerated::new(k, n, |x| {
        let first = if path.steps_horizontal[0] {
            &raw.joint_h
        } else {
            &raw.joint_v
        };
        let mut w = first[x[0] * k + x[1]];
        for step in 1..n - 1 {
            let cond = if path.steps_horizontal[step] {
                &cond_h
            } else {
                &cond_v
            };
            w *= cond[x[step] * k + x[step + 1]];
        }
        for (s, &xs) in x.iter().enumerate() {
            w *= emission[s][xs];
        }
        w
    })
}

/// Evidential parameters in plain arrays; focal sets are `{0}, ..., {K-1}`
/// followed by `Omega`.
#[derive(Debug, Clone)]
pub struct RawEvidential {
    pub k: usize,
    pub joint_h: Vec<f64>,
    pub joint_v: Vec<f64>,
    pub means: Vec<f64>,
    pub vars: Vec<f64>,
}

impl RawEvidential {
    /// Compound states as `(class, focal)`, singletons first.
    pub fn states(&self) -> Vec<(usize, usize)> {
        let k = self.k;
        (0..k)
            .map(|i| (i, i))
            .chain((0..k).map(|i| (i, k)))
            .collect()
    }

    fn card(&self, focal: usize) -> f64 {
        if focal == self.k {
            self.k as f64
        } else {
            1.0
        }
    }
}

/// Posterior over compound paths of the evidential contextual chain on a
/// grid path, by enumerating all `(2K)^N` paths.
pub fn enumerate_hemc(raw: &RawEvidential, path: &GridPath, y: &[f64]) -> Enumerated {
    let k = raw.k;
    let l = k + 1;
    let states = raw.states();
    let m = states.len();
    let n = y.len();
    let cond_h = row_conditional(&raw.joint_h, l);
    let cond_v = row_conditional(&raw.joint_v, l);
    let f = |obs: f64, class: usize| normal_pdf(obs, raw.means[class], raw.vars[class]);
    // p(y_t | u_s) = sum_{x_t, u_t} p(u_t | u_s) p(x_t | u_t) p(y_t | x_t)
    let ctx = |obs: f64, u: usize, cond: &[f64]| -> f64 {
        states
            .iter()
            .map(|&(xt, ut)| cond[u * l + ut] / raw.card(ut) * f(obs, xt))
            .sum()
    };
    let emission: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            states
                .iter()
                .map(|&(x, u)| {
                    let mut e = f(y[s], x);
                    for &(t, horizontal) in &path.extras[s] {
                        e *= ctx(y[t], u, if horizontal { &cond_h } else { &cond_v });
                    }
                    e
                })
                .collect()
        })
        .collect();
    Enumerated::new(m, n, |z| {
        let (_, u1) = states[z[0]];
        let (_, u2) = states[z[1]];
        let first = if path.steps_horizontal[0] {
            &raw.joint_h
        } else {
            &raw.joint_v
        };
        // p(u_1) p(x_1 | u_1) p(u_2 | u_1) p(x_2 | u_2)
        let mut w = first[u1 * l + u2] / raw.card(u1) / raw.card(u2);
        for step in 1..n - 1 {
            let (_, a) = states[z[step]];
            let (_, b) = states[z[step + 1]];
            let cond = if path.steps_horizontal[step] {
                &cond_h
            } else {
                &cond_v
            };
            w *= cond[a * l + b] / raw.card(b);
        }
        for (s, &zs) in z.iter().enumerate() {
            w *= emission[s][zs];
        }
        w
    })
}
