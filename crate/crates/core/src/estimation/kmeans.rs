use itertools::Itertools;

use crate::models::{EvidentialParams, HmcParams, JointMatrix};
use crate::scan::{Orientation, ScanLayout};

use super::{EstimationError, DEFAULT_VARIANCE_FLOOR};

const MAX_SWEEPS: usize = 100;

/// Mass given to the focal set `Omega` by the evidential initializer.
pub const EVIDENTIAL_INIT_OMEGA_MASS: f64 = 0.1;

/// Result of a one-dimensional k-means run; centers are ascending and
/// labels index into them.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub centers: Vec<f64>,
    pub labels: Vec<usize>,
    pub sweeps: usize,
}

/// Lloyd's algorithm on scalars, centers seeded at the empirical quantiles
/// `i / (k + 1)`. An emptied cluster is moved to the point farthest from its
/// current center.
pub fn kmeans_1d(values: &[f64], k: usize) -> Result<KMeans, EstimationError> {
    let distinct = values
        .iter()
        .copied()
        .sorted_by(f64::total_cmp)
        .dedup()
        .count();
    if k == 0 || distinct < k {
        return Err(EstimationError::InsufficientData {
            classes: k,
            distinct,
        });
    }

    let sorted: Vec<f64> = values.iter().copied().sorted_by(f64::total_cmp).collect();
    let last = (sorted.len() - 1) as f64;
    let mut centers: Vec<f64> = (1..=k)
        .map(|i| {
            let q = i as f64 / (k + 1) as f64 * last;
            let lo = q.floor() as usize;
            let hi = q.ceil() as usize;
            sorted[lo] + (q - lo as f64) * (sorted[hi] - sorted[lo])
        })
        .collect();

    let mut labels = vec![usize::MAX; values.len()];
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut changed = false;
        for (label, &v) in labels.iter_mut().zip(values) {
            let best = nearest(&centers, v);
            if best != *label {
                *label = best;
                changed = true;
            }
        }

        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&l, &v) in labels.iter().zip(values) {
            sums[l] += v;
            counts[l] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c] / counts[c] as f64;
            } else {
                let far = values
                    .iter()
                    .zip(&labels)
                    .map(|(&v, &l)| (v - centers[l]).abs())
                    .position_max_by(f64::total_cmp)
                    .expect("values are not empty");
                centers[c] = values[far];
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    // ascending centers, labels remapped
    let order: Vec<usize> = (0..k)
        .sorted_by(|&a, &b| centers[a].total_cmp(&centers[b]))
        .collect();
    let mut rank = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    Ok(KMeans {
        centers: order.iter().map(|&c| centers[c]).collect(),
        labels: labels.iter().map(|&l| rank[l]).collect(),
        sweeps,
    })
}

fn nearest(centers: &[f64], v: f64) -> usize {
    let mut best = 0;
    for (c, &m) in centers.iter().enumerate().skip(1) {
        if (v - m).abs() < (v - centers[best]).abs() {
            best = c;
        }
    }
    best
}

/// Initial parameters from k-means on scan-ordered observations: class
/// moments of the clusters and pair laws from label co-occurrences along
/// horizontal and vertical scan steps.
pub fn kmeans_init(
    observations: &[f64],
    classes: usize,
    layout: &ScanLayout,
) -> Result<HmcParams, EstimationError> {
    if observations.len() != layout.len() {
        return Err(EstimationError::InvalidConfig(format!(
            "{} observations for a {}-pixel scan",
            observations.len(),
            layout.len()
        )));
    }
    let km = kmeans_1d(observations, classes)?;
    let k = classes;

    let mut sq = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (&l, &y) in km.labels.iter().zip(observations) {
        sq[l] += (y - km.centers[l]).powi(2);
        counts[l] += 1;
    }
    let variances = sq
        .iter()
        .zip(&counts)
        .map(|(s, &c)| (s / c as f64).max(DEFAULT_VARIANCE_FLOOR))
        .collect();

    let mut co_h = vec![0.0; k * k];
    let mut co_v = vec![0.0; k * k];
    for (step, pair) in km.labels.windows(2).enumerate() {
        let target = match layout.step_orientation(step) {
            Orientation::Horizontal => &mut co_h,
            Orientation::Vertical => &mut co_v,
        };
        target[pair[0] * k + pair[1]] += 1.0;
    }
    for co in [&mut co_h, &mut co_v] {
        // a class never seen at the start of a pair still needs a row
        for i in 0..k {
            if co[i * k..(i + 1) * k].iter().all(|&c| c == 0.0) {
                co[i * k + i] = 1.0;
            }
        }
    }

    Ok(HmcParams::new(
        JointMatrix::from_weights(k, co_h)?,
        JointMatrix::from_weights(k, co_v)?,
        km.centers,
        variances,
    )?)
}

/// [`kmeans_init`] embedded into the evidential alphabet with
/// [`EVIDENTIAL_INIT_OMEGA_MASS`] spread over the pairs involving `Omega`.
pub fn kmeans_init_evidential(
    observations: &[f64],
    classes: usize,
    layout: &ScanLayout,
) -> Result<EvidentialParams, EstimationError> {
    let hmc = kmeans_init(observations, classes, layout)?;
    Ok(EvidentialParams::embed(&hmc, EVIDENTIAL_INIT_OMEGA_MASS)?)
}
