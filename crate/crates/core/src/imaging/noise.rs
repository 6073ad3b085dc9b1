use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{ImagingError, LabelImage, ObservedImage};

const MIN_NOISE_VARIANCE: f64 = 1e-6;

/// Independent Gaussian noise: pixel `s` gets `N(m_{x_s}, s^2_{x_s})`,
/// drawn in row-major order from a generator seeded with `seed`.
pub fn synth_noise(
    truth: &LabelImage,
    means: &[f64],
    variances: &[f64],
    seed: u64,
) -> Result<ObservedImage, ImagingError> {
    let k = truth.classes();
    for v in [means, variances] {
        if v.len() != k {
            return Err(ImagingError::Dimension {
                expected: k,
                actual: v.len(),
            });
        }
    }
    let laws: Vec<Normal<f64>> = means
        .iter()
        .zip(variances)
        .map(|(&m, &v)| {
            Normal::new(m, v.max(MIN_NOISE_VARIANCE).sqrt())
                .map_err(|e| ImagingError::BadFormat(format!("noise law: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = truth
        .labels()
        .iter()
        .map(|&l| laws[l - 1].sample(&mut rng))
        .collect();
    ObservedImage::new(truth.shape(), values)
}
