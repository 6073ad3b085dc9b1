use itertools::Itertools;

use super::{ImagingError, LabelImage};

/// Largest class count accepted by [`error_rate`] (the search is over `K!`
/// relabelings).
pub const MAX_SCORED_CLASSES: usize = 8;

/// Fraction of misclassified pixels, minimized over all relabelings of the
/// predicted classes.
pub fn error_rate(truth: &LabelImage, predicted: &LabelImage) -> Result<f64, ImagingError> {
    if truth.shape() != predicted.shape() {
        return Err(ImagingError::ShapeMismatch);
    }
    let k = truth.classes().max(predicted.classes());
    if k > MAX_SCORED_CLASSES {
        return Err(ImagingError::TooManyClasses(k));
    }
    let mut confusion = vec![0usize; k * k];
    for (&t, &p) in truth.labels().iter().zip(predicted.labels()) {
        confusion[(t - 1) * k + (p - 1)] += 1;
    }
    let best = (0..k)
        .permutations(k)
        .map(|perm| (0..k).map(|t| confusion[t * k + perm[t]]).sum::<usize>())
        .max()
        .unwrap_or(0);
    let n = truth.labels().len();
    Ok((n - best) as f64 / n as f64)
}
