//! Image and label-map I/O, synthetic truth images and noise, and
//! permutation-invariant error scoring.

mod noise;
mod pgm;
mod score;
pub mod synthetic;

use std::io;
use std::path::Path;

use thiserror::Error;

use crate::scan::GridShape;

pub use noise::synth_noise;
pub use pgm::{read_pgm, write_pgm, GrayImage};
pub use score::{error_rate, MAX_SCORED_CLASSES};

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed image: {0}")]
    BadFormat(String),
    #[error("image is {width}x{height}; a square power-of-two side is required (use cropping for other sizes)")]
    BadShape { width: usize, height: usize },
    #[error("image has {levels} distinct levels but only {classes} classes were requested")]
    TooManyLevels { levels: usize, classes: usize },
    #[error("error rate supports at most {MAX_SCORED_CLASSES} classes, got {0}")]
    TooManyClasses(usize),
    #[error("images differ in shape")]
    ShapeMismatch,
    #[error("label {label} is outside 1..={classes}")]
    InvalidLabel { label: usize, classes: usize },
    #[error("expected {expected} values, got {actual}")]
    Dimension { expected: usize, actual: usize },
}

/// Observed intensities of a square image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedImage {
    shape: GridShape,
    values: Vec<f64>,
}

impl ObservedImage {
    pub fn new(shape: GridShape, values: Vec<f64>) -> Result<Self, ImagingError> {
        if values.len() != shape.n_pixels() {
            return Err(ImagingError::Dimension {
                expected: shape.n_pixels(),
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ImagingError::BadFormat("non-finite intensity".into()));
        }
        Ok(Self { shape, values })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Class map with labels in `1..=classes`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelImage {
    shape: GridShape,
    classes: usize,
    labels: Vec<usize>,
}

impl LabelImage {
    pub fn new(shape: GridShape, classes: usize, labels: Vec<usize>) -> Result<Self, ImagingError> {
        if labels.len() != shape.n_pixels() {
            return Err(ImagingError::Dimension {
                expected: shape.n_pixels(),
                actual: labels.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l == 0 || l > classes) {
            return Err(ImagingError::InvalidLabel { label, classes });
        }
        Ok(Self {
            shape,
            classes,
            labels,
        })
    }

    /// Builds a label image from 0-based class indices.
    pub fn from_zero_based(
        shape: GridShape,
        classes: usize,
        states: &[usize],
    ) -> Result<Self, ImagingError> {
        Self::new(shape, classes, states.iter().map(|s| s + 1).collect())
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Gray level used when saving class `label`.
    pub fn intensity(&self, label: usize) -> u8 {
        if self.classes <= 1 {
            0
        } else {
            (255.0 * (label - 1) as f64 / (self.classes - 1) as f64).round() as u8
        }
    }

    pub fn to_gray(&self) -> GrayImage {
        let side = self.shape.side();
        GrayImage {
            width: side,
            height: side,
            maxval: 255,
            samples: self
                .labels
                .iter()
                .map(|&l| self.intensity(l) as u16)
                .collect(),
        }
    }
}

fn square_shape(width: usize, height: usize) -> Result<GridShape, ImagingError> {
    if width != height {
        return Err(ImagingError::BadShape { width, height });
    }
    GridShape::from_side(width).ok_or(ImagingError::BadShape { width, height })
}

/// Converts a decoded gray image to observations in `[0, 255]`.
///
/// With `crop`, the largest centered power-of-two square is kept; otherwise
/// the image must already be a power-of-two square.
pub fn observed_from_gray(image: &GrayImage, crop: bool) -> Result<ObservedImage, ImagingError> {
    let (w, h) = (image.width, image.height);
    let (shape, x0, y0) = if crop {
        let side = w.min(h);
        if side == 0 {
            return Err(ImagingError::BadShape {
                width: w,
                height: h,
            });
        }
        let side = 1usize << side.ilog2();
        let shape = GridShape::from_side(side).ok_or(ImagingError::BadShape {
            width: w,
            height: h,
        })?;
        (shape, (w - side) / 2, (h - side) / 2)
    } else {
        (square_shape(w, h)?, 0, 0)
    };
    let side = shape.side();
    let scale = 255.0 / image.maxval as f64;
    let mut values = Vec::with_capacity(shape.n_pixels());
    for r in 0..side {
        let row = &image.samples[(y0 + r) * w + x0..(y0 + r) * w + x0 + side];
        values.extend(row.iter().map(|&s| s as f64 * scale));
    }
    ObservedImage::new(shape, values)
}

pub fn load_grayscale(path: impl AsRef<Path>, crop: bool) -> Result<ObservedImage, ImagingError> {
    observed_from_gray(&read_pgm(path)?, crop)
}

/// Maps the distinct gray levels of an image to classes `1, 2, ...` in
/// ascending order.
pub fn labels_from_gray(image: &GrayImage, classes: usize) -> Result<LabelImage, ImagingError> {
    let shape = square_shape(image.width, image.height)?;
    let mut levels: Vec<u16> = image.samples.clone();
    levels.sort_unstable();
    levels.dedup();
    if levels.len() > classes {
        return Err(ImagingError::TooManyLevels {
            levels: levels.len(),
            classes,
        });
    }
    let labels = image
        .samples
        .iter()
        .map(|s| levels.binary_search(s).expect("level present") + 1)
        .collect();
    LabelImage::new(shape, classes, labels)
}

pub fn load_labels(path: impl AsRef<Path>, classes: usize) -> Result<LabelImage, ImagingError> {
    labels_from_gray(&read_pgm(path)?, classes)
}

/// Writes a class map as a binary PGM, class `i` at gray level
/// `round(255 (i - 1) / (K - 1))`.
pub fn save_segmentation(labels: &LabelImage, path: impl AsRef<Path>) -> Result<(), ImagingError> {
    write_pgm(&labels.to_gray(), path)
}

/// Affine map from stored gray levels back to intensities,
/// `y = offset + scale * level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelMap {
    pub offset: f64,
    pub scale: f64,
}

impl LevelMap {
    pub fn apply(&self, level: u16) -> f64 {
        self.offset + self.scale * level as f64
    }
}

/// Writes observations as a 16-bit PGM whose levels span the value range,
/// and returns the map back to the original values (exact up to half a
/// level).
pub fn save_observed(
    image: &ObservedImage,
    path: impl AsRef<Path>,
) -> Result<LevelMap, ImagingError> {
    let (lo, hi) = image
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let top = u16::MAX as f64;
    let map = LevelMap {
        offset: lo,
        scale: if hi > lo { (hi - lo) / top } else { 1.0 },
    };
    let side = image.shape.side();
    let gray = GrayImage {
        width: side,
        height: side,
        maxval: u16::MAX,
        samples: image
            .values
            .iter()
            .map(|v| ((v - map.offset) / map.scale).round().clamp(0.0, top) as u16)
            .collect(),
    };
    write_pgm(&gray, path)?;
    Ok(map)
}
