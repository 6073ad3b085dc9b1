use crate::scan::Orientation;

use super::ModelError;

/// Tolerance on the total mass of a joint matrix.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Square matrix of pair probabilities `p(a_t = i, a_{t+1} = j)`, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct JointMatrix {
    size: usize,
    data: Vec<f64>,
}

impl JointMatrix {
    pub fn new(size: usize, data: Vec<f64>) -> Result<Self, ModelError> {
        check_weights(size, &data)?;
        let total: f64 = data.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(ModelError::NotNormalized { total });
        }
        Ok(Self { size, data })
    }

    /// Normalizes nonnegative weights (counts, for instance) to unit mass.
    pub fn from_weights(size: usize, mut data: Vec<f64>) -> Result<Self, ModelError> {
        check_weights(size, &data)?;
        let total: f64 = data.iter().sum();
        if total <= 0.0 {
            return Err(ModelError::NotNormalized { total });
        }
        data.iter_mut().for_each(|v| *v /= total);
        Ok(Self { size, data })
    }

    pub fn identity_one() -> Self {
        Self {
            size: 1,
            data: vec![1.0],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        (0..self.size).map(|i| self.get(i, j)).sum()
    }

    /// Row-normalized conditional `p(a_{t+1} = j | a_t = i)`.
    pub fn conditional(&self, orientation: Orientation) -> Result<Vec<f64>, ModelError> {
        self.conditional_with(orientation, |_| false)
    }

    // Rows of states flagged by `skip` are left at zero instead of failing.
    pub(crate) fn conditional_with(
        &self,
        orientation: Orientation,
        skip: impl Fn(usize) -> bool,
    ) -> Result<Vec<f64>, ModelError> {
        let k = self.size;
        let mut out = vec![0.0; k * k];
        for i in 0..k {
            let s = self.row_sum(i);
            if s <= 0.0 {
                if skip(i) {
                    continue;
                }
                return Err(ModelError::ZeroRow {
                    orientation,
                    row: i,
                });
            }
            for j in 0..k {
                out[i * k + j] = self.get(i, j) / s;
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_weights(size: usize, data: &[f64]) -> Result<(), ModelError> {
    if size == 0 || data.len() != size * size {
        return Err(ModelError::Dimension {
            what: "joint matrix",
            expected: size * size,
            actual: data.len(),
        });
    }
    if data.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(ModelError::InvalidProbability);
    }
    Ok(())
}

fn check_emissions(classes: usize, means: &[f64], variances: &[f64]) -> Result<(), ModelError> {
    if means.len() != classes {
        return Err(ModelError::Dimension {
            what: "means",
            expected: classes,
            actual: means.len(),
        });
    }
    if variances.len() != classes {
        return Err(ModelError::Dimension {
            what: "variances",
            expected: classes,
            actual: variances.len(),
        });
    }
    if means.iter().any(|m| !m.is_finite()) {
        return Err(ModelError::InvalidMean);
    }
    if let Some(&v) = variances.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(ModelError::InvalidVariance(v));
    }
    Ok(())
}

/// Parameters shared by the plain and contextual hidden Markov chain models:
/// horizontal and vertical pair laws plus one Gaussian per class.
#[derive(Debug, Clone, PartialEq)]
pub struct HmcParams {
    pub(crate) joint_h: JointMatrix,
    pub(crate) joint_v: JointMatrix,
    pub(crate) means: Vec<f64>,
    pub(crate) variances: Vec<f64>,
}

impl HmcParams {
    pub fn new(
        joint_h: JointMatrix,
        joint_v: JointMatrix,
        means: Vec<f64>,
        variances: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let k = joint_h.size();
        if joint_v.size() != k {
            return Err(ModelError::Dimension {
                what: "vertical joint matrix",
                expected: k * k,
                actual: joint_v.size() * joint_v.size(),
            });
        }
        check_emissions(k, &means, &variances)?;
        Ok(Self {
            joint_h,
            joint_v,
            means,
            variances,
        })
    }

    pub fn classes(&self) -> usize {
        self.means.len()
    }

    pub fn joint_h(&self) -> &JointMatrix {
        &self.joint_h
    }

    pub fn joint_v(&self) -> &JointMatrix {
        &self.joint_v
    }

    pub fn joint(&self, orientation: Orientation) -> &JointMatrix {
        match orientation {
            Orientation::Horizontal => &self.joint_h,
            Orientation::Vertical => &self.joint_v,
        }
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// Emission density of class `class` at `y`.
    pub fn density(&self, y: f64, class: usize) -> f64 {
        super::gaussian_density(y, self.means[class], self.variances[class])
    }
}

/// Parameters of the evidential chain: pair laws over the focal sets
/// `{1}, ..., {K}, Omega` (index `K` is `Omega`) plus one Gaussian per class.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidentialParams {
    pub(crate) classes: usize,
    pub(crate) joint_h: JointMatrix,
    pub(crate) joint_v: JointMatrix,
    pub(crate) means: Vec<f64>,
    pub(crate) variances: Vec<f64>,
}

impl EvidentialParams {
    pub fn new(
        classes: usize,
        joint_h: JointMatrix,
        joint_v: JointMatrix,
        means: Vec<f64>,
        variances: Vec<f64>,
    ) -> Result<Self, ModelError> {
        for (what, j) in [
            ("horizontal joint matrix", &joint_h),
            ("vertical joint matrix", &joint_v),
        ] {
            if j.size() != classes + 1 {
                return Err(ModelError::Dimension {
                    what,
                    expected: (classes + 1) * (classes + 1),
                    actual: j.size() * j.size(),
                });
            }
        }
        check_emissions(classes, &means, &variances)?;
        Ok(Self {
            classes,
            joint_h,
            joint_v,
            means,
            variances,
        })
    }

    /// Embeds class-level pair laws into the focal-set alphabet: the singleton
    /// block gets `(1 - rho)` of the mass and the `2K + 1` entries involving
    /// `Omega` share `rho` uniformly.
    pub fn embed(params: &HmcParams, rho: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(ModelError::InvalidProbability);
        }
        let k = params.classes();
        let omega_share = rho / (2 * k + 1) as f64;
        let embed_one = |j: &JointMatrix| {
            let mut data = vec![omega_share; (k + 1) * (k + 1)];
            for a in 0..k {
                for b in 0..k {
                    data[a * (k + 1) + b] = (1.0 - rho) * j.get(a, b);
                }
            }
            JointMatrix::from_weights(k + 1, data)
        };
        Self::new(
            k,
            embed_one(&params.joint_h)?,
            embed_one(&params.joint_v)?,
            params.means.clone(),
            params.variances.clone(),
        )
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn joint_h(&self) -> &JointMatrix {
        &self.joint_h
    }

    pub fn joint_v(&self) -> &JointMatrix {
        &self.joint_v
    }

    pub fn joint(&self, orientation: Orientation) -> &JointMatrix {
        match orientation {
            Orientation::Horizontal => &self.joint_h,
            Orientation::Vertical => &self.joint_v,
        }
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// Focal sets that carry no mass in either pair law. They are removed
    /// from the compound alphabet rather than treated as errors.
    pub fn null_focal_sets(&self) -> Vec<bool> {
        (0..=self.classes)
            .map(|u| {
                [&self.joint_h, &self.joint_v]
                    .iter()
                    .all(|j| j.row_sum(u) == 0.0 && j.col_sum(u) == 0.0)
            })
            .collect()
    }
}
