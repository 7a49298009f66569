//! Four contemporaneously correlated Gaussian innovation streams.
//!
//! Draws are i.i.d. across time: at each step a vector of four standard
//! normals is mapped through the lower Cholesky factor of the innovation
//! covariance. The generator is ChaCha8 seeded with `seed_from_u64`, and
//! standard normals come from `rand_distr::StandardNormal` (ziggurat),
//! drawn in slot order 1..4 for each time step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SLOTS: usize = 4;

/// Tolerance on pivots when factoring a semi-definite matrix.
const PIVOT_TOL: f64 = 1e-12;

/// Innovation variances and pairwise covariances (0-based slot indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    matrix: [[f64; SLOTS]; SLOTS],
}

impl CovarianceSpec {
    /// Unit variances, no covariances.
    pub fn identity() -> Self {
        Self::new([1.0; SLOTS])
    }

    /// Diagonal covariance with the given variances.
    pub fn new(variances: [f64; SLOTS]) -> Self {
        let mut matrix = [[0.0; SLOTS]; SLOTS];
        for (i, v) in variances.iter().enumerate() {
            matrix[i][i] = *v;
        }
        Self { matrix }
    }

    /// Sets `σ_ij = σ_ji`. Panics on out-of-range or equal slots.
    pub fn with_covariance(mut self, i: usize, j: usize, value: f64) -> Self {
        assert!(i < SLOTS && j < SLOTS && i != j, "bad slot pair ({i}, {j})");
        self.matrix[i][j] = value;
        self.matrix[j][i] = value;
        self
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.matrix[i][i]
    }

    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        self.matrix[i][j]
    }

    pub fn matrix(&self) -> &[[f64; SLOTS]; SLOTS] {
        &self.matrix
    }

    /// Lower-triangular `L` with `L Lᵀ = Σ`.
    ///
    /// Singular but positive semi-definite matrices are accepted; the
    /// corresponding columns of `L` are zero.
    pub fn validate(&self) -> Result<CholeskyFactor> {
        let m = &self.matrix;
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "covariance entry ({}, {}) is not finite",
                        i + 1,
                        j + 1
                    )));
                }
            }
            if m[i][i] <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "innovation variance {} must be positive, got {}",
                    i + 1,
                    m[i][i]
                )));
            }
        }
        for i in 0..SLOTS {
            for j in (i + 1)..SLOTS {
                let bound = (m[i][i] * m[j][j]).sqrt();
                if m[i][j].abs() > bound * (1.0 + PIVOT_TOL) {
                    return Err(Error::NotPositiveSemiDefinite(format!(
                        "|sigma_{}{}| = {} exceeds sigma_{} * sigma_{} = {}",
                        i + 1,
                        j + 1,
                        m[i][j].abs(),
                        i + 1,
                        j + 1,
                        bound
                    )));
                }
            }
        }

        let mut l = [[0.0; SLOTS]; SLOTS];
        for j in 0..SLOTS {
            let pivot = m[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
            let scale = PIVOT_TOL * m[j][j];
            if pivot < -scale {
                return Err(Error::NotPositiveSemiDefinite(format!(
                    "negative pivot {pivot} at slot {}",
                    j + 1
                )));
            }
            if pivot <= scale {
                // Rank-deficient column: the remaining entries must vanish.
                for i in (j + 1)..SLOTS {
                    let r = m[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
                    if r.abs() > PIVOT_TOL.sqrt() * (m[i][i] * m[j][j]).sqrt() {
                        return Err(Error::NotPositiveSemiDefinite(format!(
                            "singular pivot at slot {} with nonzero coupling to slot {}",
                            j + 1,
                            i + 1
                        )));
                    }
                }
                continue;
            }
            let diag = pivot.sqrt();
            l[j][j] = diag;
            for i in (j + 1)..SLOTS {
                let r = m[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
                l[i][j] = r / diag;
            }
        }
        Ok(CholeskyFactor(l))
    }
}

impl Default for CovarianceSpec {
    fn default() -> Self {
        Self::identity()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CholeskyFactor(pub [[f64; SLOTS]; SLOTS]);

impl CholeskyFactor {
    pub fn rows(&self) -> &[[f64; SLOTS]; SLOTS] {
        &self.0
    }

    /// `L Lᵀ`.
    pub fn reconstruct(&self) -> [[f64; SLOTS]; SLOTS] {
        let l = &self.0;
        let mut out = [[0.0; SLOTS]; SLOTS];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..SLOTS).map(|k| l[i][k] * l[j][k]).sum();
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnovationBlock {
    pub streams: [Vec<f64>; SLOTS],
    pub seed: u64,
}

impl InnovationBlock {
    pub fn len(&self) -> usize {
        self.streams[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn sample(spec: &CovarianceSpec, len: usize, seed: u64) -> Result<InnovationBlock> {
    let factor = spec.validate()?;
    Ok(sample_with_factor(&factor, len, seed))
}

pub fn sample_with_factor(factor: &CholeskyFactor, len: usize, seed: u64) -> InnovationBlock {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = &factor.0;
    let mut streams: [Vec<f64>; SLOTS] = std::array::from_fn(|_| Vec::with_capacity(len));
    for _ in 0..len {
        let z: [f64; SLOTS] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        for (i, stream) in streams.iter_mut().enumerate() {
            let e = l[i][..=i].iter().zip(&z).map(|(a, b)| a * b).sum();
            stream.push(e);
        }
    }
    InnovationBlock { streams, seed }
}
