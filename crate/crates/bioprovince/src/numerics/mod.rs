//! Self-contained numerical kernels: spectral norm via power iteration,
//! classical MDS, 2-D convex hull containment, Hungarian assignment, and
//! simple linear regression with a slope t-test.

mod eigen;
mod hull;
mod hungarian;
mod mds;
mod regression;
mod special;

pub use eigen::{jacobi_eigen, operator_norm};
pub use hull::{convex_hull_fraction, HullFraction};
pub use hungarian::hungarian;
pub use mds::classical_mds;
pub use regression::{linear_regression, RegressionFit};

use crate::error::{Error, Result};

/// Symmetric nonnegative distance matrix with a zero diagonal.
///
/// Stored row-major; symmetry is enforced on construction (tolerance 1e-12)
/// and preserved by all operations in this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Validate and wrap an `n x n` row-major buffer.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Numerics(format!(
                "distance matrix buffer has {} entries, expected {}",
                values.len(),
                n * n
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() {
                    return Err(Error::Numerics(format!(
                        "non-finite distance at ({i},{j})"
                    )));
                }
                if v < 0.0 {
                    return Err(Error::Numerics(format!("negative distance at ({i},{j})")));
                }
                if i == j && v != 0.0 {
                    return Err(Error::Numerics(format!("nonzero diagonal at ({i},{i})")));
                }
                if (v - values[j * n + i]).abs() > 1e-12 {
                    return Err(Error::Numerics(format!("asymmetry at ({i},{j})")));
                }
            }
        }
        Ok(DistanceMatrix { n, values })
    }

    /// Build a matrix by evaluating `f(i, j)` once per unordered pair `i < j`
    /// and mirroring, so the result is symmetric by construction.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Numerics(format!(
                        "invalid distance {v} at ({i},{j})"
                    )));
                }
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Ok(DistanceMatrix { n, values })
    }

    /// Number of rows/columns.
    pub fn size(&self) -> usize {
        self.n
    }

    /// Entry `(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Row `i` as a slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// The raw row-major buffer.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Largest entry, 0 for an empty matrix.
    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub(crate) fn from_raw_unchecked(n: usize, values: Vec<f64>) -> Self {
        DistanceMatrix { n, values }
    }
}
