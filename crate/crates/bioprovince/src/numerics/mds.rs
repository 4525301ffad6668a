//! Classical (Torgerson) multidimensional scaling.

use super::eigen::jacobi_eigen;
use super::DistanceMatrix;
use crate::error::{Error, Result};

/// Embed a distance matrix into `dims` Euclidean dimensions.
///
/// Double-centers the squared distances (`B = -1/2 * J * D^2 * J`), takes the
/// top `dims` eigenpairs, and scales each eigenvector by `sqrt(max(lambda, 0))`
/// (negative eigenvalues of non-Euclidean inputs are clamped to zero). The
/// sign of each eigenvector is fixed so its first nonzero coordinate is
/// positive, making the output deterministic.
pub fn classical_mds(dist: &DistanceMatrix, dims: usize) -> Result<Vec<Vec<f64>>> {
    let n = dist.size();
    if n < 3 {
        return Err(Error::Numerics(format!(
            "classical_mds requires at least 3 points, got {n}"
        )));
    }
    if dims == 0 || dims > n {
        return Err(Error::Numerics(format!(
            "classical_mds: invalid target dimension {dims}"
        )));
    }

    // B = -1/2 (d_ij^2 - rowmean_i - colmean_j + grandmean)
    let mut sq = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d = dist.get(i, j);
            sq[i * n + j] = d * d;
        }
    }
    let row_means: Vec<f64> = (0..n)
        .map(|i| sq[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64)
        .collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            // symmetric input: column means equal row means
            b[i * n + j] = -0.5 * (sq[i * n + j] - row_means[i] - row_means[j] + grand);
        }
    }

    let (vals, vecs) = jacobi_eigen(&b, n)?;

    // eigenvalues below the numerical noise floor of the decomposition are
    // zero-rank directions; clamping keeps sqrt from amplifying residuals
    let floor = vals.iter().cloned().fold(0.0, f64::max) * 1e-12;

    let mut coords = vec![vec![0.0; dims]; n];
    for k in 0..dims {
        let scale = if vals[k] <= floor { 0.0 } else { vals[k].sqrt() };
        let mut v = vecs[k].clone();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
        }
        for i in 0..n {
            coords[i][k] = v[i] * scale;
        }
    }
    Ok(coords)
}
