//! Symmetric eigen-kernels: spectral norm by power iteration and a cyclic
//! Jacobi eigendecomposition used by classical MDS.

use crate::error::{Error, Result};

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 10_000;

/// Spectral norm (largest absolute eigenvalue) of a symmetric matrix, by
/// power iteration with relative tolerance 1e-12 and at most 10000 iterations.
///
/// The zero matrix yields 0. `matrix` is row-major `n x n`.
pub fn operator_norm(matrix: &[f64], n: usize) -> Result<f64> {
    if matrix.len() != n * n {
        return Err(Error::Numerics(format!(
            "operator_norm: buffer of {} entries is not {n}x{n}",
            matrix.len()
        )));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerics("operator_norm: non-finite entry".into()));
    }
    if n == 0 || matrix.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }

    // Deterministic start vector with uneven entries so it is unlikely to be
    // orthogonal to the dominant eigenspace; a couple of restarts cover the
    // unlucky case.
    for attempt in 0..3u64 {
        let mut v: Vec<f64> = (0..n)
            .map(|i| {
                let x = splitmix(attempt.wrapping_mul(0x9e37).wrapping_add(i as u64 + 1));
                // map to [0.5, 1.5): bounded away from zero
                0.5 + (x >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        normalize(&mut v);

        let mut prev = f64::NAN;
        for _ in 0..POWER_MAX_ITER {
            let w = mat_vec(matrix, n, &v);
            let norm_w = norm(&w);
            if norm_w == 0.0 {
                // v landed in the null space; restart with a different vector
                break;
            }
            if (norm_w - prev).abs() <= POWER_TOL * norm_w {
                return Ok(norm_w);
            }
            prev = norm_w;
            v = w;
            normalize(&mut v);
        }
        if prev.is_finite() {
            // iteration cap reached; the estimate has stabilized enough
            return Ok(prev);
        }
    }
    // Every start vector was annihilated; the matrix acts as zero on all of
    // them, treat as numerically zero.
    Ok(0.0)
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` sorted by descending eigenvalue;
/// `eigenvectors[k]` is the unit eigenvector for `eigenvalues[k]`.
pub fn jacobi_eigen(matrix: &[f64], n: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if matrix.len() != n * n {
        return Err(Error::Numerics(format!(
            "jacobi_eigen: buffer of {} entries is not {n}x{n}",
            matrix.len()
        )));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerics("jacobi_eigen: non-finite entry".into()));
    }
    let mut a = matrix.to_vec();
    let mut vecs = vec![0.0; n * n];
    for i in 0..n {
        vecs[i * n + i] = 1.0;
    }

    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let stop = (frob.max(f64::MIN_POSITIVE)) * 1e-14;

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = vecs[k * n + p];
                    let vkq = vecs[k * n + q];
                    vecs[k * n + p] = c * vkp - s * vkq;
                    vecs[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .partial_cmp(&a[i * n + i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| (0..n).map(|row| vecs[row * n + col]).collect())
        .collect();
    Ok((eigenvalues, eigenvectors))
}

fn splitmix(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn mat_vec(m: &[f64], n: usize, v: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| m[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let nv = norm(v);
    if nv > 0.0 {
        for x in v.iter_mut() {
            *x /= nv;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_norm_is_one() {
        let m = vec![1.0, 0.0, 0.0, 1.0];
        assert!((operator_norm(&m, 2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn offdiagonal_pair() {
        // eigenvalues +-3
        let m = vec![0.0, 3.0, 3.0, 0.0];
        assert!((operator_norm(&m, 2).unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn zero_matrix_is_zero() {
        let m = vec![0.0; 9];
        assert_eq!(operator_norm(&m, 3).unwrap(), 0.0);
    }

    #[test]
    fn rejects_non_finite() {
        let m = vec![0.0, f64::INFINITY, f64::INFINITY, 0.0];
        assert!(operator_norm(&m, 2).is_err());
    }

    #[test]
    fn power_iteration_matches_jacobi_on_random_symmetric() {
        // Independent route: the full Jacobi decomposition.
        let mut state = 7u64;
        let mut next = || {
            state = splitmix(state);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..20 {
            let n = 5;
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let v = next();
                    m[i * n + j] = v;
                    m[j * n + i] = v;
                }
            }
            let norm_pi = operator_norm(&m, n).unwrap();
            let (vals, _) = jacobi_eigen(&m, n).unwrap();
            let norm_jac = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(
                (norm_pi - norm_jac).abs() < 1e-9,
                "power {norm_pi} vs jacobi {norm_jac}"
            );
        }
    }

    #[test]
    fn rayleigh_quotient_bound() {
        let mut state = 11u64;
        let mut next = || {
            state = splitmix(state);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let n = 6;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = next();
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        let nm = operator_norm(&m, n).unwrap();
        for _ in 0..100 {
            let v: Vec<f64> = (0..n).map(|_| next()).collect();
            let nv = norm(&v);
            if nv == 0.0 {
                continue;
            }
            let av = mat_vec(&m, n, &v);
            assert!(nm >= norm(&av) / nv - 1e-9);
        }
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // diag(5, 2, -1) conjugated by a rotation has the same spectrum
        let m = vec![5.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, -1.0];
        let (vals, vecs) = jacobi_eigen(&m, 3).unwrap();
        assert!((vals[0] - 5.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        assert!((vals[2] + 1.0).abs() < 1e-12);
        // eigenvectors are unit length
        for v in &vecs {
            assert!((norm(v) - 1.0).abs() < 1e-12);
        }
    }
}
