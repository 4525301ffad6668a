//! Biological (Aitchison), spatial (r-scaled latitude + depth), and mixed
//! distance matrices.

use rayon::prelude::*;

use crate::data::{CompositionTable, SampleMeta};
use crate::error::{Error, Result};
use crate::numerics::{operator_norm, DistanceMatrix};

/// The two hyperparameters of the mixed distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixParams {
    /// Weight of the spatial matrix in the convex combination, in [0, 1].
    pub alpha: f64,
    /// Latitude-to-depth scale: one degree of latitude counts as `r` meters.
    pub r: f64,
}

impl MixParams {
    pub fn new(alpha: f64, r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be in [0, 1], got {alpha}")));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Config(format!("r must be positive, got {r}")));
        }
        Ok(MixParams { alpha, r })
    }
}

/// Aitchison distance: Euclidean distance between the centered log-ratio
/// transforms of two strictly positive compositions.
pub fn aitchison_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Data(format!(
            "composition length mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    if p.len() < 2 {
        return Err(Error::Data("compositions need at least 2 parts".into()));
    }
    for &v in p.iter().chain(q.iter()) {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Data(format!("nonpositive composition entry {v}")));
        }
    }
    let lp: Vec<f64> = p.iter().map(|v| v.ln()).collect();
    let lq: Vec<f64> = q.iter().map(|v| v.ln()).collect();
    let mp = lp.iter().sum::<f64>() / lp.len() as f64;
    let mq = lq.iter().sum::<f64>() / lq.len() as f64;
    let mut sum = 0.0;
    for i in 0..lp.len() {
        let diff = (lp[i] - mp) - (lq[i] - mq);
        sum += diff * diff;
    }
    Ok(sum.sqrt())
}

/// Centered log-ratio transform of every row; rows of the result are the
/// coordinates in which the Aitchison distance is Euclidean.
pub(crate) fn clr_rows(table: &CompositionTable) -> Vec<Vec<f64>> {
    (0..table.n_samples())
        .map(|i| clr_of(table.row(i)))
        .collect()
}

pub(crate) fn clr_of(row: &[f64]) -> Vec<f64> {
    let logs: Vec<f64> = row.iter().map(|v| v.ln()).collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    logs.into_iter().map(|v| v - mean).collect()
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Pairwise Aitchison distances of all samples.
///
/// The CLR transform of each row is computed once; entries are then plain
/// Euclidean distances, evaluated independently per pair (parallelized, with
/// results identical regardless of schedule).
pub fn bio_distance_matrix(table: &CompositionTable) -> DistanceMatrix {
    let clr = clr_rows(table);
    pairwise_matrix(table.n_samples(), |i, j| euclidean(&clr[i], &clr[j]))
}

/// Spatial distance matrix: `sqrt(r^2 (lat_i - lat_j)^2 + (depth_i - depth_j)^2)`.
pub fn spatial_distance_matrix(meta: &[SampleMeta], r: f64) -> Result<DistanceMatrix> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Config(format!("r must be positive, got {r}")));
    }
    let coords: Vec<(f64, f64)> = meta.iter().map(|m| (m.latitude, m.depth)).collect();
    Ok(pairwise_matrix(coords.len(), |i, j| {
        spatial_distance(coords[i], coords[j], r)
    }))
}

/// Eq. of the spatial metric for a single pair of (latitude, depth) points.
#[inline]
pub fn spatial_distance(a: (f64, f64), b: (f64, f64), r: f64) -> f64 {
    let dlat = r * (a.0 - b.0);
    let ddepth = a.1 - b.1;
    (dlat * dlat + ddepth * ddepth).sqrt()
}

/// Convex mixture `D_alpha = (1 - alpha) * h(D_bio) + alpha * h(D_spatial)`
/// where `h` divides a matrix by its spectral norm (a zero matrix stays zero).
///
/// At `alpha = 0` the result equals `h(D_bio)` exactly, and at `alpha = 1`
/// it equals `h(D_spatial)` exactly.
pub fn mix_distance_matrix(
    d_bio: &DistanceMatrix,
    d_spatial: &DistanceMatrix,
    alpha: f64,
) -> Result<DistanceMatrix> {
    if d_bio.size() != d_spatial.size() {
        return Err(Error::Numerics(format!(
            "mix: size mismatch {} vs {}",
            d_bio.size(),
            d_spatial.size()
        )));
    }
    if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
        return Err(Error::Config(format!("alpha must be in [0, 1], got {alpha}")));
    }
    let n = d_bio.size();
    let norm_bio = operator_norm(d_bio.as_slice(), n)?;
    let norm_spatial = operator_norm(d_spatial.as_slice(), n)?;
    // divide by the norm (not multiply by a reciprocal) so the boundaries
    // alpha = 0 and alpha = 1 reproduce the rescaled inputs bit for bit
    let h_bio = move |b: f64| if norm_bio > 0.0 { b / norm_bio } else { 0.0 };
    let h_spatial = move |s: f64| if norm_spatial > 0.0 { s / norm_spatial } else { 0.0 };

    let values: Vec<f64> = d_bio
        .as_slice()
        .iter()
        .zip(d_spatial.as_slice())
        .map(|(&b, &s)| (1.0 - alpha) * h_bio(b) + alpha * h_spatial(s))
        .collect();
    Ok(DistanceMatrix::from_raw_unchecked(n, values))
}

/// Rescale a matrix by its spectral norm (the `h` in the mixture).
pub fn spectral_rescale(m: &DistanceMatrix) -> Result<DistanceMatrix> {
    let n = m.size();
    let norm = operator_norm(m.as_slice(), n)?;
    if norm == 0.0 {
        return Ok(m.clone());
    }
    let values = m.as_slice().iter().map(|&v| v / norm).collect();
    Ok(DistanceMatrix::from_raw_unchecked(n, values))
}

/// Build a symmetric zero-diagonal matrix in parallel; entry `(i, j)` is
/// computed exactly once, so the result is independent of the schedule.
fn pairwise_matrix(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> DistanceMatrix {
    let mut values = vec![0.0; n * n];
    {
        let rows: Vec<(usize, &mut [f64])> = values.chunks_mut(n).enumerate().collect();
        rows.into_par_iter().for_each(|(i, row)| {
            for j in 0..n {
                if j != i {
                    row[j] = f(i.min(j), i.max(j));
                }
            }
        });
    }
    DistanceMatrix::from_raw_unchecked(n, values)
}
