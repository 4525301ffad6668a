//! Localized nearest-neighbor prediction of province memberships on the
//! abiotic grid.
//!
//! For each grid point the candidate set is the intersection of its `k`
//! abiotically nearest samples (L2 in temperature/salinity, both rescaled to
//! [0, 1]) with its `k` spatially nearest samples. The predicted membership
//! is the mode of the candidates' memberships; a tie goes to the spatially
//! nearest candidate and an empty intersection falls back to the single
//! spatially nearest sample.

use rayon::prelude::*;

use crate::biocluster::validate_memberships;
use crate::data::{GridSpec, SampleMeta};
use crate::distance::spatial_distance;
use crate::error::{Error, Result};

/// Which values the min/max rescaling of abiotic fields ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RescaleDomain {
    /// Union of sample and grid values (keeps grid values in [0, 1]).
    #[default]
    Union,
    /// Sample values only.
    SamplesOnly,
}

/// Per-grid-point record of how the prediction was made.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    /// Number of candidates that voted (1 on fallback).
    pub k_prime: usize,
    /// A vote tie was resolved by the spatially nearest candidate.
    pub tie_broken: bool,
    /// The candidate set was empty; the spatially nearest sample decided.
    pub fallback_used: bool,
}

/// Predicted memberships on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProvinceMap {
    pub grid_ids: Vec<String>,
    pub memberships: Vec<u32>,
    pub provenance: Vec<Provenance>,
}

/// Linearly rescale both value sets to [0, 1] over their combined range.
/// A constant range maps everything to 0.5.
pub fn min_max_rescale(
    values_samples: &[f64],
    values_grid: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    rescale_with_domain(values_samples, values_grid, RescaleDomain::Union)
}

fn rescale_with_domain(
    values_samples: &[f64],
    values_grid: &[f64],
    domain: RescaleDomain,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if values_samples.is_empty() && values_grid.is_empty() {
        return Err(Error::Data("rescale: no values".into()));
    }
    if values_samples
        .iter()
        .chain(values_grid.iter())
        .any(|v| !v.is_finite())
    {
        return Err(Error::Data("rescale: non-finite value".into()));
    }
    let pool: Box<dyn Iterator<Item = &f64>> = match domain {
        RescaleDomain::Union => Box::new(values_samples.iter().chain(values_grid.iter())),
        RescaleDomain::SamplesOnly => Box::new(values_samples.iter()),
    };
    let (lo, hi) = pool.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let map = |v: f64| {
        if hi == lo {
            0.5
        } else {
            (v - lo) / (hi - lo)
        }
    };
    Ok((
        values_samples.iter().map(|&v| map(v)).collect(),
        values_grid.iter().map(|&v| map(v)).collect(),
    ))
}

/// Predict a membership for every grid point.
///
/// `memberships` are the flat cluster labels of the samples in `meta`; `k` is
/// the neighborhood size for both the abiotic and the spatial nearest
/// neighbor sets; `r` the latitude-to-depth scale of the spatial metric.
pub fn predict(
    grid: &GridSpec,
    meta: &[SampleMeta],
    memberships: &[u32],
    k: usize,
    r: f64,
    domain: RescaleDomain,
) -> Result<ProvinceMap> {
    if k < 1 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if grid.is_empty() {
        return Err(Error::Data("empty grid".into()));
    }
    if meta.is_empty() {
        return Err(Error::Data("no samples".into()));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Config(format!("r must be positive, got {r}")));
    }
    validate_memberships(memberships, meta.len())?;

    let sample_temp: Vec<f64> = meta.iter().map(|m| m.temperature).collect();
    let sample_sal: Vec<f64> = meta.iter().map(|m| m.salinity).collect();
    let (st, gt) = rescale_with_domain(&sample_temp, &grid.temperature, domain)?;
    let (ss, gs) = rescale_with_domain(&sample_sal, &grid.salinity, domain)?;
    let sample_pos: Vec<(f64, f64)> = meta.iter().map(|m| (m.latitude, m.depth)).collect();

    let n = meta.len();
    let k_eff = k.min(n);

    let results: Vec<(u32, Provenance)> = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let gpos = (grid.latitude[j], grid.depth[j]);
            // distances to every sample in both metrics
            let mut abiotic: Vec<(f64, usize)> = (0..n)
                .map(|i| {
                    let dt = gt[j] - st[i];
                    let ds = gs[j] - ss[i];
                    ((dt * dt + ds * ds).sqrt(), i)
                })
                .collect();
            let mut spatial: Vec<(f64, usize)> = (0..n)
                .map(|i| (spatial_distance(gpos, sample_pos[i], r), i))
                .collect();
            // ties at the k-th radius resolve to the smallest sample index
            abiotic.sort_by(|a, b| a.partial_cmp(b).unwrap());
            spatial.sort_by(|a, b| a.partial_cmp(b).unwrap());

            let abiotic_set: Vec<usize> = abiotic[..k_eff].iter().map(|&(_, i)| i).collect();
            let spatial_rank: Vec<usize> = spatial.iter().map(|&(_, i)| i).collect();
            let spatial_set = &spatial_rank[..k_eff];

            let candidates: Vec<usize> = abiotic_set
                .iter()
                .copied()
                .filter(|i| spatial_set.contains(i))
                .collect();

            if candidates.is_empty() {
                let nearest = spatial_rank[0];
                return (
                    memberships[nearest],
                    Provenance {
                        k_prime: 1,
                        tie_broken: false,
                        fallback_used: true,
                    },
                );
            }

            let mut counts: std::collections::BTreeMap<u32, usize> = std::collections::BTreeMap::new();
            for &i in &candidates {
                *counts.entry(memberships[i]).or_insert(0) += 1;
            }
            let max_count = *counts.values().max().unwrap();
            let tied: Vec<u32> = counts
                .iter()
                .filter(|&(_, &c)| c == max_count)
                .map(|(&l, _)| l)
                .collect();

            let (label, tie_broken) = if tied.len() == 1 {
                (tied[0], false)
            } else {
                // spatially nearest candidate wins; spatial_rank is ordered
                // by (distance, index) so the first candidate hit is it
                let nearest_candidate = spatial_rank
                    .iter()
                    .copied()
                    .find(|i| candidates.contains(i))
                    .expect("candidates are a subset of the spatial ranking");
                (memberships[nearest_candidate], true)
            };
            (
                label,
                Provenance {
                    k_prime: candidates.len(),
                    tie_broken,
                    fallback_used: false,
                },
            )
        })
        .collect();

    let (memberships_out, provenance): (Vec<u32>, Vec<Provenance>) = results.into_iter().unzip();
    Ok(ProvinceMap {
        grid_ids: grid.grid_ids.clone(),
        memberships: memberships_out,
        provenance,
    })
}
