//! Province stability under ASV subsampling: rerun the pipeline on
//! subsampled tables, realign cluster labels against the full-data reference
//! via Hungarian matching on mean spatial cluster distances, and report how
//! often each grid point keeps its modal label.

use rayon::prelude::*;

use crate::biocluster::{cluster, validate_memberships};
use crate::data::{subsample_asvs, CompositionTable, GridSpec, SampleMeta};
use crate::distance::{bio_distance_matrix, mix_distance_matrix, spatial_distance, spatial_distance_matrix};
use crate::error::{Error, Result};
use crate::numerics::hungarian;
use crate::province::{predict, ProvinceMap, RescaleDomain};
use crate::seeding::derive_seed;

/// Per-grid-point modal label and its frequency across replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityMap {
    pub grid_ids: Vec<String>,
    pub modal_cluster: Vec<u32>,
    /// Fraction of replicates that assigned the modal label, in (0, 1].
    pub stability: Vec<f64>,
    pub n_replicates: usize,
}

/// Hyperparameters of one stability run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityParams {
    pub r: f64,
    pub alpha: f64,
    /// Number of clusters K.
    pub k_clusters: usize,
    /// k-NN neighborhood size for grid prediction.
    pub k_neighbors: usize,
    /// ASV fraction kept per replicate.
    pub fraction: f64,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for StabilityParams {
    fn default() -> Self {
        StabilityParams {
            r: 1.0,
            alpha: 0.0,
            k_clusters: 1,
            k_neighbors: 1,
            fraction: 0.7,
            replicates: 100,
            seed: 0,
        }
    }
}

/// Relabeling of replicate clusters onto reference clusters.
///
/// `cost(k1, k2)` is the mean spatial distance between all samples of
/// reference cluster `k1` and all samples of replicate cluster `k2`; empty
/// clusters cost 10x the largest finite cost. Returns `perm` with
/// `perm[replicate_label - 1] = reference_label`.
pub fn align_labels(
    reference: &[u32],
    replicate: &[u32],
    meta: &[SampleMeta],
    r: f64,
    k: usize,
) -> Result<Vec<u32>> {
    if reference.len() != replicate.len() || reference.len() != meta.len() {
        return Err(Error::Data("align: length mismatch".into()));
    }
    let max_ref = *reference.iter().max().unwrap_or(&0) as usize;
    let max_rep = *replicate.iter().max().unwrap_or(&0) as usize;
    if max_ref > k || max_rep > k {
        return Err(Error::Data(format!(
            "align: labels exceed K = {k} ({max_ref} vs {max_rep})"
        )));
    }
    let members = |labels: &[u32]| -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            if l >= 1 {
                m[l as usize - 1].push(i);
            }
        }
        m
    };
    let ref_members = members(reference);
    let rep_members = members(replicate);
    let pos: Vec<(f64, f64)> = meta.iter().map(|m| (m.latitude, m.depth)).collect();

    let mut cost = vec![vec![f64::NAN; k]; k];
    let mut max_finite: f64 = 0.0;
    for (a, ra) in ref_members.iter().enumerate() {
        for (b, rb) in rep_members.iter().enumerate() {
            if ra.is_empty() || rb.is_empty() {
                continue;
            }
            let mut sum = 0.0;
            for &i in ra {
                for &j in rb {
                    sum += spatial_distance(pos[i], pos[j], r);
                }
            }
            let mean = sum / (ra.len() * rb.len()) as f64;
            cost[a][b] = mean;
            max_finite = max_finite.max(mean);
        }
    }
    if max_finite == 0.0 && ref_members.iter().all(|m| m.is_empty()) {
        return Err(Error::Data("align: all clusters empty".into()));
    }
    let empty_cost = 10.0 * max_finite.max(1.0);
    for row in cost.iter_mut() {
        for v in row.iter_mut() {
            if !v.is_finite() {
                *v = empty_cost;
            }
        }
    }

    // assignment[k1] = replicate column matched to reference cluster k1
    let assignment = hungarian(&cost)?;
    let mut perm = vec![0u32; k];
    for (ref_label0, &rep_label0) in assignment.iter().enumerate() {
        perm[rep_label0] = ref_label0 as u32 + 1;
    }
    Ok(perm)
}

/// Full stability analysis.
///
/// The reference run clusters the complete table and predicts the grid; each
/// replicate subsamples `fraction` of the ASVs (seeded deterministically from
/// `seed` and the replicate index), reruns clustering at the same `K`,
/// realigns labels to the reference, and re-predicts the grid. `Stab_j` is
/// the frequency of grid point `j`'s modal label.
pub fn run_stability(
    table: &CompositionTable,
    meta: &[SampleMeta],
    grid: &GridSpec,
    params: &StabilityParams,
) -> Result<StabilityMap> {
    if params.replicates < 1 {
        return Err(Error::Config("need at least one replicate".into()));
    }
    let latitudes: Vec<f64> = meta.iter().map(|m| m.latitude).collect();
    let d_spatial = spatial_distance_matrix(meta, params.r)?;

    // reference run on the full data
    let d_bio = bio_distance_matrix(table);
    let d_alpha = mix_distance_matrix(&d_bio, &d_spatial, params.alpha)?;
    let reference = cluster(&d_alpha, params.k_clusters, Some(&latitudes))?;
    validate_memberships(&reference.memberships, meta.len())?;

    let replicate_maps: Vec<Result<ProvinceMap>> = (0..params.replicates)
        .into_par_iter()
        .map(|l| {
            let sub = subsample_asvs(table, params.fraction, derive_seed(params.seed, l as u64))?;
            let d_bio_l = bio_distance_matrix(&sub);
            let d_alpha_l = mix_distance_matrix(&d_bio_l, &d_spatial, params.alpha)?;
            let rep = cluster(&d_alpha_l, params.k_clusters, Some(&latitudes))?;
            let perm = align_labels(
                &reference.memberships,
                &rep.memberships,
                meta,
                params.r,
                params.k_clusters,
            )?;
            let aligned: Vec<u32> = rep
                .memberships
                .iter()
                .map(|&m| perm[m as usize - 1])
                .collect();
            predict(
                grid,
                meta,
                &aligned,
                params.k_neighbors,
                params.r,
                RescaleDomain::Union,
            )
        })
        .collect();

    let b = grid.len();
    let k = params.k_clusters;
    let mut counts = vec![vec![0usize; k]; b];
    for (l, rep) in replicate_maps.into_iter().enumerate() {
        let map = rep.map_err(|e| Error::Numerics(format!("stability replicate {l}: {e}")))?;
        for j in 0..b {
            counts[j][map.memberships[j] as usize - 1] += 1;
        }
    }

    let mut modal_cluster = Vec::with_capacity(b);
    let mut stability = Vec::with_capacity(b);
    for tally in &counts {
        // smallest label wins a count tie
        let (best_label0, best_count) = tally
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .unwrap();
        modal_cluster.push(best_label0 as u32 + 1);
        stability.push(*best_count as f64 / params.replicates as f64);
    }

    Ok(StabilityMap {
        grid_ids: grid.grid_ids.clone(),
        modal_cluster,
        stability,
        n_replicates: params.replicates,
    })
}

/// Per-cluster KL divergence of its cruise mix against the uniform mix over
/// all cruises present in the dataset (`0 ln 0 = 0`).
pub fn cluster_source_homogeneity(memberships: &[u32], cruises: &[String]) -> Result<Vec<f64>> {
    if memberships.len() != cruises.len() {
        return Err(Error::Data("homogeneity: length mismatch".into()));
    }
    validate_memberships(memberships, memberships.len())?;
    let k = *memberships.iter().max().unwrap() as usize;

    let mut all_cruises: Vec<&String> = cruises.iter().collect();
    all_cruises.sort();
    all_cruises.dedup();
    let c = all_cruises.len() as f64;

    let mut out = Vec::with_capacity(k);
    for label in 1..=k as u32 {
        let members: Vec<usize> = (0..memberships.len())
            .filter(|&i| memberships[i] == label)
            .collect();
        if members.is_empty() {
            return Err(Error::Data(format!("cluster {label} is empty")));
        }
        let total = members.len() as f64;
        let mut kl = 0.0;
        for cruise in &all_cruises {
            let count = members.iter().filter(|&&i| &cruises[i] == *cruise).count();
            if count > 0 {
                let q = count as f64 / total;
                kl += q * (q * c).ln();
            }
        }
        out.push(kl);
    }
    Ok(out)
}
