//! Comparison and summary outputs: cross-tabulation against external
//! province labels, per-cluster mean compositions aggregated to plankton
//! groups, and a synthetic-data generator used for validation.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::biocluster::validate_memberships;
use crate::data::{CompositionTable, GridSpec, SampleMeta};
use crate::error::{Error, Result};

/// Row-normalized contingency table of external provinces (rows, ordered
/// north to south by mean sample latitude) against estimated provinces
/// (columns, ordered by each row's strongest correspondence).
#[derive(Debug, Clone, PartialEq)]
pub struct CrossTab {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<u32>,
    /// `values[row][col]`, each row summing to 1.
    pub values: Vec<Vec<f64>>,
    /// Samples skipped because they carry no external label.
    pub n_unlabeled: usize,
}

/// Cross-tabulate estimated memberships against the external province labels
/// carried by the meta rows. Samples without a label are excluded (their
/// count is reported in `n_unlabeled`).
pub fn cross_tabulate(memberships: &[u32], meta: &[SampleMeta]) -> Result<CrossTab> {
    if memberships.len() != meta.len() {
        return Err(Error::Data("cross-tab: length mismatch".into()));
    }
    validate_memberships(memberships, meta.len())?;

    let labeled: Vec<usize> = (0..meta.len())
        .filter(|&i| meta[i].external_province.is_some())
        .collect();
    let n_unlabeled = meta.len() - labeled.len();
    if labeled.is_empty() {
        return Err(Error::Data("cross-tab: no externally labeled samples".into()));
    }

    // rows: external provinces north -> south by mean latitude
    let mut by_province: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for &i in &labeled {
        by_province
            .entry(meta[i].external_province.as_deref().unwrap())
            .or_default()
            .push(i);
    }
    let mut row_labels: Vec<String> = by_province.keys().map(|s| s.to_string()).collect();
    let mean_lat = |name: &str| -> f64 {
        let idx = &by_province[name];
        idx.iter().map(|&i| meta[i].latitude).sum::<f64>() / idx.len() as f64
    };
    row_labels.sort_by(|a, b| {
        mean_lat(b)
            .partial_cmp(&mean_lat(a))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(b))
    });

    // estimated labels present among the counted samples, ascending
    let mut est_labels: Vec<u32> = labeled.iter().map(|&i| memberships[i]).collect();
    est_labels.sort_unstable();
    est_labels.dedup();

    // raw row-normalized fractions in ascending-label column order
    let mut raw = vec![vec![0.0; est_labels.len()]; row_labels.len()];
    for (ri, row_label) in row_labels.iter().enumerate() {
        let idx = &by_province[row_label.as_str()];
        for &i in idx {
            let ci = est_labels.binary_search(&memberships[i]).unwrap();
            raw[ri][ci] += 1.0;
        }
        let total: f64 = raw[ri].iter().sum();
        for v in raw[ri].iter_mut() {
            *v /= total;
        }
    }

    // column order: walk rows north to south, pulling each row's argmax
    // column first; append leftovers in ascending label order
    let mut col_order: Vec<usize> = Vec::new();
    for row in &raw {
        let mut best = 0usize;
        for (ci, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = ci;
            }
        }
        if !col_order.contains(&best) && row[best] > 0.0 {
            col_order.push(best);
        }
    }
    for ci in 0..est_labels.len() {
        if !col_order.contains(&ci) {
            col_order.push(ci);
        }
    }

    let col_labels: Vec<u32> = col_order.iter().map(|&ci| est_labels[ci]).collect();
    let values: Vec<Vec<f64>> = raw
        .iter()
        .map(|row| col_order.iter().map(|&ci| row[ci]).collect())
        .collect();

    Ok(CrossTab {
        row_labels,
        col_labels,
        values,
        n_unlabeled,
    })
}

/// Per-cluster mean compositions aggregated to named groups.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanComposition {
    /// Cluster labels, ascending.
    pub clusters: Vec<u32>,
    /// Group names, sorted; ASVs absent from the map fall into `other`.
    pub groups: Vec<String>,
    /// `values[cluster][group]`, each row summing to 1.
    pub values: Vec<Vec<f64>>,
}

/// Average the member compositions of every cluster, then sum the averaged
/// parts within each group of `group_map` (`asv_id -> group name`).
pub fn mean_cluster_composition(
    table: &CompositionTable,
    memberships: &[u32],
    group_map: &HashMap<String, String>,
) -> Result<MeanComposition> {
    validate_memberships(memberships, table.n_samples())?;
    let k = *memberships.iter().max().unwrap() as usize;

    let asv_groups: Vec<&str> = table
        .asv_ids()
        .iter()
        .map(|id| group_map.get(id).map(|s| s.as_str()).unwrap_or("other"))
        .collect();
    let mut groups: Vec<String> = asv_groups.iter().map(|s| s.to_string()).collect();
    groups.sort();
    groups.dedup();
    let group_idx: HashMap<&str, usize> = groups
        .iter()
        .enumerate()
        .map(|(i, g)| (g.as_str(), i))
        .collect();

    let d = table.n_asvs();
    let mut values = Vec::with_capacity(k);
    for label in 1..=k as u32 {
        let members: Vec<usize> = (0..table.n_samples())
            .filter(|&i| memberships[i] == label)
            .collect();
        if members.is_empty() {
            return Err(Error::Data(format!("cluster {label} is empty")));
        }
        let mut mean = vec![0.0; d];
        for &i in &members {
            for (col, &v) in table.row(i).iter().enumerate() {
                mean[col] += v;
            }
        }
        for v in mean.iter_mut() {
            *v /= members.len() as f64;
        }
        let mut grouped = vec![0.0; groups.len()];
        for (col, &v) in mean.iter().enumerate() {
            grouped[group_idx[asv_groups[col]]] += v;
        }
        values.push(grouped);
    }

    Ok(MeanComposition {
        clusters: (1..=k as u32).collect(),
        groups,
        values,
    })
}

/// Parameters of the synthetic validation dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n_provinces: usize,
    pub n_samples: usize,
    pub n_asvs: usize,
    /// Number of grid points to lay out over the latitude-depth rectangle.
    pub n_grid: usize,
    /// Standard deviation of the log-composition noise (abiotic noise scales
    /// with it). Zero gives perfectly separable provinces.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_provinces: 3,
            n_samples: 150,
            n_asvs: 300,
            n_grid: 2000,
            noise: 0.003,
            seed: 0,
        }
    }
}

/// A planted dataset with known ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub table: CompositionTable,
    pub meta: Vec<SampleMeta>,
    pub grid: GridSpec,
    /// True province of every sample (1-based).
    pub sample_truth: Vec<u32>,
    /// True province of every grid point (1-based).
    pub grid_truth: Vec<u32>,
}

const LAT_MAX: f64 = 60.0;
const DEPTH_MAX: f64 = 200.0;
const DRIFT_LAT: f64 = 0.1;
const DRIFT_DEPTH: f64 = 0.02;
const CENTER_SCALE: f64 = 0.8;
const SALINITY_STEP: f64 = 2.0;

/// Plant contiguous latitude-band provinces with distinct log-normal
/// composition centers plus a smooth latitude/depth drift, abiotic fields
/// that encode the provinces (temperature falls with latitude and depth,
/// salinity steps per province), and a regular evaluation grid.
///
/// Samples are assigned to provinces round-robin with stratified latitudes,
/// so every province is populated; one cruise id per province keeps the
/// distance-decay regressions of `tune_r` inside a single composition regime.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    let p = spec.n_provinces;
    if p < 1 {
        return Err(Error::Config("need at least one province".into()));
    }
    if spec.n_samples < p || spec.n_samples < 2 {
        return Err(Error::Config(format!(
            "cannot place {p} provinces in {} samples",
            spec.n_samples
        )));
    }
    if spec.n_asvs < 2 {
        return Err(Error::Config("need at least 2 ASVs".into()));
    }
    if spec.n_grid < 1 {
        return Err(Error::Config("need at least one grid point".into()));
    }
    if spec.noise < 0.0 || !spec.noise.is_finite() {
        return Err(Error::Config("noise must be nonnegative".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, 1.0).map_err(|e| Error::Numerics(e.to_string()))?;
    let n = spec.n_samples;
    let d = spec.n_asvs;
    let band = LAT_MAX / p as f64;

    // distinct log-space center per province
    let centers: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..d).map(|_| CENTER_SCALE * normal.sample(&mut rng)).collect())
        .collect();
    // shared smooth drift directions (centered unit vectors)
    let mut drift_lat: Vec<f64> = (0..d).map(|_| normal.sample(&mut rng)).collect();
    let mut drift_depth: Vec<f64> = (0..d).map(|_| normal.sample(&mut rng)).collect();
    for v in [&mut drift_lat, &mut drift_depth] {
        let mean = v.iter().sum::<f64>() / d as f64;
        for x in v.iter_mut() {
            *x -= mean;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
    }

    let province_of = |i: usize| i % p;
    let mut per_province_count = vec![0usize; p];
    for i in 0..n {
        per_province_count[province_of(i)] += 1;
    }
    let mut seen_in_province = vec![0usize; p];

    let mut sample_ids = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * d);
    let mut meta = Vec::with_capacity(n);
    let mut sample_truth = Vec::with_capacity(n);
    for i in 0..n {
        let prov = province_of(i);
        let count = per_province_count[prov] as f64;
        let slot = seen_in_province[prov] as f64;
        seen_in_province[prov] += 1;
        // stratified latitude inside the band, with jitter that cannot
        // escape the slot
        let jitter = (rng.random::<f64>() - 0.5) * 0.6;
        let lat = (prov as f64 + (slot + 0.5 + jitter) / count) * band;
        let depth = rng.random::<f64>() * DEPTH_MAX;

        let mut row_raw = Vec::with_capacity(d);
        let mut sum = 0.0;
        for l in 0..d {
            let log_v = centers[prov][l]
                + DRIFT_LAT * lat * drift_lat[l]
                + DRIFT_DEPTH * depth * drift_depth[l]
                + spec.noise * normal.sample(&mut rng);
            let v = log_v.exp();
            row_raw.push(v);
            sum += v;
        }
        for v in row_raw {
            values.push(v / sum);
        }

        let temperature = 28.0 - 0.35 * lat - 0.08 * depth + 10.0 * spec.noise * normal.sample(&mut rng);
        let salinity = 33.0 + SALINITY_STEP * prov as f64 + 10.0 * spec.noise * normal.sample(&mut rng);
        sample_ids.push(format!("S{:04}", i + 1));
        meta.push(SampleMeta {
            sample_id: format!("S{:04}", i + 1),
            latitude: lat,
            depth,
            temperature,
            salinity,
            cruise: format!("cruise-{}", prov + 1),
            external_province: Some(format!("EXT-{}", prov + 1)),
        });
        sample_truth.push(prov as u32 + 1);
    }

    let asv_ids: Vec<String> = (0..d).map(|l| format!("ASV{:04}", l + 1)).collect();
    let table = CompositionTable::new(sample_ids, asv_ids, values)?;

    // regular grid over the full rectangle, noise-free abiotic fields
    let n_lat = (spec.n_grid as f64).sqrt().ceil() as usize;
    let n_depth = spec.n_grid.div_ceil(n_lat);
    let mut grid = GridSpec {
        grid_ids: Vec::new(),
        latitude: Vec::new(),
        depth: Vec::new(),
        temperature: Vec::new(),
        salinity: Vec::new(),
    };
    let mut grid_truth = Vec::new();
    'outer: for a in 0..n_lat {
        for b in 0..n_depth {
            if grid.grid_ids.len() == spec.n_grid {
                break 'outer;
            }
            let lat = if n_lat > 1 {
                LAT_MAX * a as f64 / (n_lat - 1) as f64
            } else {
                LAT_MAX / 2.0
            };
            let depth = if n_depth > 1 {
                DEPTH_MAX * b as f64 / (n_depth - 1) as f64
            } else {
                DEPTH_MAX / 2.0
            };
            let prov = ((lat / band) as usize).min(p - 1);
            grid.grid_ids.push(format!("G{:05}", grid.grid_ids.len() + 1));
            grid.latitude.push(lat);
            grid.depth.push(depth);
            grid.temperature.push(28.0 - 0.35 * lat - 0.08 * depth);
            grid.salinity.push(33.0 + SALINITY_STEP * prov as f64);
            grid_truth.push(prov as u32 + 1);
        }
    }

    Ok(SyntheticData {
        table,
        meta,
        grid,
        sample_truth,
        grid_truth,
    })
}
