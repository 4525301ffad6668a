//! Python bindings for the bioprovince pipeline: composition tables, the
//! three distance matrices, Ward clustering, localized k-NN province
//! prediction, hyperparameter tuning, and the stability analysis.

use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use bioprovince::error::Error;
use bioprovince::{biocluster, data, distance, numerics, province, report, stability, tuning};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Numerics(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// n x d table of strictly positive relative abundances, rows summing to 1.
#[pyclass]
#[derive(Clone)]
struct CompositionTable {
    inner: data::CompositionTable,
}

#[pymethods]
impl CompositionTable {
    /// Build from raw rows (counts or fractions); zeros are removed per
    /// `zero_policy` ("multiplicative" or "pseudocount:<value>").
    #[new]
    #[pyo3(signature = (sample_ids, asv_ids, rows, zero_policy = "multiplicative"))]
    fn new(
        sample_ids: Vec<String>,
        asv_ids: Vec<String>,
        rows: Vec<Vec<f64>>,
        zero_policy: &str,
    ) -> PyResult<Self> {
        let policy: data::ZeroPolicy = zero_policy.parse().map_err(to_py)?;
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        let inner =
            data::CompositionTable::from_raw(sample_ids, asv_ids, values, policy).map_err(to_py)?;
        Ok(CompositionTable { inner })
    }

    #[getter]
    fn sample_ids(&self) -> Vec<String> {
        self.inner.sample_ids().to_vec()
    }

    #[getter]
    fn asv_ids(&self) -> Vec<String> {
        self.inner.asv_ids().to_vec()
    }

    fn n_samples(&self) -> usize {
        self.inner.n_samples()
    }

    fn n_asvs(&self) -> usize {
        self.inner.n_asvs()
    }

    fn row(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.n_samples() {
            return Err(PyValueError::new_err(format!("sample index {i} out of range")));
        }
        Ok(self.inner.row(i).to_vec())
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.inner.n_samples())
            .map(|i| self.inner.row(i).to_vec())
            .collect()
    }

    /// Keep `floor(d * fraction)` ASV columns (same columns for every
    /// sample), renormalize rows; deterministic in `seed`.
    fn subsample(&self, fraction: f64, seed: u64) -> PyResult<CompositionTable> {
        Ok(CompositionTable {
            inner: data::subsample_asvs(&self.inner, fraction, seed).map_err(to_py)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "CompositionTable({} samples x {} ASVs)",
            self.inner.n_samples(),
            self.inner.n_asvs()
        )
    }
}

/// Per-sample location, abiotic measurements, and provenance.
#[pyclass]
#[derive(Clone)]
struct SampleMeta {
    inner: data::SampleMeta,
}

#[pymethods]
impl SampleMeta {
    #[new]
    #[pyo3(signature = (sample_id, latitude, depth, temperature, salinity, cruise, external_province = None))]
    fn new(
        sample_id: String,
        latitude: f64,
        depth: f64,
        temperature: f64,
        salinity: f64,
        cruise: String,
        external_province: Option<String>,
    ) -> Self {
        SampleMeta {
            inner: data::SampleMeta {
                sample_id,
                latitude,
                depth,
                temperature,
                salinity,
                cruise,
                external_province,
            },
        }
    }

    #[getter]
    fn sample_id(&self) -> String {
        self.inner.sample_id.clone()
    }
    #[getter]
    fn latitude(&self) -> f64 {
        self.inner.latitude
    }
    #[getter]
    fn depth(&self) -> f64 {
        self.inner.depth
    }
    #[getter]
    fn temperature(&self) -> f64 {
        self.inner.temperature
    }
    #[getter]
    fn salinity(&self) -> f64 {
        self.inner.salinity
    }
    #[getter]
    fn cruise(&self) -> String {
        self.inner.cruise.clone()
    }
    #[getter]
    fn external_province(&self) -> Option<String> {
        self.inner.external_province.clone()
    }
}

/// The fine prediction grid.
#[pyclass]
#[derive(Clone)]
struct GridSpec {
    inner: data::GridSpec,
}

#[pymethods]
impl GridSpec {
    #[new]
    fn new(
        grid_ids: Vec<String>,
        latitude: Vec<f64>,
        depth: Vec<f64>,
        temperature: Vec<f64>,
        salinity: Vec<f64>,
    ) -> PyResult<Self> {
        let n = grid_ids.len();
        if [latitude.len(), depth.len(), temperature.len(), salinity.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(PyValueError::new_err("grid column lengths differ"));
        }
        Ok(GridSpec {
            inner: data::GridSpec {
                grid_ids,
                latitude,
                depth,
                temperature,
                salinity,
            },
        })
    }

    #[getter]
    fn grid_ids(&self) -> Vec<String> {
        self.inner.grid_ids.clone()
    }
    #[getter]
    fn latitude(&self) -> Vec<f64> {
        self.inner.latitude.clone()
    }
    #[getter]
    fn depth(&self) -> Vec<f64> {
        self.inner.depth.clone()
    }
    #[getter]
    fn temperature(&self) -> Vec<f64> {
        self.inner.temperature.clone()
    }
    #[getter]
    fn salinity(&self) -> Vec<f64> {
        self.inner.salinity.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Symmetric nonnegative distance matrix with zero diagonal.
#[pyclass]
#[derive(Clone)]
struct DistanceMatrix {
    inner: numerics::DistanceMatrix,
}

#[pymethods]
impl DistanceMatrix {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("distance matrix must be square"));
        }
        let inner = numerics::DistanceMatrix::new(n, rows.into_iter().flatten().collect())
            .map_err(to_py)?;
        Ok(DistanceMatrix { inner })
    }

    fn size(&self) -> usize {
        self.inner.size()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.size();
        if i >= n || j >= n {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.inner.get(i, j))
    }

    fn to_lists(&self) -> Vec<Vec<f64>> {
        (0..self.inner.size())
            .map(|i| self.inner.row(i).to_vec())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("DistanceMatrix({0} x {0})", self.inner.size())
    }
}

/// Flat Ward clustering: memberships `1..=K` plus the merge history.
#[pyclass]
struct ClusterResult {
    #[pyo3(get)]
    memberships: Vec<u32>,
    #[pyo3(get)]
    k: usize,
    /// (left_node, right_node, height) per merge; samples are 0..n-1, the
    /// cluster created by step t is n + t.
    #[pyo3(get)]
    merges: Vec<(usize, usize, f64)>,
}

/// Predicted grid memberships plus per-point provenance.
#[pyclass]
struct ProvinceMap {
    #[pyo3(get)]
    grid_ids: Vec<String>,
    #[pyo3(get)]
    memberships: Vec<u32>,
    #[pyo3(get)]
    k_prime: Vec<usize>,
    #[pyo3(get)]
    tie_broken: Vec<bool>,
    #[pyo3(get)]
    fallback_used: Vec<bool>,
}

/// Modal label and stability per grid point.
#[pyclass]
struct StabilityMap {
    #[pyo3(get)]
    grid_ids: Vec<String>,
    #[pyo3(get)]
    modal_cluster: Vec<u32>,
    #[pyo3(get)]
    stability: Vec<f64>,
    #[pyo3(get)]
    n_replicates: usize,
}

/// Distance-decay tuning result for `r`.
#[pyclass]
struct RTuningResult {
    #[pyo3(get)]
    b1: f64,
    #[pyo3(get)]
    b2: f64,
    #[pyo3(get)]
    r: f64,
    /// (cruise, lat_slope, lat_p, depth_slope, depth_p, n_pairs)
    #[pyo3(get)]
    per_cruise: Vec<(String, Option<f64>, Option<f64>, Option<f64>, Option<f64>, usize)>,
}

/// Saturation scores per alpha.
#[pyclass]
struct AlphaCurve {
    #[pyo3(get)]
    alphas: Vec<f64>,
    #[pyo3(get)]
    scores: Vec<Vec<f64>>,
    #[pyo3(get)]
    null_scores: Vec<Vec<f64>>,
    #[pyo3(get)]
    suggested_alpha: Option<f64>,
}

/// Within-cluster distance per candidate K.
#[pyclass]
struct KCurve {
    #[pyo3(get)]
    ks: Vec<usize>,
    #[pyo3(get)]
    wcd: Vec<f64>,
    #[pyo3(get)]
    suggested_k: Option<usize>,
}

/// Row-normalized external-vs-estimated province table.
#[pyclass]
struct CrossTab {
    #[pyo3(get)]
    row_labels: Vec<String>,
    #[pyo3(get)]
    col_labels: Vec<u32>,
    #[pyo3(get)]
    values: Vec<Vec<f64>>,
    #[pyo3(get)]
    n_unlabeled: usize,
}

/// Per-cluster mean compositions over groups.
#[pyclass]
struct MeanComposition {
    #[pyo3(get)]
    clusters: Vec<u32>,
    #[pyo3(get)]
    groups: Vec<String>,
    #[pyo3(get)]
    values: Vec<Vec<f64>>,
}

/// Synthetic dataset with planted truth (1-based province labels).
#[pyclass]
struct SyntheticData {
    #[pyo3(get)]
    table: CompositionTable,
    #[pyo3(get)]
    meta: Vec<SampleMeta>,
    #[pyo3(get)]
    grid: GridSpec,
    #[pyo3(get)]
    sample_truth: Vec<u32>,
    #[pyo3(get)]
    grid_truth: Vec<u32>,
}

fn unwrap_meta(meta: Vec<SampleMeta>) -> Vec<data::SampleMeta> {
    meta.into_iter().map(|m| m.inner).collect()
}

/// Load a composition CSV and its companion meta CSV.
#[pyfunction]
#[pyo3(signature = (composition_csv, meta_csv, zero_policy = "multiplicative"))]
fn load_samples(
    composition_csv: PathBuf,
    meta_csv: PathBuf,
    zero_policy: &str,
) -> PyResult<(CompositionTable, Vec<SampleMeta>)> {
    let policy: data::ZeroPolicy = zero_policy.parse().map_err(to_py)?;
    let (table, meta) = data::load_samples(&composition_csv, &meta_csv, policy).map_err(to_py)?;
    Ok((
        CompositionTable { inner: table },
        meta.into_iter().map(|m| SampleMeta { inner: m }).collect(),
    ))
}

/// Load a grid CSV (`grid_id,latitude,depth,temperature,salinity`).
#[pyfunction]
fn load_grid(grid_csv: PathBuf) -> PyResult<GridSpec> {
    Ok(GridSpec {
        inner: data::load_grid(&grid_csv).map_err(to_py)?,
    })
}

/// Aitchison distance between two strictly positive compositions.
#[pyfunction]
fn aitchison_distance(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    distance::aitchison_distance(&p, &q).map_err(to_py)
}

/// Pairwise Aitchison distances of all samples.
#[pyfunction]
fn bio_distance_matrix(table: &CompositionTable) -> DistanceMatrix {
    DistanceMatrix {
        inner: distance::bio_distance_matrix(&table.inner),
    }
}

/// Pairwise `sqrt(r^2 dlat^2 + ddepth^2)` distances.
#[pyfunction]
fn spatial_distance_matrix(meta: Vec<SampleMeta>, r: f64) -> PyResult<DistanceMatrix> {
    Ok(DistanceMatrix {
        inner: distance::spatial_distance_matrix(&unwrap_meta(meta), r).map_err(to_py)?,
    })
}

/// Convex mixture `(1 - alpha) h(D_bio) + alpha h(D_spatial)` with `h` the
/// spectral-norm rescale.
#[pyfunction]
fn mix_distance_matrix(
    d_bio: &DistanceMatrix,
    d_spatial: &DistanceMatrix,
    alpha: f64,
) -> PyResult<DistanceMatrix> {
    Ok(DistanceMatrix {
        inner: distance::mix_distance_matrix(&d_bio.inner, &d_spatial.inner, alpha)
            .map_err(to_py)?,
    })
}

/// Ward clustering cut at exactly `k` groups. Labels order by ascending mean
/// |latitude| when latitudes are given, else by descending cluster size.
#[pyfunction]
#[pyo3(signature = (dist, k, latitudes = None))]
fn cluster(dist: &DistanceMatrix, k: usize, latitudes: Option<Vec<f64>>) -> PyResult<ClusterResult> {
    let result = biocluster::cluster(&dist.inner, k, latitudes.as_deref()).map_err(to_py)?;
    Ok(ClusterResult {
        memberships: result.memberships,
        k: result.k,
        merges: result
            .dendrogram
            .merges
            .iter()
            .map(|m| (m.left, m.right, m.height))
            .collect(),
    })
}

/// Sum of within-cluster distances over ordered pairs.
#[pyfunction]
fn within_cluster_distance(dist: &DistanceMatrix, memberships: Vec<u32>) -> PyResult<f64> {
    biocluster::within_cluster_distance(&dist.inner, &memberships).map_err(to_py)
}

/// Localized k-NN prediction of grid memberships.
#[pyfunction]
#[pyo3(signature = (grid, meta, memberships, k, r, rescale_domain = "union"))]
fn predict(
    grid: &GridSpec,
    meta: Vec<SampleMeta>,
    memberships: Vec<u32>,
    k: usize,
    r: f64,
    rescale_domain: &str,
) -> PyResult<ProvinceMap> {
    let domain = match rescale_domain {
        "union" => province::RescaleDomain::Union,
        "samples" => province::RescaleDomain::SamplesOnly,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown rescale domain {other:?} (use 'union' or 'samples')"
            )))
        }
    };
    let map = province::predict(&grid.inner, &unwrap_meta(meta), &memberships, k, r, domain)
        .map_err(to_py)?;
    Ok(ProvinceMap {
        grid_ids: map.grid_ids,
        memberships: map.memberships,
        k_prime: map.provenance.iter().map(|p| p.k_prime).collect(),
        tie_broken: map.provenance.iter().map(|p| p.tie_broken).collect(),
        fallback_used: map.provenance.iter().map(|p| p.fallback_used).collect(),
    })
}

/// Estimate the latitude-to-depth scale `r` from distance decay.
#[pyfunction]
#[pyo3(signature = (table, meta, lat_window = 3.0, depth_window = 10.0, significance = 0.05, weighting = "pairs"))]
fn tune_r(
    table: &CompositionTable,
    meta: Vec<SampleMeta>,
    lat_window: f64,
    depth_window: f64,
    significance: f64,
    weighting: &str,
) -> PyResult<RTuningResult> {
    let opts = tuning::RTuningOptions {
        lat_window,
        depth_window,
        significance,
        weighting: match weighting {
            "pairs" => tuning::SlopeWeighting::PairCount,
            "samples" => tuning::SlopeWeighting::SampleCount,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown weighting {other:?} (use 'pairs' or 'samples')"
                )))
            }
        },
    };
    let result = tuning::tune_r(&table.inner, &unwrap_meta(meta), &opts).map_err(to_py)?;
    Ok(RTuningResult {
        b1: result.b1,
        b2: result.b2,
        r: result.r,
        per_cruise: result
            .per_cruise
            .into_iter()
            .map(|f| {
                (
                    f.cruise,
                    f.lat_fit.as_ref().map(|reg| reg.slope),
                    f.lat_fit.as_ref().map(|reg| reg.p_value),
                    f.depth_fit.as_ref().map(|reg| reg.slope),
                    f.depth_fit.as_ref().map(|reg| reg.p_value),
                    f.n_pairs_lat.max(f.n_pairs_depth),
                )
            })
            .collect(),
    })
}

/// MDS/convex-hull saturation scores over an alpha grid.
#[pyfunction]
#[pyo3(signature = (table, meta, r, alphas, l_replicates = 100, seed = 0))]
fn alpha_saturation_curve(
    table: &CompositionTable,
    meta: Vec<SampleMeta>,
    r: f64,
    alphas: Vec<f64>,
    l_replicates: usize,
    seed: u64,
) -> PyResult<AlphaCurve> {
    let curve =
        tuning::alpha_saturation_curve(&table.inner, &unwrap_meta(meta), r, &alphas, l_replicates, seed)
            .map_err(to_py)?;
    Ok(AlphaCurve {
        alphas: curve.alphas,
        scores: curve.scores,
        null_scores: curve.null_scores,
        suggested_alpha: curve.suggested_alpha,
    })
}

/// Within-cluster distance at every candidate K on one dendrogram.
#[pyfunction]
fn k_elbow_curve(dist: &DistanceMatrix, ks: Vec<usize>) -> PyResult<KCurve> {
    let curve = tuning::k_elbow_curve(&dist.inner, &ks).map_err(to_py)?;
    Ok(KCurve {
        ks: curve.ks,
        wcd: curve.wcd,
        suggested_k: curve.suggested_k,
    })
}

/// Recommended inclusive range for the k-NN neighborhood size.
#[pyfunction]
fn knn_k_bounds() -> (usize, usize) {
    tuning::knn_k_bounds()
}

/// Full ASV-subsampling stability analysis.
#[pyfunction]
#[pyo3(signature = (table, meta, grid, r, alpha, k_clusters, k_neighbors, fraction = 0.7, replicates = 100, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn run_stability(
    table: &CompositionTable,
    meta: Vec<SampleMeta>,
    grid: &GridSpec,
    r: f64,
    alpha: f64,
    k_clusters: usize,
    k_neighbors: usize,
    fraction: f64,
    replicates: usize,
    seed: u64,
) -> PyResult<StabilityMap> {
    let params = stability::StabilityParams {
        r,
        alpha,
        k_clusters,
        k_neighbors,
        fraction,
        replicates,
        seed,
    };
    let map = stability::run_stability(&table.inner, &unwrap_meta(meta), &grid.inner, &params)
        .map_err(to_py)?;
    Ok(StabilityMap {
        grid_ids: map.grid_ids,
        modal_cluster: map.modal_cluster,
        stability: map.stability,
        n_replicates: map.n_replicates,
    })
}

/// Per-cluster KL divergence of the cruise mix against a uniform mix.
#[pyfunction]
fn cluster_source_homogeneity(memberships: Vec<u32>, cruises: Vec<String>) -> PyResult<Vec<f64>> {
    stability::cluster_source_homogeneity(&memberships, &cruises).map_err(to_py)
}

/// Row-normalized cross-tabulation of external labels vs estimated
/// memberships.
#[pyfunction]
fn cross_tabulate(memberships: Vec<u32>, meta: Vec<SampleMeta>) -> PyResult<CrossTab> {
    let tab = report::cross_tabulate(&memberships, &unwrap_meta(meta)).map_err(to_py)?;
    Ok(CrossTab {
        row_labels: tab.row_labels,
        col_labels: tab.col_labels,
        values: tab.values,
        n_unlabeled: tab.n_unlabeled,
    })
}

/// Mean member compositions per cluster, aggregated by `group_map`
/// (`asv_id -> group`; unmapped ASVs fall into "other").
#[pyfunction]
fn mean_cluster_composition(
    table: &CompositionTable,
    memberships: Vec<u32>,
    group_map: HashMap<String, String>,
) -> PyResult<MeanComposition> {
    let mc = report::mean_cluster_composition(&table.inner, &memberships, &group_map)
        .map_err(to_py)?;
    Ok(MeanComposition {
        clusters: mc.clusters,
        groups: mc.groups,
        values: mc.values,
    })
}

/// Planted-province synthetic dataset for validation.
#[pyfunction]
#[pyo3(signature = (n_provinces = 3, n_samples = 150, n_asvs = 300, n_grid = 2000, noise = 0.003, seed = 0))]
fn generate_synthetic(
    n_provinces: usize,
    n_samples: usize,
    n_asvs: usize,
    n_grid: usize,
    noise: f64,
    seed: u64,
) -> PyResult<SyntheticData> {
    let spec = report::SyntheticSpec {
        n_provinces,
        n_samples,
        n_asvs,
        n_grid,
        noise,
        seed,
    };
    let data = report::generate_synthetic(&spec).map_err(to_py)?;
    Ok(SyntheticData {
        table: CompositionTable { inner: data.table },
        meta: data.meta.into_iter().map(|m| SampleMeta { inner: m }).collect(),
        grid: GridSpec { inner: data.grid },
        sample_truth: data.sample_truth,
        grid_truth: data.grid_truth,
    })
}

/// Classical MDS embedding of a distance matrix.
#[pyfunction]
#[pyo3(signature = (dist, dims = 2))]
fn classical_mds(dist: &DistanceMatrix, dims: usize) -> PyResult<Vec<Vec<f64>>> {
    numerics::classical_mds(&dist.inner, dims).map_err(to_py)
}

/// Minimum-cost assignment; returns `perm` with `perm[row] = column`.
#[pyfunction]
fn hungarian(cost: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
    numerics::hungarian(&cost).map_err(to_py)
}

/// Spectral norm of a symmetric matrix (power iteration).
#[pyfunction]
fn operator_norm(rows: Vec<Vec<f64>>) -> PyResult<f64> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    numerics::operator_norm(&rows.into_iter().flatten().collect::<Vec<f64>>(), n).map_err(to_py)
}

#[pymodule]
fn bioprovince_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<CompositionTable>()?;
    m.add_class::<SampleMeta>()?;
    m.add_class::<GridSpec>()?;
    m.add_class::<DistanceMatrix>()?;
    m.add_class::<ClusterResult>()?;
    m.add_class::<ProvinceMap>()?;
    m.add_class::<StabilityMap>()?;
    m.add_class::<RTuningResult>()?;
    m.add_class::<AlphaCurve>()?;
    m.add_class::<KCurve>()?;
    m.add_class::<CrossTab>()?;
    m.add_class::<MeanComposition>()?;
    m.add_class::<SyntheticData>()?;
    m.add_function(wrap_pyfunction!(load_samples, m)?)?;
    m.add_function(wrap_pyfunction!(load_grid, m)?)?;
    m.add_function(wrap_pyfunction!(aitchison_distance, m)?)?;
    m.add_function(wrap_pyfunction!(bio_distance_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(spatial_distance_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(mix_distance_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(cluster, m)?)?;
    m.add_function(wrap_pyfunction!(within_cluster_distance, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(tune_r, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_saturation_curve, m)?)?;
    m.add_function(wrap_pyfunction!(k_elbow_curve, m)?)?;
    m.add_function(wrap_pyfunction!(knn_k_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(run_stability, m)?)?;
    m.add_function(wrap_pyfunction!(cluster_source_homogeneity, m)?)?;
    m.add_function(wrap_pyfunction!(cross_tabulate, m)?)?;
    m.add_function(wrap_pyfunction!(mean_cluster_composition, m)?)?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(classical_mds, m)?)?;
    m.add_function(wrap_pyfunction!(hungarian, m)?)?;
    m.add_function(wrap_pyfunction!(operator_norm, m)?)?;
    Ok(())
}
