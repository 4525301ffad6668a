//! Data-driven hyperparameter selection, in the order `r`, then `alpha`,
//! then `K`, plus the recommended range for the k-NN neighborhood size.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::biocluster::{cut_with_labels, linkage, within_cluster_distance};
use crate::data::{CompositionTable, SampleMeta};
use crate::distance::{clr_rows, euclidean, spatial_distance, spectral_rescale};
use crate::error::{Error, Result};
use crate::numerics::{
    classical_mds, convex_hull_fraction, linear_regression, DistanceMatrix, RegressionFit,
};
use crate::seeding::derive_seed;

/// Which weights enter the cross-cruise slope averages: qualifying pair
/// counts (the default) or cruise sample counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlopeWeighting {
    #[default]
    PairCount,
    SampleCount,
}

/// Options for [`tune_r`]; the defaults are the windows and significance
/// level used throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RTuningOptions {
    /// Max |latitude difference| of a qualifying pair, degrees.
    pub lat_window: f64,
    /// Max |depth difference| of a qualifying pair, meters.
    pub depth_window: f64,
    /// Two-sided p-value threshold for a slope to count as significant.
    pub significance: f64,
    pub weighting: SlopeWeighting,
}

impl Default for RTuningOptions {
    fn default() -> Self {
        RTuningOptions {
            lat_window: 3.0,
            depth_window: 10.0,
            significance: 0.05,
            weighting: SlopeWeighting::PairCount,
        }
    }
}

/// Distance-decay regressions for one cruise.
#[derive(Debug, Clone)]
pub struct CruiseFit {
    pub cruise: String,
    /// Aitchison distance regressed on |latitude difference|.
    pub lat_fit: Option<RegressionFit>,
    /// Aitchison distance regressed on |depth difference|.
    pub depth_fit: Option<RegressionFit>,
    pub n_pairs_lat: usize,
    pub n_pairs_depth: usize,
    /// Samples in the cruise (the alternative weighting).
    pub n_samples: usize,
}

/// Result of [`tune_r`]: the per-cruise fits and the pooled slopes.
#[derive(Debug, Clone)]
pub struct RTuningResult {
    pub per_cruise: Vec<CruiseFit>,
    /// Weighted mean of the significant positive latitude slopes.
    pub b1: f64,
    /// Weighted mean of the significant positive depth slopes.
    pub b2: f64,
    /// `b1 / b2`: meters of depth per degree of latitude.
    pub r: f64,
}

/// Estimate the latitude-to-depth scale `r` from distance decay.
///
/// For each cruise, all sample pairs within the latitude and depth windows
/// are collected and the Aitchison distance is regressed separately on the
/// latitude and depth differences. Slopes that are significantly positive are
/// averaged across cruises (weights per [`SlopeWeighting`]) and `r` is the
/// ratio of the averaged latitude slope to the averaged depth slope.
pub fn tune_r(
    table: &CompositionTable,
    meta: &[SampleMeta],
    opts: &RTuningOptions,
) -> Result<RTuningResult> {
    if meta.len() != table.n_samples() {
        return Err(Error::Data(format!(
            "meta has {} rows for {} samples",
            meta.len(),
            table.n_samples()
        )));
    }
    if !(opts.lat_window > 0.0) || !(opts.depth_window > 0.0) {
        return Err(Error::Config("windows must be positive".into()));
    }
    if !(opts.significance > 0.0 && opts.significance < 1.0) {
        return Err(Error::Config("significance must be in (0, 1)".into()));
    }

    let clr = clr_rows(table);

    let mut cruises: Vec<String> = meta.iter().map(|m| m.cruise.clone()).collect();
    cruises.sort();
    cruises.dedup();

    let mut per_cruise = Vec::new();
    let mut any_pairs = false;
    for cruise in &cruises {
        let idx: Vec<usize> = (0..meta.len()).filter(|&i| &meta[i].cruise == cruise).collect();
        // qualifying pairs, canonically sorted so the fit does not depend on
        // input sample order
        let mut pairs: Vec<(f64, f64, f64)> = Vec::new(); // (dlat, ddepth, dbio)
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                let dlat = (meta[i].latitude - meta[j].latitude).abs();
                let ddepth = (meta[i].depth - meta[j].depth).abs();
                if dlat <= opts.lat_window && ddepth <= opts.depth_window {
                    pairs.push((dlat, ddepth, euclidean(&clr[i], &clr[j])));
                }
            }
        }
        pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n_pairs = pairs.len();
        if n_pairs >= 3 {
            any_pairs = true;
        }

        let xs_lat: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let xs_depth: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.2).collect();
        let lat_fit = if n_pairs >= 3 {
            linear_regression(&xs_lat, &ys).ok()
        } else {
            None
        };
        let depth_fit = if n_pairs >= 3 {
            linear_regression(&xs_depth, &ys).ok()
        } else {
            None
        };
        per_cruise.push(CruiseFit {
            cruise: cruise.clone(),
            n_pairs_lat: lat_fit.as_ref().map_or(0, |_| n_pairs),
            n_pairs_depth: depth_fit.as_ref().map_or(0, |_| n_pairs),
            n_samples: idx.len(),
            lat_fit,
            depth_fit,
        });
    }
    if !any_pairs {
        return Err(Error::Data(format!(
            "fewer than 3 qualifying pairs in every cruise (windows {} deg / {} m)",
            opts.lat_window, opts.depth_window
        )));
    }

    let pooled = |pick: fn(&CruiseFit) -> (&Option<RegressionFit>, usize), name: &str| -> Result<f64> {
        let mut num = 0.0;
        let mut den = 0.0;
        for fit in &per_cruise {
            let (reg, n_pairs) = pick(fit);
            if let Some(reg) = reg {
                if reg.slope > 0.0 && reg.p_value < opts.significance {
                    let w = match opts.weighting {
                        SlopeWeighting::PairCount => n_pairs as f64,
                        SlopeWeighting::SampleCount => fit.n_samples as f64,
                    };
                    num += w * reg.slope;
                    den += w;
                }
            }
        }
        if den == 0.0 {
            return Err(Error::Data(format!(
                "no cruise yields a significant positive {name} slope"
            )));
        }
        Ok(num / den)
    };
    let b1 = pooled(|f| (&f.lat_fit, f.n_pairs_lat), "latitude")?;
    let b2 = pooled(|f| (&f.depth_fit, f.n_pairs_depth), "depth")?;

    Ok(RTuningResult {
        per_cruise,
        b1,
        b2,
        r: b1 / b2,
    })
}

/// Saturation scores over a grid of `alpha` values.
#[derive(Debug, Clone)]
pub struct AlphaCurve {
    pub alphas: Vec<f64>,
    /// `scores[a][l]`: non-null score of replicate `l` at `alphas[a]`.
    pub scores: Vec<Vec<f64>>,
    /// Same layout for the null scores.
    pub null_scores: Vec<Vec<f64>>,
    /// Largest grid alpha whose 95% score and null-score bands still overlap.
    pub suggested_alpha: Option<f64>,
}

/// Compute the MDS/convex-hull saturation score and its null version on a
/// grid of `alpha` values, `l_replicates` times.
///
/// Per replicate, four synthetic samples are appended: their compositions are
/// drawn uniformly (without replacement) from the real samples, and their
/// spatial positions sit at the corners of the latitude-depth bounding
/// rectangle (non-null score) or at the positions of four random samples
/// (null score). The score is the fraction of the real points that fall
/// inside the convex hull of the four synthetic points in 2-D MDS space.
pub fn alpha_saturation_curve(
    table: &CompositionTable,
    meta: &[SampleMeta],
    r: f64,
    alphas: &[f64],
    l_replicates: usize,
    seed: u64,
) -> Result<AlphaCurve> {
    let n = table.n_samples();
    if n < 8 {
        return Err(Error::Data(format!(
            "alpha tuning needs at least 8 samples, got {n}"
        )));
    }
    if meta.len() != n {
        return Err(Error::Data(format!("meta has {} rows for {n} samples", meta.len())));
    }
    if alphas.is_empty() {
        return Err(Error::Config("empty alpha grid".into()));
    }
    if alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::Config("alphas must lie in [0, 1]".into()));
    }
    if l_replicates < 1 {
        return Err(Error::Config("need at least one replicate".into()));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Config(format!("r must be positive, got {r}")));
    }

    let clr = clr_rows(table);
    let pos: Vec<(f64, f64)> = meta.iter().map(|m| (m.latitude, m.depth)).collect();
    let (lat_lo, lat_hi) = min_max(pos.iter().map(|p| p.0));
    let (dep_lo, dep_hi) = min_max(pos.iter().map(|p| p.1));
    let rect = [
        (lat_lo, dep_lo),
        (lat_hi, dep_lo),
        (lat_lo, dep_hi),
        (lat_hi, dep_hi),
    ];

    // per replicate: scores then null scores, one value per alpha
    let per_replicate: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..l_replicates)
        .into_par_iter()
        .map(|l| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, l as u64));
            // fixed draw order: non-null compositions, null positions,
            // null compositions
            let comp_idx = rand::seq::index::sample(&mut rng, n, 4).into_vec();
            let null_pos_idx = rand::seq::index::sample(&mut rng, n, 4).into_vec();
            let null_comp_idx = rand::seq::index::sample(&mut rng, n, 4).into_vec();

            let non_null = replicate_scores(&clr, &pos, &comp_idx, &rect, r, alphas)?;
            let null_rect = [
                pos[null_pos_idx[0]],
                pos[null_pos_idx[1]],
                pos[null_pos_idx[2]],
                pos[null_pos_idx[3]],
            ];
            let null = replicate_scores(&clr, &pos, &null_comp_idx, &null_rect, r, alphas)?;
            Ok((non_null, null))
        })
        .collect();

    let mut scores = vec![vec![0.0; l_replicates]; alphas.len()];
    let mut null_scores = vec![vec![0.0; l_replicates]; alphas.len()];
    for (l, rep) in per_replicate.into_iter().enumerate() {
        let (s, ns) = rep.map_err(|e| Error::Numerics(format!("replicate {l}: {e}")))?;
        for a in 0..alphas.len() {
            scores[a][l] = s[a];
            null_scores[a][l] = ns[a];
        }
    }

    let mut suggested_alpha = None;
    for (a, &alpha) in alphas.iter().enumerate() {
        let band = quantile_band(&scores[a]);
        let null_band = quantile_band(&null_scores[a]);
        let overlap = band.0 <= null_band.1 && null_band.0 <= band.1;
        if overlap && suggested_alpha.map_or(true, |best| alpha > best) {
            suggested_alpha = Some(alpha);
        }
    }

    Ok(AlphaCurve {
        alphas: alphas.to_vec(),
        scores,
        null_scores,
        suggested_alpha,
    })
}

/// One augmented run: append 4 synthetic rows (CLR of the chosen
/// compositions, positions at `corners`), then score every alpha.
fn replicate_scores(
    clr: &[Vec<f64>],
    pos: &[(f64, f64)],
    comp_idx: &[usize],
    corners: &[(f64, f64); 4],
    r: f64,
    alphas: &[f64],
) -> Result<Vec<f64>> {
    let n = clr.len();
    let m = n + 4;
    let mut aug_clr: Vec<&[f64]> = clr.iter().map(|v| v.as_slice()).collect();
    for &c in comp_idx {
        aug_clr.push(clr[c].as_slice());
    }
    let mut aug_pos: Vec<(f64, f64)> = pos.to_vec();
    aug_pos.extend_from_slice(corners);

    let mut bio = vec![0.0; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let v = euclidean(aug_clr[i], aug_clr[j]);
            bio[i * m + j] = v;
            bio[j * m + i] = v;
        }
    }
    let mut spatial = vec![0.0; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let v = spatial_distance(aug_pos[i], aug_pos[j], r);
            spatial[i * m + j] = v;
            spatial[j * m + i] = v;
        }
    }
    let h_bio = spectral_rescale(&DistanceMatrix::new(m, bio)?)?;
    let h_spatial = spectral_rescale(&DistanceMatrix::new(m, spatial)?)?;

    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let mixed: Vec<f64> = h_bio
            .as_slice()
            .iter()
            .zip(h_spatial.as_slice())
            .map(|(&b, &s)| (1.0 - alpha) * b + alpha * s)
            .collect();
        let coords = classical_mds(&DistanceMatrix::new(m, mixed)?, 2)?;
        let real: Vec<[f64; 2]> = coords[..n].iter().map(|c| [c[0], c[1]]).collect();
        let anchors = [
            [coords[n][0], coords[n][1]],
            [coords[n + 1][0], coords[n + 1][1]],
            [coords[n + 2][0], coords[n + 2][1]],
            [coords[n + 3][0], coords[n + 3][1]],
        ];
        out.push(convex_hull_fraction(&real, &anchors).fraction);
    }
    Ok(out)
}

/// Within-cluster distance along the dendrogram's own cuts.
#[derive(Debug, Clone, PartialEq)]
pub struct KCurve {
    pub ks: Vec<usize>,
    pub wcd: Vec<f64>,
    /// K at the sharpest elbow: the largest discrete second difference of
    /// the curve on a log scale. The log scale is what makes the rule land
    /// where the relative improvement collapses; on the raw curve the first
    /// cut always dominates. Reported as a suggestion only.
    pub suggested_k: Option<usize>,
}

/// Evaluate the within-cluster distance at every candidate `K` by cutting a
/// single Ward dendrogram of `dist_alpha`.
pub fn k_elbow_curve(dist_alpha: &DistanceMatrix, ks: &[usize]) -> Result<KCurve> {
    let n = dist_alpha.size();
    if ks.is_empty() {
        return Err(Error::Config("empty K grid".into()));
    }
    for &k in ks {
        if k < 1 || k > n {
            return Err(Error::Config(format!("K = {k} outside 1..={n}")));
        }
    }
    let mut ks: Vec<usize> = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();

    let dendrogram = linkage(dist_alpha);
    let mut wcd = Vec::with_capacity(ks.len());
    for &k in &ks {
        let memberships = cut_with_labels(&dendrogram, k, None)?;
        wcd.push(within_cluster_distance(dist_alpha, &memberships)?);
    }

    let mut suggested_k = None;
    if ks.len() >= 3 {
        let mut best = f64::NEG_INFINITY;
        for i in 1..ks.len() - 1 {
            if wcd[i - 1] <= 0.0 || wcd[i] <= 0.0 || wcd[i + 1] <= 0.0 {
                continue;
            }
            let second_diff = wcd[i - 1].ln() - 2.0 * wcd[i].ln() + wcd[i + 1].ln();
            if second_diff > best {
                best = second_diff;
                suggested_k = Some(ks[i]);
            }
        }
    }
    Ok(KCurve {
        ks,
        wcd,
        suggested_k,
    })
}

/// The recommended inclusive range for the k-NN neighborhood size; values
/// outside it draw a warning, not an error.
pub fn knn_k_bounds() -> (usize, usize) {
    (1, 5)
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

/// Balanced 95% band: the 2.5% and 97.5% empirical quantiles (linear
/// interpolation between order statistics).
fn quantile_band(values: &[f64]) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (quantile(&sorted, 0.025), quantile(&sorted, 0.975))
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.len() == 1 {
        return sorted[0];
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biocluster;
    use crate::data::CompositionTable;
    use rand::Rng;

    #[test]
    fn k_bounds_are_one_to_five() {
        assert_eq!(knn_k_bounds(), (1, 5));
    }

    #[test]
    fn quantiles_interpolate() {
        let vals: Vec<f64> = (0..=100).map(|v| v as f64).collect();
        let (lo, hi) = quantile_band(&vals);
        assert!((lo - 2.5).abs() < 1e-12);
        assert!((hi - 97.5).abs() < 1e-12);
    }

    #[test]
    fn elbow_on_planted_blobs() {
        // 3 well-separated 1-D blobs of 10 points each
        let mut pts = Vec::new();
        for c in 0..3 {
            for i in 0..10 {
                pts.push(c as f64 * 50.0 + i as f64 * 0.5);
            }
        }
        let d = DistanceMatrix::from_fn(pts.len(), |i, j| (pts[i] - pts[j]).abs()).unwrap();
        let ks: Vec<usize> = (1..=8).collect();
        let curve = k_elbow_curve(&d, &ks).unwrap();
        assert_eq!(curve.suggested_k, Some(3));
        // nonincreasing along the dendrogram's own cuts
        for w in curve.wcd.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
    }

    #[test]
    fn wcd_at_k_equals_n_is_zero() {
        let pts: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let d = DistanceMatrix::from_fn(6, |i, j| (pts[i] - pts[j]).abs()).unwrap();
        let curve = k_elbow_curve(&d, &[6]).unwrap();
        assert_eq!(curve.wcd, vec![0.0]);
        assert_eq!(curve.suggested_k, None);
    }

    #[test]
    fn k_grid_validation() {
        let d = DistanceMatrix::new(3, vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.5, 2.0, 1.5, 0.0]).unwrap();
        assert!(k_elbow_curve(&d, &[]).is_err());
        assert!(k_elbow_curve(&d, &[4]).is_err());
        assert!(k_elbow_curve(&d, &[0]).is_err());
    }

    /// Balanced planted-slope generator: a 9x9 lattice of positions inside
    /// one latitude/depth window (all pairs qualify), with orthogonal CLR
    /// drift directions so the Aitchison distance is
    /// `sqrt((b1 dlat)^2 + (b2 ddepth)^2)` plus noise. The lattice spans are
    /// chosen so both terms have the same scale; the marginal regressions
    /// then attenuate both slopes identically and their ratio stays `b1/b2`.
    fn planted_cruise(
        rng: &mut impl Rng,
        b1: f64,
        b2: f64,
        noise_frac: f64,
        cruise: &str,
        lat0: f64,
    ) -> (Vec<Vec<f64>>, Vec<SampleMeta>) {
        let lat_span = 10.0 * b2 / b1; // balances b1*lat against b2*depth
        let n_side = 9;
        let mut positions = Vec::new();
        for a in 0..n_side {
            for b in 0..n_side {
                let lat = lat0 + lat_span * a as f64 / (n_side - 1) as f64;
                let depth = 10.0 * b as f64 / (n_side - 1) as f64;
                positions.push((lat, depth));
            }
        }
        drifted_samples(rng, &positions, b1, b2, noise_frac, cruise)
    }

    /// Latitude transect with depths alternating between 0 and 10 m. The
    /// depth difference of a pair is then anti-correlated with its latitude
    /// difference, so with latitude-only drift the depth regression has a
    /// significantly negative slope.
    fn zigzag_cruise(
        rng: &mut impl Rng,
        b1: f64,
        noise_frac: f64,
        cruise: &str,
        lat0: f64,
    ) -> (Vec<Vec<f64>>, Vec<SampleMeta>) {
        let positions: Vec<(f64, f64)> = (0..40)
            .map(|i| (lat0 + i as f64 * 0.05, if i % 2 == 0 { 0.0 } else { 10.0 }))
            .collect();
        drifted_samples(rng, &positions, b1, 0.0, noise_frac, cruise)
    }

    fn drifted_samples(
        rng: &mut impl Rng,
        positions: &[(f64, f64)],
        b1: f64,
        b2: f64,
        noise_frac: f64,
        cruise: &str,
    ) -> (Vec<Vec<f64>>, Vec<SampleMeta>) {
        let d = 52;
        let half = d / 2;
        let mut u = vec![0.0; d];
        let mut w = vec![0.0; d];
        for i in 0..half {
            u[i] = if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        for i in half..d {
            w[i] = if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        let norm = (half as f64).sqrt();
        // noise scale: noise_frac of the mean noiseless pair distance
        let mut mean_sig = 0.0;
        let mut count = 0usize;
        for i in 0..positions.len() {
            for j in (i + 1)..positions.len() {
                let dl = (positions[i].0 - positions[j].0).abs();
                let dd = (positions[i].1 - positions[j].1).abs();
                mean_sig += ((b1 * dl).powi(2) + (b2 * dd).powi(2)).sqrt();
                count += 1;
            }
        }
        mean_sig /= count as f64;
        let sigma = noise_frac * mean_sig / (2.0 * d as f64).sqrt();

        let mut rows = Vec::new();
        let mut meta = Vec::new();
        for (sid, &(lat, depth)) in positions.iter().enumerate() {
            let logs: Vec<f64> = (0..d)
                .map(|l| {
                    b1 * lat * u[l] / norm
                        + b2 * depth * w[l] / norm
                        + sigma * normal_sample(rng)
                })
                .collect();
            let raw: Vec<f64> = logs.iter().map(|v| v.exp()).collect();
            let sum: f64 = raw.iter().sum();
            rows.push(raw.into_iter().map(|v| v / sum).collect());
            meta.push(SampleMeta {
                sample_id: format!("{cruise}-{sid}"),
                latitude: lat,
                depth,
                temperature: 20.0,
                salinity: 35.0,
                cruise: cruise.to_string(),
                external_province: None,
            });
        }
        (rows, meta)
    }

    fn normal_sample(rng: &mut impl Rng) -> f64 {
        // Box-Muller
        let u1: f64 = rng.random::<f64>().max(1e-12);
        let u2: f64 = rng.random::<f64>();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn table_of(rows: &[Vec<f64>], meta: &[SampleMeta]) -> CompositionTable {
        CompositionTable::new(
            meta.iter().map(|m| m.sample_id.clone()).collect(),
            (0..rows[0].len()).map(|j| format!("a{j}")).collect(),
            rows.iter().flatten().cloned().collect(),
        )
        .unwrap()
    }

    #[test]
    fn recovers_planted_slope_ratio() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
        let (rows, meta) = planted_cruise(&mut rng, 0.06, 0.002, 0.10, "c1", 0.0);
        let table = table_of(&rows, &meta);
        let result = tune_r(&table, &meta, &RTuningOptions::default()).unwrap();
        let true_r: f64 = 30.0;
        assert!(
            (result.r - true_r).abs() / true_r < 0.05,
            "recovered r = {} (b1 = {}, b2 = {})",
            result.r,
            result.b1,
            result.b2
        );
    }

    #[test]
    fn weights_pool_across_cruises() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let (mut rows, mut meta) = planted_cruise(&mut rng, 0.06, 0.002, 0.10, "c1", 0.0);
        let (rows2, meta2) = planted_cruise(&mut rng, 0.06, 0.002, 0.10, "c2", 20.0);
        rows.extend(rows2);
        meta.extend(meta2);
        let table = table_of(&rows, &meta);
        let result = tune_r(&table, &meta, &RTuningOptions::default()).unwrap();
        assert_eq!(result.per_cruise.len(), 2);
        assert!((result.r - 30.0).abs() / 30.0 < 0.05, "r = {}", result.r);
        // hand-check the weighted mean of the latitude slopes
        let mut num = 0.0;
        let mut den = 0.0;
        for f in &result.per_cruise {
            let reg = f.lat_fit.as_ref().unwrap();
            assert!(reg.slope > 0.0 && reg.p_value < 0.05);
            num += f.n_pairs_lat as f64 * reg.slope;
            den += f.n_pairs_lat as f64;
        }
        assert!((result.b1 - num / den).abs() < 1e-12);
    }

    #[test]
    fn cruise_with_negative_depth_slope_is_excluded() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        // c1 planted normally; c2 has zig-zag depths, which anti-correlate
        // the depth difference with the latitude difference and produce a
        // significantly negative depth slope
        let (mut rows, mut meta) = planted_cruise(&mut rng, 0.06, 0.002, 0.10, "c1", 0.0);
        let (rows2, meta2) = zigzag_cruise(&mut rng, 0.06, 0.02, "c2", 30.0);
        rows.extend(rows2);
        meta.extend(meta2);
        let table = table_of(&rows, &meta);
        let result = tune_r(&table, &meta, &RTuningOptions::default()).unwrap();
        let c2 = result.per_cruise.iter().find(|f| f.cruise == "c2").unwrap();
        let c2_depth = c2.depth_fit.as_ref().unwrap();
        assert!(c2_depth.slope < 0.0, "zig-zag cruise slope {}", c2_depth.slope);
        // b2 must come from c1 alone
        let c1 = result.per_cruise.iter().find(|f| f.cruise == "c1").unwrap();
        let want_b2 = c1.depth_fit.as_ref().unwrap().slope;
        assert!((result.b2 - want_b2).abs() < 1e-12, "excluded cruise leaked in");
    }

    #[test]
    fn tune_r_invariant_to_sample_order() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(202);
        let (rows, meta) = planted_cruise(&mut rng, 0.05, 0.003, 0.10, "c1", 5.0);
        let table = table_of(&rows, &meta);
        let base = tune_r(&table, &meta, &RTuningOptions::default()).unwrap();

        // reverse the sample order
        let rev_rows: Vec<Vec<f64>> = rows.iter().rev().cloned().collect();
        let rev_meta: Vec<SampleMeta> = meta.iter().rev().cloned().collect();
        let rev_table = table_of(&rev_rows, &rev_meta);
        let rev = tune_r(&rev_table, &rev_meta, &RTuningOptions::default()).unwrap();
        assert!((base.r - rev.r).abs() < 1e-9, "{} vs {}", base.r, rev.r);
    }

    #[test]
    fn too_few_pairs_everywhere_is_an_error() {
        // samples spread so far apart that no pair qualifies
        let rows = vec![
            vec![0.2, 0.3, 0.5],
            vec![0.1, 0.6, 0.3],
            vec![0.25, 0.25, 0.5],
        ];
        let meta: Vec<SampleMeta> = (0..3)
            .map(|i| SampleMeta {
                sample_id: format!("s{i}"),
                latitude: i as f64 * 30.0,
                depth: i as f64 * 100.0,
                temperature: 20.0,
                salinity: 35.0,
                cruise: "c1".into(),
                external_province: None,
            })
            .collect();
        let table = CompositionTable::new(
            meta.iter().map(|m| m.sample_id.clone()).collect(),
            vec!["a".into(), "b".into(), "c".into()],
            rows.into_iter().flatten().collect(),
        )
        .unwrap();
        assert!(tune_r(&table, &meta, &RTuningOptions::default()).is_err());
    }

    fn random_dataset(n: usize, d: usize, seed: u64) -> (CompositionTable, Vec<SampleMeta>) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut meta = Vec::new();
        for i in 0..n {
            let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 0.05).collect();
            let sum: f64 = raw.iter().sum();
            rows.push(raw.into_iter().map(|v| v / sum).collect::<Vec<f64>>());
            meta.push(SampleMeta {
                sample_id: format!("s{i}"),
                latitude: rng.random::<f64>() * 40.0,
                depth: rng.random::<f64>() * 150.0,
                temperature: 15.0 + rng.random::<f64>() * 10.0,
                salinity: 33.0 + rng.random::<f64>() * 3.0,
                cruise: "c1".into(),
                external_province: None,
            });
        }
        (table_of(&rows, &meta), meta)
    }

    #[test]
    fn alpha_curve_scores_are_bounded_and_reproducible() {
        let (table, meta) = random_dataset(12, 10, 5);
        let alphas = [0.0, 0.5, 1.0];
        let a = alpha_saturation_curve(&table, &meta, 20.0, &alphas, 5, 77).unwrap();
        let b = alpha_saturation_curve(&table, &meta, 20.0, &alphas, 5, 77).unwrap();
        assert_eq!(a.scores, b.scores);
        assert_eq!(a.null_scores, b.null_scores);
        for col in a.scores.iter().chain(a.null_scores.iter()) {
            for &v in col {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn alpha_curve_validates_inputs() {
        let (table, meta) = random_dataset(12, 10, 6);
        assert!(alpha_saturation_curve(&table, &meta, 20.0, &[], 5, 1).is_err());
        assert!(alpha_saturation_curve(&table, &meta, 20.0, &[0.5], 0, 1).is_err());
        assert!(alpha_saturation_curve(&table, &meta, 20.0, &[1.5], 5, 1).is_err());
        let (small_table, small_meta) = random_dataset(5, 10, 7);
        assert!(alpha_saturation_curve(&small_table, &small_meta, 20.0, &[0.5], 5, 1).is_err());
    }

    #[test]
    fn strongly_spatial_data_saturates_at_alpha_one() {
        let (table, meta) = random_dataset(20, 10, 8);
        let curve = alpha_saturation_curve(&table, &meta, 1.0, &[1.0], 10, 3).unwrap();
        // at alpha = 1 the MDS plane reproduces the spatial rectangle, so all
        // real points are inside the corners' hull
        let median = {
            let mut v = curve.scores[0].clone();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v[v.len() / 2]
        };
        assert!(median > 0.95, "median non-null score {median}");
    }

    #[test]
    fn elbow_curve_matches_biocluster_cuts() {
        let pts: Vec<f64> = (0..12).map(|i| ((i * 31) % 17) as f64).collect();
        let d = DistanceMatrix::from_fn(12, |i, j| (pts[i] - pts[j]).abs()).unwrap();
        let curve = k_elbow_curve(&d, &[2, 4, 6]).unwrap();
        for (pos, &k) in curve.ks.iter().enumerate() {
            let res = biocluster::cluster(&d, k, None).unwrap();
            let wcd = within_cluster_distance(&d, &res.memberships).unwrap();
            assert!((curve.wcd[pos] - wcd).abs() < 1e-12);
        }
    }
}
