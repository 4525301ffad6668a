//! Shared test oracles, independent of the library's implementation paths:
//! a recompute-from-scratch Ward agglomerator, a brute-force assignment
//! minimizer, the adjusted Rand index, a Mann-Whitney U test, and planted
//! data generators.

#![allow(dead_code)]

use bioprovince::data::{CompositionTable, SampleMeta};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Random strictly positive composition of length `d` (closure of exp of
/// normals).
pub fn random_composition(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| normal(rng).exp()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

// ---------------------------------------------------------------------------
// naive Ward oracle

/// One oracle merge: the two member sets joined and the Ward height.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMerge {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub height: f64,
}

/// Recompute-from-scratch Ward agglomeration over a full distance matrix.
///
/// At every step the Ward cost of every cluster pair is evaluated directly
/// from the original squared distances via
/// `D2(A,B) = 2ab/(a+b) * (S_AB/(ab) - S_AA/(2a^2) - S_BB/(2b^2))`,
/// with no incremental updates. Ties break on the smallest member pair.
pub fn naive_ward(dist: &[Vec<f64>]) -> Vec<OracleMerge> {
    let n = dist.len();
    let d2 = |i: usize, j: usize| dist[i][j] * dist[i][j];
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut merges = Vec::new();

    let pair_cost = |a: &[usize], b: &[usize]| -> f64 {
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let mut s_ab = 0.0;
        for &i in a {
            for &j in b {
                s_ab += d2(i, j);
            }
        }
        let mut s_aa = 0.0;
        for &i in a {
            for &j in a {
                s_aa += d2(i, j);
            }
        }
        let mut s_bb = 0.0;
        for &i in b {
            for &j in b {
                s_bb += d2(i, j);
            }
        }
        2.0 * na * nb / (na + nb) * (s_ab / (na * nb) - s_aa / (2.0 * na * na) - s_bb / (2.0 * nb * nb))
    };

    while clusters.len() > 1 {
        let mut best = f64::INFINITY;
        let mut pair = (0usize, 1usize);
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let cost = pair_cost(&clusters[a], &clusters[b]);
                if cost < best {
                    best = cost;
                    pair = (a, b);
                }
            }
        }
        let right = clusters.remove(pair.1);
        let left = clusters.remove(pair.0);
        merges.push(OracleMerge {
            left: left.clone(),
            right: right.clone(),
            height: best.max(0.0).sqrt(),
        });
        let mut merged = left;
        merged.extend(right);
        merged.sort_unstable();
        // keep clusters ordered by smallest member so the pair scan is the
        // smallest-(i1,i2) tie-break
        let pos = clusters
            .binary_search_by(|c| c[0].cmp(&merged[0]))
            .unwrap_err();
        clusters.insert(pos, merged);
    }
    merges
}

/// Oracle flat cut: member sets after the first `n - k` naive merges.
pub fn naive_ward_cut(dist: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    let n = dist.len();
    let merges = naive_ward(dist);
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for m in merges.iter().take(n - k) {
        let mut merged = m.left.clone();
        merged.extend(m.right.clone());
        merged.sort_unstable();
        clusters.retain(|c| c[0] != m.left[0] && c[0] != m.right[0]);
        clusters.push(merged);
        clusters.sort_by_key(|c| c[0]);
    }
    clusters
}

// ---------------------------------------------------------------------------
// assignment brute force

/// Exhaustive minimum assignment cost of a square matrix.
pub fn brute_force_assignment(cost: &[Vec<f64>]) -> f64 {
    let k = cost.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = f64::INFINITY;
    fn recurse(cost: &[Vec<f64>], perm: &mut Vec<usize>, start: usize, best: &mut f64) {
        if start == perm.len() {
            let total: f64 = (0..perm.len()).map(|i| cost[i][perm[i]]).sum();
            if total < *best {
                *best = total;
            }
            return;
        }
        for i in start..perm.len() {
            perm.swap(start, i);
            recurse(cost, perm, start + 1, best);
            perm.swap(start, i);
        }
    }
    recurse(cost, &mut perm, 0, &mut best);
    best
}

// ---------------------------------------------------------------------------
// adjusted Rand index

/// Chance-corrected agreement between two partitions; 1.0 means identical
/// up to relabeling.
pub fn adjusted_rand_index(a: &[u32], b: &[u32]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let labels_a: Vec<u32> = {
        let mut v = a.to_vec();
        v.sort_unstable();
        v.dedup();
        v
    };
    let labels_b: Vec<u32> = {
        let mut v = b.to_vec();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut table = vec![vec![0usize; labels_b.len()]; labels_a.len()];
    for i in 0..n {
        let ra = labels_a.binary_search(&a[i]).unwrap();
        let cb = labels_b.binary_search(&b[i]).unwrap();
        table[ra][cb] += 1;
    }
    let choose2 = |m: usize| (m * m.saturating_sub(1)) as f64 / 2.0;
    let sum_cells: f64 = table.iter().flatten().map(|&m| choose2(m)).sum();
    let sum_rows: f64 = table.iter().map(|r| choose2(r.iter().sum())).sum();
    let sum_cols: f64 = (0..labels_b.len())
        .map(|c| choose2(table.iter().map(|r| r[c]).sum()))
        .sum();
    let total = choose2(n);
    let expected = sum_rows * sum_cols / total;
    let max_index = (sum_rows + sum_cols) / 2.0;
    if (max_index - expected).abs() < 1e-12 {
        return 1.0; // degenerate: both partitions trivial
    }
    (sum_cells - expected) / (max_index - expected)
}

// ---------------------------------------------------------------------------
// Mann-Whitney U (normal approximation with tie correction, two-sided)

/// Returns |z|; compare against the two-sided normal quantile for the
/// chosen level (2.576 at 1%).
pub fn mann_whitney_abs_z(x: &[f64], y: &[f64]) -> f64 {
    let n1 = x.len() as f64;
    let n2 = y.len() as f64;
    let mut all: Vec<(f64, usize)> = x
        .iter()
        .map(|&v| (v, 0usize))
        .chain(y.iter().map(|&v| (v, 1usize)))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let n = all.len();
    let mut ranks = vec![0.0; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for r in ranks.iter_mut().take(j + 1).skip(i) {
            *r = rank;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let r1: f64 = all
        .iter()
        .zip(&ranks)
        .filter(|((_, grp), _)| *grp == 0)
        .map(|(_, r)| r)
        .sum();
    let u1 = r1 - n1 * (n1 + 1.0) / 2.0;
    let mu = n1 * n2 / 2.0;
    let nf = n as f64;
    let sigma2 = n1 * n2 / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    if sigma2 <= 0.0 {
        return 0.0; // all observations identical
    }
    // continuity correction toward the mean
    let diff = u1 - mu;
    let corrected = if diff > 0.5 {
        diff - 0.5
    } else if diff < -0.5 {
        diff + 0.5
    } else {
        0.0
    };
    (corrected / sigma2.sqrt()).abs()
}

// ---------------------------------------------------------------------------
// planted-slope generator (the A-series r-recovery fixture)

/// Balanced 9x9 lattice inside one 3 deg x 10 m window with orthogonal CLR
/// drift, so the pairwise Aitchison distance is
/// `sqrt((b1 dlat)^2 + (b2 ddepth)^2)` plus Gaussian noise scaled to
/// `noise_frac` of the mean noiseless pair distance. All 3240 pairs qualify.
pub fn planted_slope_dataset(
    seed: u64,
    b1: f64,
    b2: f64,
    noise_frac: f64,
) -> (CompositionTable, Vec<SampleMeta>) {
    let mut rng = rng(seed);
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
    let lat_span = 10.0 * b2 / b1;
    let n_side = 9;
    let mut positions = Vec::new();
    for a in 0..n_side {
        for b in 0..n_side {
            positions.push((
                lat_span * a as f64 / (n_side - 1) as f64,
                10.0 * b as f64 / (n_side - 1) as f64,
            ));
        }
    }
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

    let mut values = Vec::new();
    let mut meta = Vec::new();
    for (sid, &(lat, depth)) in positions.iter().enumerate() {
        let logs: Vec<f64> = (0..d)
            .map(|l| b1 * lat * u[l] / norm + b2 * depth * w[l] / norm + sigma * normal(&mut rng))
            .collect();
        let raw: Vec<f64> = logs.iter().map(|v| v.exp()).collect();
        let sum: f64 = raw.iter().sum();
        values.extend(raw.into_iter().map(|v| v / sum));
        meta.push(SampleMeta {
            sample_id: format!("s{sid}"),
            latitude: lat,
            depth,
            temperature: 20.0,
            salinity: 35.0,
            cruise: "c1".into(),
            external_province: None,
        });
    }
    let table = CompositionTable::new(
        meta.iter().map(|m| m.sample_id.clone()).collect(),
        (0..d).map(|l| format!("a{l}")).collect(),
        values,
    )
    .unwrap();
    (table, meta)
}

/// Print one acceptance line and panic on failure.
pub fn criterion(name: &str, pass: bool, detail: &str) {
    if pass {
        println!("PASS {name} — {detail}");
    } else {
        println!("FAIL {name} — {detail}");
        panic!("criterion {name} failed: {detail}");
    }
}
