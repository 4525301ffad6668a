//! Agglomerative hierarchical clustering with Ward linkage, flat cuts, and
//! the within-cluster distance curve.
//!
//! Ward distances follow the minimal-variance convention on squared
//! dissimilarities (Lance-Williams update applied to `d^2`, heights reported
//! as `sqrt`), so the height of a merge between two singletons is their
//! distance itself.

use crate::error::{Error, Result};
use crate::numerics::DistanceMatrix;

/// One merge step: `left` and `right` are node ids (samples are `0..n-1`,
/// the cluster created by step `t` is `n + t`), `height` the Ward distance
/// at which they joined.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

/// Full merge history of an agglomerative run over `n` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n: usize,
    pub merges: Vec<Merge>,
}

/// Flat clustering: the dendrogram it came from plus memberships `1..=K`.
///
/// Labels are ordered by ascending mean |latitude| of the member samples when
/// latitudes are supplied, and by descending cluster size otherwise; ties
/// break on the smallest member index.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub dendrogram: Dendrogram,
    pub memberships: Vec<u32>,
    pub k: usize,
}

/// Ward linkage over a full distance matrix.
///
/// Tie-breaking between equal merge costs is deterministic: the pair whose
/// clusters contain the smallest original sample indices merges first.
pub fn linkage(dist: &DistanceMatrix) -> Dendrogram {
    let n = dist.size();
    let mut d2 = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let v = dist.get(i, j);
            d2[i * n + j] = v * v;
        }
    }
    // slot i holds a live cluster whose smallest member is sample i
    let mut active: Vec<bool> = vec![true; n];
    let mut size: Vec<f64> = vec![1.0; n];
    let mut node_id: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        let mut best = f64::INFINITY;
        let mut pair = (usize::MAX, usize::MAX);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if !active[j] {
                    continue;
                }
                let v = d2[i * n + j];
                if v < best {
                    best = v;
                    pair = (i, j);
                }
            }
        }
        let (a, b) = pair;
        let new_id = n + step;
        merges.push(Merge {
            left: node_id[a].min(node_id[b]),
            right: node_id[a].max(node_id[b]),
            height: best.max(0.0).sqrt(),
        });

        // Lance-Williams Ward update into slot a (the smaller index)
        let (sa, sb) = (size[a], size[b]);
        for x in 0..n {
            if !active[x] || x == a || x == b {
                continue;
            }
            let sx = size[x];
            let total = sa + sb + sx;
            let v = ((sa + sx) * d2[a * n + x] + (sb + sx) * d2[b * n + x] - sx * d2[a * n + b])
                / total;
            d2[a * n + x] = v;
            d2[x * n + a] = v;
        }
        active[b] = false;
        size[a] = sa + sb;
        node_id[a] = new_id;
    }
    Dendrogram { n, merges }
}

impl Dendrogram {
    /// Number of clustered samples.
    pub fn n_samples(&self) -> usize {
        self.n
    }

    /// Groups after undoing the last `k - 1` merges: one `Vec` of sample
    /// indices per cluster, ordered by smallest member.
    pub fn cut(&self, k: usize) -> Result<Vec<Vec<usize>>> {
        if k < 1 || k > self.n {
            return Err(Error::Config(format!(
                "cut: K must be in 1..={}, got {k}",
                self.n
            )));
        }
        // replay the first n-k merges through a union-find
        let mut parent: Vec<usize> = (0..self.n + self.merges.len()).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (t, m) in self.merges.iter().take(self.n - k).enumerate() {
            let new = self.n + t;
            let ra = find(&mut parent, m.left);
            let rb = find(&mut parent, m.right);
            parent[ra] = new;
            parent[rb] = new;
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut root_to_group: std::collections::HashMap<usize, usize> =
            std::collections::HashMap::new();
        for i in 0..self.n {
            let root = find(&mut parent, i);
            let g = *root_to_group.entry(root).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(i);
        }
        debug_assert_eq!(groups.len(), k);
        Ok(groups)
    }
}

/// Cluster the samples into exactly `k` groups using Ward linkage, with
/// canonical label ordering (see [`ClusterResult`]).
pub fn cluster(dist: &DistanceMatrix, k: usize, latitudes: Option<&[f64]>) -> Result<ClusterResult> {
    let dendrogram = linkage(dist);
    let memberships = cut_with_labels(&dendrogram, k, latitudes)?;
    Ok(ClusterResult {
        dendrogram,
        memberships,
        k,
    })
}

/// Cut an existing dendrogram at `k` and assign canonical labels `1..=k`.
pub fn cut_with_labels(
    dendrogram: &Dendrogram,
    k: usize,
    latitudes: Option<&[f64]>,
) -> Result<Vec<u32>> {
    if let Some(lats) = latitudes {
        if lats.len() != dendrogram.n_samples() {
            return Err(Error::Data(format!(
                "latitude list has {} entries for {} samples",
                lats.len(),
                dendrogram.n_samples()
            )));
        }
    }
    let groups = dendrogram.cut(k)?;
    Ok(assign_labels(&groups, latitudes, dendrogram.n_samples()))
}

fn assign_labels(groups: &[Vec<usize>], latitudes: Option<&[f64]>, n: usize) -> Vec<u32> {
    let mut order: Vec<usize> = (0..groups.len()).collect();
    match latitudes {
        Some(lats) => {
            // ascending mean distance from the equator
            let key: Vec<f64> = groups
                .iter()
                .map(|g| g.iter().map(|&i| lats[i].abs()).sum::<f64>() / g.len() as f64)
                .collect();
            order.sort_by(|&a, &b| {
                key[a]
                    .partial_cmp(&key[b])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(groups[a][0].cmp(&groups[b][0]))
            });
        }
        None => {
            // descending size
            order.sort_by(|&a, &b| {
                groups[b]
                    .len()
                    .cmp(&groups[a].len())
                    .then(groups[a][0].cmp(&groups[b][0]))
            });
        }
    }
    let mut memberships = vec![0u32; n];
    for (label0, &g) in order.iter().enumerate() {
        for &i in &groups[g] {
            memberships[i] = label0 as u32 + 1;
        }
    }
    memberships
}

/// Sum over clusters of the distances between all ordered pairs of members
/// (each unordered pair counts twice).
pub fn within_cluster_distance(dist: &DistanceMatrix, memberships: &[u32]) -> Result<f64> {
    let n = dist.size();
    validate_memberships(memberships, n)?;
    let k = *memberships.iter().max().unwrap() as usize;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &m) in memberships.iter().enumerate() {
        members[m as usize - 1].push(i);
    }
    let mut total = 0.0;
    for group in &members {
        for &i in group {
            for &j in group {
                if i != j {
                    total += dist.get(i, j);
                }
            }
        }
    }
    Ok(total)
}

/// Check that memberships cover every label `1..=K` with K = max label.
pub fn validate_memberships(memberships: &[u32], n: usize) -> Result<()> {
    if memberships.len() != n {
        return Err(Error::Data(format!(
            "memberships list has {} entries for {} samples",
            memberships.len(),
            n
        )));
    }
    let k = *memberships
        .iter()
        .max()
        .ok_or_else(|| Error::Data("empty membership list".into()))? as usize;
    if k == 0 {
        return Err(Error::Data("membership labels must start at 1".into()));
    }
    let mut seen = vec![false; k];
    for &m in memberships {
        if m == 0 {
            return Err(Error::Data("membership labels must start at 1".into()));
        }
        seen[m as usize - 1] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Data(format!(
            "memberships use max label {k} but label {} is empty",
            missing + 1
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_of_points(pts: &[f64]) -> DistanceMatrix {
        DistanceMatrix::from_fn(pts.len(), |i, j| (pts[i] - pts[j]).abs()).unwrap()
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let d = matrix_of_points(&[0.0, 1.0, 5.0, 9.0]);
        let res = cluster(&d, 4, None).unwrap();
        let mut sorted = res.memberships.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 2, 3, 4]);
    }

    #[test]
    fn k_equals_one_gives_single_cluster() {
        let d = matrix_of_points(&[0.0, 1.0, 5.0, 9.0]);
        let res = cluster(&d, 1, None).unwrap();
        assert!(res.memberships.iter().all(|&m| m == 1));
    }

    #[test]
    fn k_out_of_range_is_rejected() {
        let d = matrix_of_points(&[0.0, 1.0]);
        assert!(cluster(&d, 0, None).is_err());
        assert!(cluster(&d, 3, None).is_err());
    }

    #[test]
    fn two_well_separated_blobs() {
        let d = matrix_of_points(&[0.0, 0.1, 0.2, 10.0, 10.1, 10.2]);
        let res = cluster(&d, 2, None).unwrap();
        assert_eq!(res.memberships[0], res.memberships[1]);
        assert_eq!(res.memberships[0], res.memberships[2]);
        assert_eq!(res.memberships[3], res.memberships[4]);
        assert_ne!(res.memberships[0], res.memberships[3]);
    }

    #[test]
    fn merge_heights_are_nondecreasing() {
        let pts: Vec<f64> = (0..20).map(|i| ((i * 37) % 100) as f64 / 7.0).collect();
        let dend = linkage(&matrix_of_points(&pts));
        for w in dend.merges.windows(2) {
            assert!(w[1].height >= w[0].height - 1e-12);
        }
    }

    #[test]
    fn singleton_merge_height_is_the_distance() {
        let d = matrix_of_points(&[0.0, 3.0, 100.0]);
        let dend = linkage(&d);
        assert!((dend.merges[0].height - 3.0).abs() < 1e-12);
    }

    #[test]
    fn labels_order_by_equator_distance_with_meta() {
        // two clusters: one near the equator, one at high latitude
        let d = matrix_of_points(&[0.0, 0.1, 10.0, 10.1]);
        let lats = [50.0, 52.0, 2.0, 3.0];
        let res = cluster(&d, 2, Some(&lats)).unwrap();
        // samples 2,3 are near the equator -> label 1
        assert_eq!(res.memberships, vec![2, 2, 1, 1]);
    }

    #[test]
    fn labels_order_by_size_without_meta() {
        let d = matrix_of_points(&[0.0, 0.1, 0.2, 10.0]);
        let res = cluster(&d, 2, None).unwrap();
        // the size-3 cluster gets label 1
        assert_eq!(res.memberships, vec![1, 1, 1, 2]);
    }

    #[test]
    fn wcd_of_singletons_is_zero() {
        let d = matrix_of_points(&[0.0, 1.0, 5.0]);
        let m = vec![1, 2, 3];
        assert_eq!(within_cluster_distance(&d, &m).unwrap(), 0.0);
    }

    #[test]
    fn wcd_counts_ordered_pairs() {
        // one cluster of 3 with pairwise distances {1, 2, 3}
        let d = DistanceMatrix::new(
            3,
            vec![0.0, 1.0, 2.0, 1.0, 0.0, 3.0, 2.0, 3.0, 0.0],
        )
        .unwrap();
        let m = vec![1, 1, 1];
        assert_eq!(within_cluster_distance(&d, &m).unwrap(), 12.0);
    }

    #[test]
    fn wcd_monotone_endpoints() {
        let pts: Vec<f64> = (0..8).map(|i| i as f64 * 1.3).collect();
        let d = matrix_of_points(&pts);
        let all_one = vec![1u32; 8];
        let singles: Vec<u32> = (1..=8).collect();
        let at1 = within_cluster_distance(&d, &all_one).unwrap();
        let atn = within_cluster_distance(&d, &singles).unwrap();
        assert!(at1 >= atn);
        assert_eq!(atn, 0.0);
    }

    #[test]
    fn invalid_memberships_are_rejected() {
        let d = matrix_of_points(&[0.0, 1.0, 5.0]);
        assert!(within_cluster_distance(&d, &[1, 1]).is_err()); // wrong length
        assert!(within_cluster_distance(&d, &[0, 1, 2]).is_err()); // label 0
        assert!(within_cluster_distance(&d, &[1, 1, 3]).is_err()); // label 2 empty
    }
}
