//! Minimum-cost assignment (Hungarian algorithm) with deterministic
//! lexicographic tie-breaking.

use crate::error::{Error, Result};

/// Solve the square assignment problem, minimizing total cost.
///
/// Returns `perm` with `perm[row] = column`. Among all minimizing
/// assignments, the lexicographically smallest `perm` is returned.
pub fn hungarian(cost: &[Vec<f64>]) -> Result<Vec<usize>> {
    let k = cost.len();
    if k == 0 {
        return Err(Error::Numerics("hungarian: empty cost matrix".into()));
    }
    for row in cost {
        if row.len() != k {
            return Err(Error::Numerics(format!(
                "hungarian: non-square cost matrix ({}x{})",
                k,
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerics("hungarian: non-finite cost".into()));
        }
    }

    let base = solve_min(cost, &(0..k).collect::<Vec<_>>(), &(0..k).collect::<Vec<_>>());
    let mut target = base;
    let tol = 1e-9 * (1.0 + base.abs());

    // Fix rows in order, always choosing the smallest column that still
    // admits an optimal completion of the remaining subproblem.
    let mut perm = vec![0usize; k];
    let mut available: Vec<usize> = (0..k).collect();
    for i in 0..k {
        let rest_rows: Vec<usize> = ((i + 1)..k).collect();
        let mut chosen = None;
        for (pos, &c) in available.iter().enumerate() {
            let mut rest_cols = available.clone();
            rest_cols.remove(pos);
            let sub = if rest_rows.is_empty() {
                0.0
            } else {
                solve_min(cost, &rest_rows, &rest_cols)
            };
            if cost[i][c] + sub <= target + tol {
                perm[i] = c;
                target = sub;
                chosen = Some(pos);
                break;
            }
        }
        // The base optimum guarantees some column always qualifies.
        let pos = chosen.expect("hungarian: no optimal completion found");
        available.remove(pos);
    }
    Ok(perm)
}

/// Minimum assignment cost of the `rows` x `cols` submatrix via the
/// augmenting-path algorithm with potentials (O(k^3)).
fn solve_min(cost: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    debug_assert_eq!(k, cols.len());
    if k == 0 {
        return 0.0;
    }
    let inf = f64::INFINITY;
    // 1-based with column 0 as sentinel
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut matched_row = vec![0usize; k + 1]; // matched_row[j] = row occupying column j
    let mut way = vec![0usize; k + 1];

    for i in 1..=k {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=k {
                if !used[j] {
                    let cur = cost[rows[i0 - 1]][cols[j - 1]] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut total = 0.0;
    let mut assignment = vec![0usize; k];
    for j in 1..=k {
        if matched_row[j] > 0 {
            assignment[matched_row[j] - 1] = j - 1;
        }
    }
    for i in 0..k {
        total += cost[rows[i]][cols[assignment[i]]];
    }
    total
}
