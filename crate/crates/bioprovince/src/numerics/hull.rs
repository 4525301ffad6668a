//! Convex hull of four corner points and the fraction of a point cloud it
//! contains.

/// Result of [`convex_hull_fraction`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullFraction {
    /// Fraction of the points inside or on the hull boundary.
    pub fraction: f64,
    /// True when the four corners were collinear (fraction forced to 0).
    pub degenerate: bool,
}

const BOUNDARY_TOL: f64 = 1e-9;

/// Fraction of `points` lying inside or on the convex hull of the four
/// `corners` (boundary tolerance 1e-9, measured as signed distance to the
/// hull edges). Collinear corners yield fraction 0 with the degenerate flag
/// set. The result is invariant under any permutation of the corners.
pub fn convex_hull_fraction(points: &[[f64; 2]], corners: &[[f64; 2]; 4]) -> HullFraction {
    let hull = convex_hull(corners);
    if hull.len() < 3 {
        return HullFraction {
            fraction: 0.0,
            degenerate: true,
        };
    }
    if points.is_empty() {
        return HullFraction {
            fraction: 0.0,
            degenerate: false,
        };
    }
    let inside = points
        .iter()
        .filter(|p| point_in_convex_polygon(**p, &hull))
        .count();
    HullFraction {
        fraction: inside as f64 / points.len() as f64,
        degenerate: false,
    }
}

/// Andrew's monotone chain on a handful of points; returns the hull in
/// counter-clockwise order without interior or duplicate points.
fn convex_hull(pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p: Vec<[f64; 2]> = pts.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &pt in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], pt) <= 0.0 {
            lower.pop();
        }
        lower.push(pt);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &pt in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], pt) <= 0.0 {
            upper.pop();
        }
        upper.push(pt);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn point_in_convex_polygon(p: [f64; 2], hull: &[[f64; 2]]) -> bool {
    // Inside iff the signed distance to every CCW edge is >= -tol.
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let ex = b[0] - a[0];
        let ey = b[1] - a[1];
        let len = (ex * ex + ey * ey).sqrt();
        if len == 0.0 {
            continue;
        }
        let cross = ex * (p[1] - a[1]) - ey * (p[0] - a[0]);
        if cross / len < -BOUNDARY_TOL {
            return false;
        }
    }
    true
}
