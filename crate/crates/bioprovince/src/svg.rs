//! Dependency-free SVG emission for the pipeline's plots: tuning curves,
//! regression scatter panels, latitude-depth province rasters, the
//! cross-tabulation heatmap, and stacked composition bars.
//!
//! All output is deterministic: floats are printed with fixed precision and
//! map iteration orders are pinned.

use std::fmt::Write as _;

use crate::data::GridSpec;
use crate::report::{CrossTab, MeanComposition};
use crate::tuning::{AlphaCurve, KCurve};

/// Discrete palette, cycled for cluster labels (label 1 gets the first).
pub const PALETTE: [&str; 16] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5", "#c49c94",
];

/// Color for a 1-based cluster label.
pub fn label_color(label: u32) -> &'static str {
    PALETTE[((label.max(1) - 1) as usize) % PALETTE.len()]
}

const W: f64 = 720.0;
const H: f64 = 480.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
    /// invert the y axis (depth grows downward)
    flip_y: bool,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = if self.x_hi > self.x_lo { self.x_hi - self.x_lo } else { 1.0 };
        MARGIN_L + (v - self.x_lo) / span * (W - MARGIN_L - MARGIN_R)
    }

    fn y(&self, v: f64) -> f64 {
        let span = if self.y_hi > self.y_lo { self.y_hi - self.y_lo } else { 1.0 };
        let frac = (v - self.y_lo) / span;
        let frac = if self.flip_y { frac } else { 1.0 - frac };
        MARGIN_T + frac * (H - MARGIN_T - MARGIN_B)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = MARGIN_L;
    let x1 = W - MARGIN_R;
    let y0 = MARGIN_T;
    let y1 = H - MARGIN_B;
    let _ = writeln!(
        out,
        r##"<rect x="{x0:.1}" y="{y0:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#333" stroke-width="1"/>"##,
        x1 - x0,
        y1 - y0
    );
    for i in 0..=4 {
        let fx = frame.x_lo + (frame.x_hi - frame.x_lo) * i as f64 / 4.0;
        let px = frame.x(fx);
        let _ = writeln!(
            out,
            r#"<text x="{px:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">{fx:.3}</text>"#,
            y1 + 14.0
        );
        let fy = frame.y_lo + (frame.y_hi - frame.y_lo) * i as f64 / 4.0;
        let py = frame.y(fy);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{py:.1}" font-family="sans-serif" font-size="10" text-anchor="end">{fy:.3}</text>"#,
            x0 - 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(out: &mut String, pts: &[(f64, f64)], color: &str, width: f64, dashed: bool) {
    if pts.is_empty() {
        return;
    }
    let mut path = String::new();
    for (i, (x, y)) in pts.iter().enumerate() {
        let _ = write!(path, "{}{x:.2},{y:.2}", if i == 0 { "" } else { " " });
    }
    let dash = if dashed { r#" stroke-dasharray="5,3""# } else { "" };
    let _ = writeln!(
        out,
        r#"<polyline points="{path}" fill="none" stroke="{color}" stroke-width="{width:.1}"{dash}/>"#
    );
}

/// Elbow plot of the within-cluster distance across K, with the suggested
/// elbow marked.
pub fn k_curve_svg(curve: &KCurve) -> String {
    let mut out = String::new();
    header(&mut out, "within-cluster distance by K");
    let frame = Frame {
        x_lo: *curve.ks.first().unwrap() as f64,
        x_hi: *curve.ks.last().unwrap() as f64,
        y_lo: 0.0,
        y_hi: curve.wcd.iter().cloned().fold(0.0, f64::max) * 1.05 + 1e-12,
        flip_y: false,
    };
    axes(&mut out, &frame, "K", "within-cluster distance");
    let pts: Vec<(f64, f64)> = curve
        .ks
        .iter()
        .zip(&curve.wcd)
        .map(|(&k, &w)| (frame.x(k as f64), frame.y(w)))
        .collect();
    polyline(&mut out, &pts, PALETTE[0], 2.0, false);
    for (x, y) in &pts {
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{}"/>"#, PALETTE[0]);
    }
    if let Some(k) = curve.suggested_k {
        let x = frame.x(k as f64);
        polyline(
            &mut out,
            &[(x, MARGIN_T), (x, H - MARGIN_B)],
            PALETTE[3],
            1.5,
            true,
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{}">K={k}</text>"#,
            x + 4.0,
            MARGIN_T + 12.0,
            PALETTE[3]
        );
    }
    out.push_str("</svg>\n");
    out
}

fn series_band(values_per_alpha: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let quant = |sorted: &[f64], p: f64| -> f64 {
        if sorted.len() == 1 {
            return sorted[0];
        }
        let h = (sorted.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        sorted[lo] * (1.0 - (h - lo as f64)) + sorted[hi] * (h - lo as f64)
    };
    let mut lo = Vec::new();
    let mut mid = Vec::new();
    let mut hi = Vec::new();
    for vals in values_per_alpha {
        let mut s = vals.clone();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        lo.push(quant(&s, 0.025));
        mid.push(quant(&s, 0.5));
        hi.push(quant(&s, 0.975));
    }
    (lo, mid, hi)
}

/// Saturation-score curves: medians with 95% quantile bands for the score
/// and its null version, plus the suggested alpha.
pub fn alpha_curve_svg(curve: &AlphaCurve) -> String {
    let mut out = String::new();
    header(&mut out, "saturation score by alpha (band: 95% of replicates)");
    let frame = Frame {
        x_lo: *curve.alphas.first().unwrap(),
        x_hi: *curve.alphas.last().unwrap(),
        y_lo: 0.0,
        y_hi: 1.0,
        flip_y: false,
    };
    axes(&mut out, &frame, "alpha", "score");

    for (vals, color, name) in [
        (&curve.scores, PALETTE[0], "score"),
        (&curve.null_scores, PALETTE[1], "null score"),
    ] {
        let (lo, mid, hi) = series_band(vals);
        let mut band = String::new();
        for (i, &a) in curve.alphas.iter().enumerate() {
            let _ = write!(band, "{}{:.2},{:.2}", if i == 0 { "" } else { " " }, frame.x(a), frame.y(hi[i]));
        }
        for (i, &a) in curve.alphas.iter().enumerate().rev() {
            let _ = write!(band, " {:.2},{:.2}", frame.x(a), frame.y(lo[i]));
        }
        let _ = writeln!(
            out,
            r#"<polygon points="{band}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#
        );
        let pts: Vec<(f64, f64)> = curve
            .alphas
            .iter()
            .enumerate()
            .map(|(i, &a)| (frame.x(a), frame.y(mid[i])))
            .collect();
        polyline(&mut out, &pts, color, 2.0, false);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{color}">{name}</text>"#,
            W - MARGIN_R - 70.0,
            MARGIN_T + 14.0 + if name == "score" { 0.0 } else { 14.0 }
        );
    }
    if let Some(alpha) = curve.suggested_alpha {
        let x = frame.x(alpha);
        polyline(&mut out, &[(x, MARGIN_T), (x, H - MARGIN_B)], PALETTE[3], 1.5, true);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{}">alpha={alpha:.3}</text>"#,
            x + 4.0,
            H - MARGIN_B - 6.0,
            PALETTE[3]
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One scatter panel with per-cruise fit lines; `points` are
/// `(x, y, cruise_index)`.
pub fn scatter_fit_svg(
    title: &str,
    x_label: &str,
    points: &[(f64, f64, usize)],
    fits: &[(usize, f64, f64)], // (cruise_index, intercept, slope)
    cruise_names: &[String],
) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let x_hi = points.iter().map(|p| p.0).fold(0.0, f64::max);
    let y_hi = points.iter().map(|p| p.1).fold(0.0, f64::max);
    let frame = Frame {
        x_lo: 0.0,
        x_hi: x_hi * 1.05 + 1e-12,
        y_lo: 0.0,
        y_hi: y_hi * 1.05 + 1e-12,
        flip_y: false,
    };
    axes(&mut out, &frame, x_label, "Aitchison distance");
    for &(x, y, c) in points {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{}" fill-opacity="0.55"/>"#,
            frame.x(x),
            frame.y(y),
            PALETTE[c % PALETTE.len()]
        );
    }
    for &(c, intercept, slope) in fits {
        let y0 = intercept;
        let y1 = intercept + slope * frame.x_hi;
        polyline(
            &mut out,
            &[(frame.x(0.0), frame.y(y0.max(0.0))), (frame.x(frame.x_hi), frame.y(y1.max(0.0)))],
            PALETTE[c % PALETTE.len()],
            2.0,
            false,
        );
    }
    for (c, name) in cruise_names.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{}">{}</text>"#,
            W - MARGIN_R - 90.0,
            MARGIN_T + 14.0 * (c as f64 + 1.0),
            PALETTE[c % PALETTE.len()],
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Latitude-depth raster of grid memberships. `opacity`, when given, is the
/// per-point fill opacity (the stability rendering).
pub fn province_raster_svg(grid: &GridSpec, memberships: &[u32], opacity: Option<&[f64]>) -> String {
    let mut out = String::new();
    header(&mut out, "predicted provinces (latitude x depth)");
    let (lat_lo, lat_hi) = min_max(&grid.latitude);
    let (dep_lo, dep_hi) = min_max(&grid.depth);
    let frame = Frame {
        x_lo: lat_lo,
        x_hi: lat_hi,
        y_lo: dep_lo,
        y_hi: dep_hi,
        flip_y: true, // depth grows downward
    };
    axes(&mut out, &frame, "latitude (deg)", "depth (m)");

    // cell size from the median spacing of the distinct coordinates
    let cell_w = spacing(&grid.latitude).map(|s| frame.x(lat_lo + s) - frame.x(lat_lo)).unwrap_or(4.0);
    let cell_h = spacing(&grid.depth).map(|s| frame.y(dep_lo + s) - frame.y(dep_lo)).unwrap_or(4.0);
    let cell_w = cell_w.abs().clamp(1.0, 40.0);
    let cell_h = cell_h.abs().clamp(1.0, 40.0);

    for j in 0..grid.len() {
        let x = frame.x(grid.latitude[j]) - cell_w / 2.0;
        let y = frame.y(grid.depth[j]) - cell_h / 2.0;
        let o = opacity.map(|s| s[j]).unwrap_or(1.0);
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{cell_w:.2}" height="{cell_h:.2}" fill="{}" fill-opacity="{o:.3}"/>"#,
            label_color(memberships[j])
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Cross-tabulation heatmap, rows already ordered north to south.
pub fn crosstab_svg(tab: &CrossTab) -> String {
    let mut out = String::new();
    header(&mut out, "external provinces vs estimated provinces (rows sum to 1)");
    let rows = tab.row_labels.len();
    let cols = tab.col_labels.len();
    let x0 = MARGIN_L + 40.0;
    let y0 = MARGIN_T + 10.0;
    let cw = (W - x0 - MARGIN_R) / cols as f64;
    let ch = (H - y0 - MARGIN_B) / rows as f64;
    for (ri, row) in tab.values.iter().enumerate() {
        for (ci, &v) in row.iter().enumerate() {
            let x = x0 + ci as f64 * cw;
            let y = y0 + ri as f64 * ch;
            // white -> blue ramp
            let shade = (255.0 - v * 175.0) as u8;
            let _ = writeln!(
                out,
                r##"<rect x="{x:.1}" y="{y:.1}" width="{cw:.1}" height="{ch:.1}" fill="rgb({shade},{shade},255)" stroke="#999" stroke-width="0.5"/>"##
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">{:.0}%</text>"#,
                x + cw / 2.0,
                y + ch / 2.0 + 3.0,
                v * 100.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#,
            x0 - 4.0,
            y0 + ri as f64 * ch + ch / 2.0 + 3.0,
            escape(&tab.row_labels[ri])
        );
    }
    for (ci, label) in tab.col_labels.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">{label}</text>"#,
            x0 + ci as f64 * cw + cw / 2.0,
            y0 - 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One stacked bar of group fractions per cluster.
pub fn stacked_bar_svg(mc: &MeanComposition) -> String {
    let mut out = String::new();
    header(&mut out, "mean composition by cluster (grouped)");
    let x0 = MARGIN_L;
    let y0 = MARGIN_T + 10.0;
    let plot_h = H - y0 - MARGIN_B;
    let bw = (W - x0 - MARGIN_R - 120.0) / mc.clusters.len() as f64;
    for (bi, row) in mc.values.iter().enumerate() {
        let mut acc = 0.0;
        for (gi, &v) in row.iter().enumerate() {
            let y = y0 + (1.0 - acc - v) * plot_h;
            let _ = writeln!(
                out,
                r##"<rect x="{:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="{}" stroke="#fff" stroke-width="0.5"/>"##,
                x0 + bi as f64 * bw + 2.0,
                bw - 4.0,
                v * plot_h,
                PALETTE[gi % PALETTE.len()]
            );
            acc += v;
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
            x0 + bi as f64 * bw + bw / 2.0,
            H - MARGIN_B + 14.0,
            mc.clusters[bi]
        );
    }
    for (gi, group) in mc.groups.iter().enumerate() {
        let y = y0 + 14.0 * gi as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{}"/>"#,
            W - MARGIN_R - 110.0,
            y,
            PALETTE[gi % PALETTE.len()]
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10">{}</text>"#,
            W - MARGIN_R - 96.0,
            y + 9.0,
            escape(group)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Median gap between consecutive distinct values, if there are at least two.
fn spacing(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    if v.len() < 2 {
        return None;
    }
    let mut gaps: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(gaps[gaps.len() / 2])
}
