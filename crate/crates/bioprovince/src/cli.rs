//! Command-line driver: `tune-r`, `tune-alpha`, `tune-k`, `cluster`,
//! `predict`, `stability`, `report`, `synth`, and the end-to-end `pipeline`.
//!
//! Every value can come from a `key = value` config file (`--config`); flags
//! take precedence over the file. Each run writes a `manifest.json` with
//! content hashes of all inputs and outputs. Exit codes: 0 success, 2 config
//! error, 3 data error, 4 numerical failure.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::biocluster::{cluster, ClusterResult};
use crate::data::{load_grid, load_samples, CompositionTable, GridSpec, SampleMeta, ZeroPolicy};
use crate::distance::{bio_distance_matrix, mix_distance_matrix, spatial_distance_matrix};
use crate::error::{Error, Result};
use crate::manifest::Manifest;
use crate::numerics::RegressionFit;
use crate::province::{predict, ProvinceMap, RescaleDomain};
use crate::report::{
    cross_tabulate, generate_synthetic, mean_cluster_composition, SyntheticData, SyntheticSpec,
};
use crate::stability::{run_stability, StabilityMap, StabilityParams};
use crate::svg;
use crate::tuning::{
    alpha_saturation_curve, k_elbow_curve, knn_k_bounds, tune_r, RTuningOptions, SlopeWeighting,
};

#[derive(Parser)]
#[command(
    name = "bioprovince",
    version,
    about = "Cluster compositional samples with mixed biological/spatial distances and predict 3-D provinces on an abiotic grid"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the latitude-to-depth scale r from distance decay
    TuneR(TuneRArgs),
    /// Compute saturation scores over an alpha grid
    TuneAlpha(TuneAlphaArgs),
    /// Within-cluster distance across candidate K (elbow curve)
    TuneK(TuneKArgs),
    /// Cluster the samples at a fixed (r, alpha, K)
    Cluster(ClusterArgs),
    /// Predict grid memberships from existing sample memberships
    Predict(PredictArgs),
    /// ASV-subsampling stability of the grid predictions
    Stability(StabilityArgs),
    /// Cross-tabulation and mean-composition reports
    Report(ReportArgs),
    /// Generate a synthetic dataset with planted provinces
    Synth(SynthArgs),
    /// cluster + predict + report in one run with a manifest
    Pipeline(PipelineArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// key = value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if missing)
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct TuneRArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    composition: Option<PathBuf>,
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Latitude window in degrees for qualifying pairs
    #[arg(long)]
    lat_window: Option<f64>,
    /// Depth window in meters for qualifying pairs
    #[arg(long)]
    depth_window: Option<f64>,
    /// Two-sided p-value threshold for significant slopes
    #[arg(long)]
    significance: Option<f64>,
    /// Cross-cruise weighting: pairs | samples
    #[arg(long)]
    weighting: Option<String>,
    /// Zero policy: multiplicative | pseudocount:<value>
    #[arg(long)]
    zero_policy: Option<String>,
}

#[derive(Args)]
struct TuneAlphaArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    composition: Option<PathBuf>,
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long)]
    r: Option<f64>,
    /// Comma-separated alpha grid
    #[arg(long)]
    alphas: Option<String>,
    /// Number of score replicates L
    #[arg(long)]
    l_replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    zero_policy: Option<String>,
}

#[derive(Args)]
struct TuneKArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    composition: Option<PathBuf>,
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated candidate K values
    #[arg(long)]
    ks: Option<String>,
    #[arg(long)]
    zero_policy: Option<String>,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    composition: Option<PathBuf>,
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    k_clusters: Option<usize>,
    #[arg(long)]
    zero_policy: Option<String>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Sample memberships CSV from `cluster`
    #[arg(long)]
    memberships: Option<PathBuf>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    k_neighbors: Option<usize>,
    /// Rescaling domain for abiotic fields: union | samples
    #[arg(long)]
    rescale_domain: Option<String>,
    #[arg(long)]
    composition: Option<PathBuf>,
    #[arg(long)]
    zero_policy: Option<String>,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    composition: Option<PathBuf>,
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    k_clusters: Option<usize>,
    #[arg(long)]
    k_neighbors: Option<usize>,
    /// ASV fraction kept per replicate
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    zero_policy: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    composition: Option<PathBuf>,
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long)]
    memberships: Option<PathBuf>,
    /// Optional asv_id,group CSV
    #[arg(long)]
    group_map: Option<PathBuf>,
    #[arg(long)]
    zero_policy: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    provinces: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    asvs: Option<usize>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    composition: Option<PathBuf>,
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long)]
    group_map: Option<PathBuf>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    k_clusters: Option<usize>,
    #[arg(long)]
    k_neighbors: Option<usize>,
    #[arg(long)]
    rescale_domain: Option<String>,
    #[arg(long)]
    zero_policy: Option<String>,
}

/// Parse argv and run; returns the error for the caller to map to an exit
/// code.
pub fn run() -> Result<()> {
    let cli = Cli::parse();
    dispatch(cli)
}

/// Same as [`run`] but with explicit arguments (testing entry point).
pub fn run_with_args<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    dispatch(cli)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::TuneR(args) => cmd_tune_r(args),
        Command::TuneAlpha(args) => cmd_tune_alpha(args),
        Command::TuneK(args) => cmd_tune_k(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Stability(args) => cmd_stability(args),
        Command::Report(args) => cmd_report(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Pipeline(args) => cmd_pipeline(args),
    }
}

// ---------------------------------------------------------------------------
// config file + flag resolution

struct Ctx {
    file: BTreeMap<String, String>,
    out_dir: PathBuf,
}

impl Ctx {
    fn new(common: &CommonArgs) -> Result<Ctx> {
        let mut file = BTreeMap::new();
        if let Some(path) = &common.config {
            if !path.exists() {
                return Err(Error::Config(format!(
                    "config file {} does not exist",
                    path.display()
                )));
            }
            for (ln, line) in fs::read_to_string(path)?.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Error::Config(format!(
                        "{}:{}: expected `key = value`, got {line:?}",
                        path.display(),
                        ln + 1
                    ))
                })?;
                file.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        let out_dir = match (&common.out_dir, file.get("out-dir")) {
            (Some(dir), _) => dir.clone(),
            (None, Some(dir)) => PathBuf::from(dir),
            (None, None) => PathBuf::from("out"),
        };
        fs::create_dir_all(&out_dir)?;
        Ok(Ctx { file, out_dir })
    }

    /// Flag wins over config file; error when neither is present.
    fn require<T: FromStr + Clone>(&self, key: &str, flag: &Option<T>) -> Result<T> {
        self.optional(key, flag)?
            .ok_or_else(|| Error::Config(format!("missing required option --{key}")))
    }

    fn optional<T: FromStr + Clone>(&self, key: &str, flag: &Option<T>) -> Result<Option<T>> {
        if let Some(v) = flag {
            return Ok(Some(v.clone()));
        }
        match self.file.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Config(format!("config key {key}: cannot parse {raw:?}"))),
            None => Ok(None),
        }
    }

    fn with_default<T: FromStr + Clone>(&self, key: &str, flag: &Option<T>, default: T) -> Result<T> {
        Ok(self.optional(key, flag)?.unwrap_or(default))
    }

    fn require_file(&self, key: &str, flag: &Option<PathBuf>) -> Result<PathBuf> {
        let path: PathBuf = self.require(key, flag)?;
        if !path.exists() {
            return Err(Error::Config(format!(
                "--{key}: file {} does not exist",
                path.display()
            )));
        }
        Ok(path)
    }

    fn optional_file(&self, key: &str, flag: &Option<PathBuf>) -> Result<Option<PathBuf>> {
        match self.optional::<PathBuf>(key, flag)? {
            Some(path) => {
                if !path.exists() {
                    return Err(Error::Config(format!(
                        "--{key}: file {} does not exist",
                        path.display()
                    )));
                }
                Ok(Some(path))
            }
            None => Ok(None),
        }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn parse_zero_policy(ctx: &Ctx, flag: &Option<String>) -> Result<ZeroPolicy> {
    match ctx.optional::<String>("zero-policy", flag)? {
        Some(s) => s.parse(),
        None => Ok(ZeroPolicy::Multiplicative),
    }
}

fn parse_rescale_domain(ctx: &Ctx, flag: &Option<String>) -> Result<RescaleDomain> {
    match ctx.optional::<String>("rescale-domain", flag)?.as_deref() {
        None | Some("union") => Ok(RescaleDomain::Union),
        Some("samples") => Ok(RescaleDomain::SamplesOnly),
        Some(other) => Err(Error::Config(format!(
            "unknown rescale domain {other:?} (use `union` or `samples`)"
        ))),
    }
}

fn parse_f64_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse {tok:?} as a number")))
        })
        .collect()
}

fn parse_usize_list(raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("cannot parse {tok:?} as an integer")))
        })
        .collect()
}

fn validate_alpha(alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
        return Err(Error::Config(format!("alpha must be in [0, 1], got {alpha}")));
    }
    Ok(alpha)
}

fn validate_r(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Config(format!("r must be positive, got {r}")));
    }
    Ok(r)
}

fn warn_k_neighbors(k: usize) {
    let (lo, hi) = knn_k_bounds();
    if k < lo || k > hi {
        eprintln!("warning: k = {k} is outside the recommended range {lo}..={hi}; proceeding");
    }
}

// ---------------------------------------------------------------------------
// CSV / JSON writers

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_text(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)?;
    Ok(())
}

fn memberships_csv(sample_ids: &[String], memberships: &[u32]) -> String {
    let mut out = String::from("sample_id,membership\n");
    for (id, m) in sample_ids.iter().zip(memberships) {
        let _ = writeln!(out, "{},{m}", csv_field(id));
    }
    out
}

fn province_csv(grid: &GridSpec, map: &ProvinceMap) -> String {
    let mut out = String::from("grid_id,latitude,depth,membership,k_prime,tie_broken,fallback_used\n");
    for j in 0..grid.len() {
        let p = &map.provenance[j];
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_field(&grid.grid_ids[j]),
            grid.latitude[j],
            grid.depth[j],
            map.memberships[j],
            p.k_prime,
            p.tie_broken,
            p.fallback_used
        );
    }
    out
}

fn stability_csv(grid: &GridSpec, map: &StabilityMap) -> String {
    let mut out = String::from("grid_id,latitude,depth,modal_cluster,stability\n");
    for j in 0..grid.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(&grid.grid_ids[j]),
            grid.latitude[j],
            grid.depth[j],
            map.modal_cluster[j],
            map.stability[j]
        );
    }
    out
}

fn regression_json(fit: &Option<RegressionFit>) -> serde_json::Value {
    match fit {
        None => serde_json::Value::Null,
        Some(f) => serde_json::json!({
            "slope": f.slope,
            "intercept": f.intercept,
            "slope_std_err": f.slope_std_err,
            "t_stat": if f.t_stat.is_finite() { serde_json::json!(f.t_stat) } else { serde_json::json!(f.t_stat.to_string()) },
            "p_value": f.p_value,
            "n_pairs": f.n_pairs,
        }),
    }
}

fn load_memberships_csv(path: &Path, meta: &[SampleMeta]) -> Result<Vec<u32>> {
    let mut by_id: HashMap<String, u32> = HashMap::new();
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let id_col = headers
        .iter()
        .position(|h| h == "sample_id")
        .ok_or_else(|| Error::Data(format!("{}: missing column `sample_id`", path.display())))?;
    let m_col = headers
        .iter()
        .position(|h| h == "membership")
        .ok_or_else(|| Error::Data(format!("{}: missing column `membership`", path.display())))?;
    for record in reader.records() {
        let record = record?;
        let id = record.get(id_col).unwrap_or("").to_string();
        let m: u32 = record
            .get(m_col)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| Error::Data(format!("{}: bad membership for {id:?}", path.display())))?;
        if by_id.insert(id.clone(), m).is_some() {
            return Err(Error::Data(format!("{}: duplicate sample {id:?}", path.display())));
        }
    }
    meta.iter()
        .map(|m| {
            by_id.get(&m.sample_id).copied().ok_or_else(|| {
                Error::Data(format!(
                    "{}: no membership for sample {:?}",
                    path.display(),
                    m.sample_id
                ))
            })
        })
        .collect()
}

fn load_group_map(path: &Path) -> Result<HashMap<String, String>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let asv_col = headers
        .iter()
        .position(|h| h == "asv_id")
        .ok_or_else(|| Error::Data(format!("{}: missing column `asv_id`", path.display())))?;
    let group_col = headers
        .iter()
        .position(|h| h == "group")
        .ok_or_else(|| Error::Data(format!("{}: missing column `group`", path.display())))?;
    let mut map = HashMap::new();
    for record in reader.records() {
        let record = record?;
        map.insert(
            record.get(asv_col).unwrap_or("").to_string(),
            record.get(group_col).unwrap_or("").to_string(),
        );
    }
    Ok(map)
}

// ---------------------------------------------------------------------------
// subcommands

fn cmd_tune_r(args: TuneRArgs) -> Result<()> {
    let ctx = Ctx::new(&args.common)?;
    let composition = ctx.require_file("composition", &args.composition)?;
    let meta_path = ctx.require_file("meta", &args.meta)?;
    let policy = parse_zero_policy(&ctx, &args.zero_policy)?;
    let opts = RTuningOptions {
        lat_window: ctx.with_default("lat-window", &args.lat_window, 3.0)?,
        depth_window: ctx.with_default("depth-window", &args.depth_window, 10.0)?,
        significance: ctx.with_default("significance", &args.significance, 0.05)?,
        weighting: match ctx
            .with_default("weighting", &args.weighting, "pairs".to_string())?
            .as_str()
        {
            "pairs" => SlopeWeighting::PairCount,
            "samples" => SlopeWeighting::SampleCount,
            other => {
                return Err(Error::Config(format!(
                    "unknown weighting {other:?} (use `pairs` or `samples`)"
                )))
            }
        },
    };

    let (table, meta) = load_samples(&composition, &meta_path, policy)?;
    let result = tune_r(&table, &meta, &opts)?;

    // JSON summary
    let per_cruise: Vec<serde_json::Value> = result
        .per_cruise
        .iter()
        .map(|f| {
            serde_json::json!({
                "cruise": f.cruise,
                "lat_fit": regression_json(&f.lat_fit),
                "depth_fit": regression_json(&f.depth_fit),
                "n_pairs_lat": f.n_pairs_lat,
                "n_pairs_depth": f.n_pairs_depth,
                "n_samples": f.n_samples,
            })
        })
        .collect();
    let summary = serde_json::json!({
        "b1": result.b1,
        "b2": result.b2,
        "r": result.r,
        "lat_window": opts.lat_window,
        "depth_window": opts.depth_window,
        "significance": opts.significance,
        "per_cruise": per_cruise,
    });
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    json.push('\n');
    write_text(&ctx.out("tune_r.json"), &json)?;

    // per-cruise regression CSV
    let mut csv_out =
        String::from("cruise,dimension,n_pairs,slope,intercept,slope_std_err,t_stat,p_value\n");
    for f in &result.per_cruise {
        for (dim, fit, n_pairs) in [
            ("latitude", &f.lat_fit, f.n_pairs_lat),
            ("depth", &f.depth_fit, f.n_pairs_depth),
        ] {
            match fit {
                Some(reg) => {
                    let _ = writeln!(
                        csv_out,
                        "{},{dim},{n_pairs},{},{},{},{},{}",
                        csv_field(&f.cruise),
                        reg.slope,
                        reg.intercept,
                        reg.slope_std_err,
                        reg.t_stat,
                        reg.p_value
                    );
                }
                None => {
                    let _ = writeln!(csv_out, "{},{dim},{n_pairs},,,,,", csv_field(&f.cruise));
                }
            }
        }
    }
    write_text(&ctx.out("tune_r_fits.csv"), &csv_out)?;

    // scatter/fit panels: distance vs depth difference and vs latitude
    // difference, colored by cruise
    let cruise_names: Vec<String> = result.per_cruise.iter().map(|f| f.cruise.clone()).collect();
    let (lat_points, depth_points, lat_fits, depth_fits) =
        scatter_data(&table, &meta, &opts, &cruise_names, &result);
    write_text(
        &ctx.out("tune_r_latitude.svg"),
        &svg::scatter_fit_svg(
            "distance decay over latitude difference",
            "latitude difference (deg)",
            &lat_points,
            &lat_fits,
            &cruise_names,
        ),
    )?;
    write_text(
        &ctx.out("tune_r_depth.svg"),
        &svg::scatter_fit_svg(
            "distance decay over depth difference",
            "depth difference (m)",
            &depth_points,
            &depth_fits,
            &cruise_names,
        ),
    )?;

    let mut manifest = Manifest::new("tune-r");
    manifest.add_input("composition", &composition)?;
    manifest.add_input("meta", &meta_path)?;
    manifest.add_param("lat_window", opts.lat_window);
    manifest.add_param("depth_window", opts.depth_window);
    manifest.add_param("significance", opts.significance);
    manifest.add_param("zero_policy", policy);
    for name in ["tune_r.json", "tune_r_fits.csv", "tune_r_latitude.svg", "tune_r_depth.svg"] {
        manifest.add_output(name, &ctx.out(name))?;
    }
    manifest.write(&ctx.out("manifest.json"))?;

    println!("b1 = {}", result.b1);
    println!("b2 = {}", result.b2);
    println!("r = {}", result.r);
    Ok(())
}

/// Qualifying pairs per cruise for the tune-r scatter panels.
#[allow(clippy::type_complexity)]
fn scatter_data(
    table: &CompositionTable,
    meta: &[SampleMeta],
    opts: &RTuningOptions,
    cruise_names: &[String],
    result: &crate::tuning::RTuningResult,
) -> (
    Vec<(f64, f64, usize)>,
    Vec<(f64, f64, usize)>,
    Vec<(usize, f64, f64)>,
    Vec<(usize, f64, f64)>,
) {
    use crate::distance::{clr_rows, euclidean};
    let clr = clr_rows(table);
    let mut lat_points = Vec::new();
    let mut depth_points = Vec::new();
    for (ci, cruise) in cruise_names.iter().enumerate() {
        let idx: Vec<usize> = (0..meta.len()).filter(|&i| &meta[i].cruise == cruise).collect();
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                let dlat = (meta[i].latitude - meta[j].latitude).abs();
                let ddepth = (meta[i].depth - meta[j].depth).abs();
                if dlat <= opts.lat_window && ddepth <= opts.depth_window {
                    let y = euclidean(&clr[i], &clr[j]);
                    lat_points.push((dlat, y, ci));
                    depth_points.push((ddepth, y, ci));
                }
            }
        }
    }
    let mut lat_fits = Vec::new();
    let mut depth_fits = Vec::new();
    for (ci, f) in result.per_cruise.iter().enumerate() {
        if let Some(reg) = &f.lat_fit {
            lat_fits.push((ci, reg.intercept, reg.slope));
        }
        if let Some(reg) = &f.depth_fit {
            depth_fits.push((ci, reg.intercept, reg.slope));
        }
    }
    (lat_points, depth_points, lat_fits, depth_fits)
}

fn cmd_tune_alpha(args: TuneAlphaArgs) -> Result<()> {
    let ctx = Ctx::new(&args.common)?;
    let composition = ctx.require_file("composition", &args.composition)?;
    let meta_path = ctx.require_file("meta", &args.meta)?;
    let policy = parse_zero_policy(&ctx, &args.zero_policy)?;
    let r = validate_r(ctx.require("r", &args.r)?)?;
    let alphas = parse_f64_list(&ctx.with_default(
        "alphas",
        &args.alphas,
        "0,0.05,0.1,0.15,0.2,0.3,0.4,0.5,0.75,1".to_string(),
    )?)?;
    let l_replicates = ctx.with_default("l-replicates", &args.l_replicates, 100)?;
    let seed = ctx.with_default("seed", &args.seed, 0)?;

    let (table, meta) = load_samples(&composition, &meta_path, policy)?;
    let curve = alpha_saturation_curve(&table, &meta, r, &alphas, l_replicates, seed)?;

    let mut csv_out = String::from("alpha,replicate,score,null_score\n");
    for (a, &alpha) in curve.alphas.iter().enumerate() {
        for l in 0..l_replicates {
            let _ = writeln!(
                csv_out,
                "{alpha},{l},{},{}",
                curve.scores[a][l], curve.null_scores[a][l]
            );
        }
    }
    write_text(&ctx.out("alpha_scores.csv"), &csv_out)?;
    write_text(&ctx.out("alpha_scores.svg"), &svg::alpha_curve_svg(&curve))?;

    let mut manifest = Manifest::new("tune-alpha");
    manifest.add_input("composition", &composition)?;
    manifest.add_input("meta", &meta_path)?;
    manifest.add_param("r", r);
    manifest.add_param("alphas", alphas.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(","));
    manifest.add_param("l_replicates", l_replicates);
    manifest.add_param("seed", seed);
    manifest.add_param("zero_policy", policy);
    manifest.add_output("alpha_scores.csv", &ctx.out("alpha_scores.csv"))?;
    manifest.add_output("alpha_scores.svg", &ctx.out("alpha_scores.svg"))?;
    manifest.write(&ctx.out("manifest.json"))?;

    match curve.suggested_alpha {
        Some(alpha) => println!("suggested alpha = {alpha} (largest grid value with overlapping score bands)"),
        None => println!("no alpha in the grid has overlapping score bands; review alpha_scores.svg"),
    }
    Ok(())
}

fn cmd_tune_k(args: TuneKArgs) -> Result<()> {
    let ctx = Ctx::new(&args.common)?;
    let composition = ctx.require_file("composition", &args.composition)?;
    let meta_path = ctx.require_file("meta", &args.meta)?;
    let policy = parse_zero_policy(&ctx, &args.zero_policy)?;
    let r = validate_r(ctx.require("r", &args.r)?)?;
    let alpha = validate_alpha(ctx.require("alpha", &args.alpha)?)?;
    let ks = parse_usize_list(&ctx.with_default(
        "ks",
        &args.ks,
        "1,2,3,4,5,6,7,8,9,10,11,12".to_string(),
    )?)?;

    let (table, meta) = load_samples(&composition, &meta_path, policy)?;
    let d_bio = bio_distance_matrix(&table);
    let d_spatial = spatial_distance_matrix(&meta, r)?;
    let d_alpha = mix_distance_matrix(&d_bio, &d_spatial, alpha)?;
    let curve = k_elbow_curve(&d_alpha, &ks)?;

    let mut csv_out = String::from("K,wcd\n");
    for (pos, &k) in curve.ks.iter().enumerate() {
        let _ = writeln!(csv_out, "{k},{}", curve.wcd[pos]);
    }
    write_text(&ctx.out("k_curve.csv"), &csv_out)?;
    write_text(&ctx.out("k_curve.svg"), &svg::k_curve_svg(&curve))?;

    let mut manifest = Manifest::new("tune-k");
    manifest.add_input("composition", &composition)?;
    manifest.add_input("meta", &meta_path)?;
    manifest.add_param("r", r);
    manifest.add_param("alpha", alpha);
    manifest.add_param("ks", curve.ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","));
    manifest.add_param("zero_policy", policy);
    manifest.add_output("k_curve.csv", &ctx.out("k_curve.csv"))?;
    manifest.add_output("k_curve.svg", &ctx.out("k_curve.svg"))?;
    manifest.write(&ctx.out("manifest.json"))?;

    match curve.suggested_k {
        Some(k) => println!("suggested K = {k} (sharpest elbow; inspect k_curve.svg before committing)"),
        None => println!("K grid too short for an elbow suggestion; inspect k_curve.svg"),
    }
    Ok(())
}

fn run_clustering(
    table: &CompositionTable,
    meta: &[SampleMeta],
    r: f64,
    alpha: f64,
    k_clusters: usize,
) -> Result<ClusterResult> {
    let d_bio = bio_distance_matrix(table);
    let d_spatial = spatial_distance_matrix(meta, r)?;
    let d_alpha = mix_distance_matrix(&d_bio, &d_spatial, alpha)?;
    let latitudes: Vec<f64> = meta.iter().map(|m| m.latitude).collect();
    cluster(&d_alpha, k_clusters, Some(&latitudes))
}

fn cmd_cluster(args: ClusterArgs) -> Result<()> {
    let ctx = Ctx::new(&args.common)?;
    let composition = ctx.require_file("composition", &args.composition)?;
    let meta_path = ctx.require_file("meta", &args.meta)?;
    let policy = parse_zero_policy(&ctx, &args.zero_policy)?;
    let r = validate_r(ctx.require("r", &args.r)?)?;
    let alpha = validate_alpha(ctx.require("alpha", &args.alpha)?)?;
    let k_clusters = ctx.require("k-clusters", &args.k_clusters)?;

    let (table, meta) = load_samples(&composition, &meta_path, policy)?;
    let result = run_clustering(&table, &meta, r, alpha, k_clusters)?;

    write_text(
        &ctx.out("memberships.csv"),
        &memberships_csv(table.sample_ids(), &result.memberships),
    )?;
    let mut dendro = String::from("step,left,right,height\n");
    for (t, m) in result.dendrogram.merges.iter().enumerate() {
        let _ = writeln!(dendro, "{t},{},{},{}", m.left, m.right, m.height);
    }
    write_text(&ctx.out("dendrogram.csv"), &dendro)?;

    let mut manifest = Manifest::new("cluster");
    manifest.add_input("composition", &composition)?;
    manifest.add_input("meta", &meta_path)?;
    manifest.add_param("r", r);
    manifest.add_param("alpha", alpha);
    manifest.add_param("k_clusters", k_clusters);
    manifest.add_param("zero_policy", policy);
    manifest.add_output("memberships.csv", &ctx.out("memberships.csv"))?;
    manifest.add_output("dendrogram.csv", &ctx.out("dendrogram.csv"))?;
    manifest.write(&ctx.out("manifest.json"))?;

    println!("clustered {} samples into K = {k_clusters}", table.n_samples());
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let ctx = Ctx::new(&args.common)?;
    let meta_path = ctx.require_file("meta", &args.meta)?;
    let grid_path = ctx.require_file("grid", &args.grid)?;
    let memberships_path = ctx.require_file("memberships", &args.memberships)?;
    let composition = ctx.require_file("composition", &args.composition)?;
    let policy = parse_zero_policy(&ctx, &args.zero_policy)?;
    let r = validate_r(ctx.require("r", &args.r)?)?;
    let k_neighbors = ctx.require("k-neighbors", &args.k_neighbors)?;
    let domain = parse_rescale_domain(&ctx, &args.rescale_domain)?;
    warn_k_neighbors(k_neighbors);

    let (_, meta) = load_samples(&composition, &meta_path, policy)?;
    let grid = load_grid(&grid_path)?;
    let memberships = load_memberships_csv(&memberships_path, &meta)?;
    let map = predict(&grid, &meta, &memberships, k_neighbors, r, domain)?;

    write_text(&ctx.out("province.csv"), &province_csv(&grid, &map))?;
    write_text(
        &ctx.out("province.svg"),
        &svg::province_raster_svg(&grid, &map.memberships, None),
    )?;

    let mut manifest = Manifest::new("predict");
    manifest.add_input("meta", &meta_path)?;
    manifest.add_input("grid", &grid_path)?;
    manifest.add_input("memberships", &memberships_path)?;
    manifest.add_param("r", r);
    manifest.add_param("k_neighbors", k_neighbors);
    manifest.add_output("province.csv", &ctx.out("province.csv"))?;
    manifest.add_output("province.svg", &ctx.out("province.svg"))?;
    manifest.write(&ctx.out("manifest.json"))?;

    println!("predicted {} grid points", grid.len());
    Ok(())
}

fn cmd_stability(args: StabilityArgs) -> Result<()> {
    let ctx = Ctx::new(&args.common)?;
    let composition = ctx.require_file("composition", &args.composition)?;
    let meta_path = ctx.require_file("meta", &args.meta)?;
    let grid_path = ctx.require_file("grid", &args.grid)?;
    let policy = parse_zero_policy(&ctx, &args.zero_policy)?;
    let params = StabilityParams {
        r: validate_r(ctx.require("r", &args.r)?)?,
        alpha: validate_alpha(ctx.require("alpha", &args.alpha)?)?,
        k_clusters: ctx.require("k-clusters", &args.k_clusters)?,
        k_neighbors: ctx.require("k-neighbors", &args.k_neighbors)?,
        fraction: ctx.with_default("fraction", &args.fraction, 0.7)?,
        replicates: ctx.with_default("replicates", &args.replicates, 100)?,
        seed: ctx.with_default("seed", &args.seed, 0)?,
    };
    warn_k_neighbors(params.k_neighbors);

    let (table, meta) = load_samples(&composition, &meta_path, policy)?;
    let grid = load_grid(&grid_path)?;
    let map = run_stability(&table, &meta, &grid, &params)?;

    write_text(&ctx.out("stability.csv"), &stability_csv(&grid, &map))?;
    write_text(
        &ctx.out("stability.svg"),
        &svg::province_raster_svg(&grid, &map.modal_cluster, Some(&map.stability)),
    )?;

    let mut manifest = Manifest::new("stability");
    manifest.add_input("composition", &composition)?;
    manifest.add_input("meta", &meta_path)?;
    manifest.add_input("grid", &grid_path)?;
    manifest.add_param("r", params.r);
    manifest.add_param("alpha", params.alpha);
    manifest.add_param("k_clusters", params.k_clusters);
    manifest.add_param("k_neighbors", params.k_neighbors);
    manifest.add_param("fraction", params.fraction);
    manifest.add_param("replicates", params.replicates);
    manifest.add_param("seed", params.seed);
    manifest.add_param("zero_policy", policy);
    manifest.add_output("stability.csv", &ctx.out("stability.csv"))?;
    manifest.add_output("stability.svg", &ctx.out("stability.svg"))?;
    manifest.write(&ctx.out("manifest.json"))?;

    let min_stab = map.stability.iter().cloned().fold(1.0, f64::min);
    println!(
        "stability over {} replicates; minimum Stab_j = {min_stab}",
        params.replicates
    );
    Ok(())
}

fn write_report_outputs(
    ctx: &Ctx,
    table: &CompositionTable,
    meta: &[SampleMeta],
    memberships: &[u32],
    group_map: Option<&HashMap<String, String>>,
    manifest: &mut Manifest,
) -> Result<()> {
    let any_labels = meta.iter().any(|m| m.external_province.is_some());
    if any_labels {
        let tab = cross_tabulate(memberships, meta)?;
        if tab.n_unlabeled > 0 {
            eprintln!(
                "warning: {} samples lack an external province label and were excluded from the cross-tabulation",
                tab.n_unlabeled
            );
        }
        let mut csv_out = String::from("external_province");
        for label in &tab.col_labels {
            let _ = write!(csv_out, ",{label}");
        }
        csv_out.push('\n');
        for (ri, row_label) in tab.row_labels.iter().enumerate() {
            let _ = write!(csv_out, "{}", csv_field(row_label));
            for v in &tab.values[ri] {
                let _ = write!(csv_out, ",{v}");
            }
            csv_out.push('\n');
        }
        write_text(&ctx.out("crosstab.csv"), &csv_out)?;
        write_text(&ctx.out("crosstab.svg"), &svg::crosstab_svg(&tab))?;
        manifest.add_output("crosstab.csv", &ctx.out("crosstab.csv"))?;
        manifest.add_output("crosstab.svg", &ctx.out("crosstab.svg"))?;
    }

    let empty = HashMap::new();
    let mc = mean_cluster_composition(table, memberships, group_map.unwrap_or(&empty))?;
    let mut csv_out = String::from("cluster");
    for g in &mc.groups {
        let _ = write!(csv_out, ",{}", csv_field(g));
    }
    csv_out.push('\n');
    for (row, label) in mc.values.iter().zip(&mc.clusters) {
        let _ = write!(csv_out, "{label}");
        for v in row {
            let _ = write!(csv_out, ",{v}");
        }
        csv_out.push('\n');
    }
    write_text(&ctx.out("mean_composition.csv"), &csv_out)?;
    write_text(&ctx.out("mean_composition.svg"), &svg::stacked_bar_svg(&mc))?;
    manifest.add_output("mean_composition.csv", &ctx.out("mean_composition.csv"))?;
    manifest.add_output("mean_composition.svg", &ctx.out("mean_composition.svg"))?;
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let ctx = Ctx::new(&args.common)?;
    let composition = ctx.require_file("composition", &args.composition)?;
    let meta_path = ctx.require_file("meta", &args.meta)?;
    let memberships_path = ctx.require_file("memberships", &args.memberships)?;
    let group_map_path = ctx.optional_file("group-map", &args.group_map)?;
    let policy = parse_zero_policy(&ctx, &args.zero_policy)?;

    let (table, meta) = load_samples(&composition, &meta_path, policy)?;
    let memberships = load_memberships_csv(&memberships_path, &meta)?;
    let group_map = group_map_path.as_deref().map(load_group_map).transpose()?;

    let mut manifest = Manifest::new("report");
    manifest.add_input("composition", &composition)?;
    manifest.add_input("meta", &meta_path)?;
    manifest.add_input("memberships", &memberships_path)?;
    if let Some(p) = &group_map_path {
        manifest.add_input("group_map", p)?;
    }
    write_report_outputs(&ctx, &table, &meta, &memberships, group_map.as_ref(), &mut manifest)?;
    manifest.write(&ctx.out("manifest.json"))?;
    println!("report written to {}", ctx.out_dir.display());
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let ctx = Ctx::new(&args.common)?;
    let spec = SyntheticSpec {
        n_provinces: ctx.with_default("provinces", &args.provinces, 3)?,
        n_samples: ctx.with_default("samples", &args.samples, 150)?,
        n_asvs: ctx.with_default("asvs", &args.asvs, 300)?,
        n_grid: ctx.with_default("grid-points", &args.grid_points, 2000)?,
        noise: ctx.with_default("noise", &args.noise, 0.003)?,
        seed: ctx.with_default("seed", &args.seed, 0)?,
    };
    let data = generate_synthetic(&spec)?;
    write_synthetic_csvs(&ctx, &data)?;

    let mut manifest = Manifest::new("synth");
    manifest.add_param("provinces", spec.n_provinces);
    manifest.add_param("samples", spec.n_samples);
    manifest.add_param("asvs", spec.n_asvs);
    manifest.add_param("grid_points", spec.n_grid);
    manifest.add_param("noise", spec.noise);
    manifest.add_param("seed", spec.seed);
    for name in [
        "composition.csv",
        "meta.csv",
        "grid.csv",
        "sample_truth.csv",
        "grid_truth.csv",
    ] {
        manifest.add_output(name, &ctx.out(name))?;
    }
    manifest.write(&ctx.out("manifest.json"))?;
    println!(
        "synthetic dataset: {} samples x {} ASVs, {} grid points, {} provinces",
        spec.n_samples, spec.n_asvs, spec.n_grid, spec.n_provinces
    );
    Ok(())
}

fn write_synthetic_csvs(ctx: &Ctx, data: &SyntheticData) -> Result<()> {
    let table = &data.table;
    let mut comp = String::from("sample_id");
    for asv in table.asv_ids() {
        let _ = write!(comp, ",{}", csv_field(asv));
    }
    comp.push('\n');
    for i in 0..table.n_samples() {
        let _ = write!(comp, "{}", csv_field(&table.sample_ids()[i]));
        for v in table.row(i) {
            let _ = write!(comp, ",{v}");
        }
        comp.push('\n');
    }
    write_text(&ctx.out("composition.csv"), &comp)?;

    let mut meta_out =
        String::from("sample_id,latitude,depth,temperature,salinity,cruise,external_province\n");
    for m in &data.meta {
        let _ = writeln!(
            meta_out,
            "{},{},{},{},{},{},{}",
            csv_field(&m.sample_id),
            m.latitude,
            m.depth,
            m.temperature,
            m.salinity,
            csv_field(&m.cruise),
            csv_field(m.external_province.as_deref().unwrap_or(""))
        );
    }
    write_text(&ctx.out("meta.csv"), &meta_out)?;

    let mut grid_out = String::from("grid_id,latitude,depth,temperature,salinity\n");
    for j in 0..data.grid.len() {
        let _ = writeln!(
            grid_out,
            "{},{},{},{},{}",
            csv_field(&data.grid.grid_ids[j]),
            data.grid.latitude[j],
            data.grid.depth[j],
            data.grid.temperature[j],
            data.grid.salinity[j]
        );
    }
    write_text(&ctx.out("grid.csv"), &grid_out)?;

    let mut st = String::from("sample_id,province\n");
    for (i, &p) in data.sample_truth.iter().enumerate() {
        let _ = writeln!(st, "{},{p}", csv_field(&table.sample_ids()[i]));
    }
    write_text(&ctx.out("sample_truth.csv"), &st)?;

    let mut gt = String::from("grid_id,province\n");
    for (j, &p) in data.grid_truth.iter().enumerate() {
        let _ = writeln!(gt, "{},{p}", csv_field(&data.grid.grid_ids[j]));
    }
    write_text(&ctx.out("grid_truth.csv"), &gt)?;
    Ok(())
}

fn cmd_pipeline(args: PipelineArgs) -> Result<()> {
    let ctx = Ctx::new(&args.common)?;
    let composition = ctx.require_file("composition", &args.composition)?;
    let meta_path = ctx.require_file("meta", &args.meta)?;
    let grid_path = ctx.require_file("grid", &args.grid)?;
    let group_map_path = ctx.optional_file("group-map", &args.group_map)?;
    let policy = parse_zero_policy(&ctx, &args.zero_policy)?;
    // pipeline runs only with explicit hyperparameters; tuning subcommands
    // print suggestions but never feed them in silently
    let r = validate_r(ctx.require("r", &args.r)?)?;
    let alpha = validate_alpha(ctx.require("alpha", &args.alpha)?)?;
    let k_clusters = ctx.require("k-clusters", &args.k_clusters)?;
    let k_neighbors = ctx.require("k-neighbors", &args.k_neighbors)?;
    let domain = parse_rescale_domain(&ctx, &args.rescale_domain)?;
    warn_k_neighbors(k_neighbors);

    let stage = |name: &str, e: Error| Error::Data(format!("[{name}] {e}"));

    let (table, meta) =
        load_samples(&composition, &meta_path, policy).map_err(|e| stage("load", e))?;
    let grid = load_grid(&grid_path).map_err(|e| stage("load", e))?;
    let group_map = group_map_path
        .as_deref()
        .map(load_group_map)
        .transpose()
        .map_err(|e| stage("load", e))?;

    let result =
        run_clustering(&table, &meta, r, alpha, k_clusters).map_err(|e| stage("cluster", e))?;
    let map = predict(&grid, &meta, &result.memberships, k_neighbors, r, domain)
        .map_err(|e| stage("predict", e))?;

    write_text(
        &ctx.out("memberships.csv"),
        &memberships_csv(table.sample_ids(), &result.memberships),
    )?;
    write_text(&ctx.out("province.csv"), &province_csv(&grid, &map))?;
    write_text(
        &ctx.out("province.svg"),
        &svg::province_raster_svg(&grid, &map.memberships, None),
    )?;

    let mut manifest = Manifest::new("pipeline");
    manifest.add_input("composition", &composition)?;
    manifest.add_input("meta", &meta_path)?;
    manifest.add_input("grid", &grid_path)?;
    if let Some(p) = &group_map_path {
        manifest.add_input("group_map", p)?;
    }
    manifest.add_param("r", r);
    manifest.add_param("alpha", alpha);
    manifest.add_param("k_clusters", k_clusters);
    manifest.add_param("k_neighbors", k_neighbors);
    manifest.add_param("zero_policy", policy);
    manifest.add_param("rescale_domain", format!("{domain:?}"));
    manifest.add_output("memberships.csv", &ctx.out("memberships.csv"))?;
    manifest.add_output("province.csv", &ctx.out("province.csv"))?;
    manifest.add_output("province.svg", &ctx.out("province.svg"))?;

    write_report_outputs(&ctx, &table, &meta, &result.memberships, group_map.as_ref(), &mut manifest)
        .map_err(|e| stage("report", e))?;
    manifest.write(&ctx.out("manifest.json"))?;

    println!(
        "pipeline complete: {} samples, K = {k_clusters}, {} grid points",
        table.n_samples(),
        grid.len()
    );
    Ok(())
}
