//! Sample and grid ingestion: compositional closure, zero replacement, and
//! the ASV subsampling used by the stability analysis.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Tolerance on row sums of a closed composition table.
pub const CLOSURE_TOL: f64 = 1e-12;

/// How zeros are removed before log-ratio analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroPolicy {
    /// Replace each zero fraction with `delta = 0.5 * min nonzero fraction`
    /// of the whole table, then renormalize each row.
    Multiplicative,
    /// Add the given pseudocount to every fraction, then renormalize.
    Pseudocount(f64),
}

impl Default for ZeroPolicy {
    fn default() -> Self {
        ZeroPolicy::Multiplicative
    }
}

impl FromStr for ZeroPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "multiplicative" {
            return Ok(ZeroPolicy::Multiplicative);
        }
        if let Some(v) = s.strip_prefix("pseudocount:") {
            let c: f64 = v
                .parse()
                .map_err(|_| Error::Config(format!("bad pseudocount value {v:?}")))?;
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::Config("pseudocount must be positive".into()));
            }
            return Ok(ZeroPolicy::Pseudocount(c));
        }
        Err(Error::Config(format!(
            "unknown zero policy {s:?} (use `multiplicative` or `pseudocount:<value>`)"
        )))
    }
}

impl fmt::Display for ZeroPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroPolicy::Multiplicative => write!(f, "multiplicative"),
            ZeroPolicy::Pseudocount(c) => write!(f, "pseudocount:{c}"),
        }
    }
}

/// n x d table of strictly positive relative abundances, rows summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionTable {
    sample_ids: Vec<String>,
    asv_ids: Vec<String>,
    /// row-major n x d
    values: Vec<f64>,
}

impl CompositionTable {
    /// Wrap an already-closed table, validating the invariants: strictly
    /// positive entries, row sums within 1e-12 of 1, unique ids, n >= 2,
    /// d >= 2.
    pub fn new(sample_ids: Vec<String>, asv_ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = sample_ids.len();
        let d = asv_ids.len();
        if n < 2 || d < 2 {
            return Err(Error::Data(format!(
                "composition table needs n >= 2 samples and d >= 2 ASVs, got {n} x {d}"
            )));
        }
        if values.len() != n * d {
            return Err(Error::Data(format!(
                "composition table buffer has {} values, expected {}",
                values.len(),
                n * d
            )));
        }
        check_unique(&sample_ids, "sample id")?;
        check_unique(&asv_ids, "ASV id")?;
        for (i, row) in values.chunks(d).enumerate() {
            let mut sum = 0.0;
            for &v in row {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Data(format!(
                        "sample {:?}: entry {v} is not strictly positive",
                        sample_ids[i]
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > CLOSURE_TOL {
                return Err(Error::Data(format!(
                    "sample {:?}: row sums to {sum}, not 1",
                    sample_ids[i]
                )));
            }
        }
        Ok(CompositionTable {
            sample_ids,
            asv_ids,
            values,
        })
    }

    /// Close raw nonnegative rows (counts or fractions), apply the zero
    /// policy, and renormalize.
    pub fn from_raw(
        sample_ids: Vec<String>,
        asv_ids: Vec<String>,
        mut values: Vec<f64>,
        policy: ZeroPolicy,
    ) -> Result<Self> {
        let n = sample_ids.len();
        let d = asv_ids.len();
        if values.len() != n * d {
            return Err(Error::Data(format!(
                "composition table buffer has {} values, expected {}",
                values.len(),
                n * d
            )));
        }
        for (i, row) in values.chunks_mut(d).enumerate() {
            let mut sum = 0.0;
            for &v in row.iter() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Data(format!(
                        "sample {:?}: invalid abundance {v}",
                        sample_ids[i]
                    )));
                }
                sum += v;
            }
            if sum == 0.0 {
                return Err(Error::Data(format!(
                    "sample {:?}: row of all zeros",
                    sample_ids[i]
                )));
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }

        if values.iter().any(|&v| v == 0.0) {
            match policy {
                ZeroPolicy::Multiplicative => {
                    let delta = 0.5
                        * values
                            .iter()
                            .filter(|&&v| v > 0.0)
                            .fold(f64::INFINITY, |a, &b| a.min(b));
                    for v in values.iter_mut() {
                        if *v == 0.0 {
                            *v = delta;
                        }
                    }
                }
                ZeroPolicy::Pseudocount(c) => {
                    for v in values.iter_mut() {
                        *v += c;
                    }
                }
            }
            for row in values.chunks_mut(d) {
                let sum: f64 = row.iter().sum();
                for v in row.iter_mut() {
                    *v /= sum;
                }
            }
        }

        CompositionTable::new(sample_ids, asv_ids, values)
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_asvs(&self) -> usize {
        self.asv_ids.len()
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn asv_ids(&self) -> &[String] {
        &self.asv_ids
    }

    /// Composition of sample `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_asvs();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Per-sample location, abiotic measurements and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMeta {
    pub sample_id: String,
    /// degrees, in [-90, 90]
    pub latitude: f64,
    /// meters, positive downward
    pub depth: f64,
    /// degrees Celsius
    pub temperature: f64,
    /// PSU
    pub salinity: f64,
    pub cruise: String,
    pub external_province: Option<String>,
}

/// The fine prediction grid: spatial position plus abiotic fields per point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub grid_ids: Vec<String>,
    pub latitude: Vec<f64>,
    pub depth: Vec<f64>,
    pub temperature: Vec<f64>,
    pub salinity: Vec<f64>,
}

impl GridSpec {
    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.grid_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid_ids.is_empty()
    }
}

/// Load a composition CSV (`sample_id,<asv_1>,...,<asv_d>`) and its companion
/// meta CSV, apply closure and zero replacement, and return the two in the
/// composition file's sample order.
pub fn load_samples(
    composition_csv: &Path,
    meta_csv: &Path,
    policy: ZeroPolicy,
) -> Result<(CompositionTable, Vec<SampleMeta>)> {
    let mut reader = csv::Reader::from_path(composition_csv)?;
    let headers = reader.headers()?.clone();
    if headers.is_empty() || headers.get(0) != Some("sample_id") {
        return Err(Error::Data(format!(
            "{}: first column must be `sample_id`",
            composition_csv.display()
        )));
    }
    let asv_ids: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    if asv_ids.len() < 2 {
        return Err(Error::Data(format!(
            "{}: need at least 2 ASV columns",
            composition_csv.display()
        )));
    }

    let mut sample_ids = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != asv_ids.len() + 1 {
            return Err(Error::Data(format!(
                "{}: row {:?} has {} fields, expected {}",
                composition_csv.display(),
                record.get(0).unwrap_or(""),
                record.len(),
                asv_ids.len() + 1
            )));
        }
        let id = record.get(0).unwrap().to_string();
        for field in record.iter().skip(1) {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Data(format!(
                    "{}: sample {id:?}: non-numeric cell {field:?}",
                    composition_csv.display()
                ))
            })?;
            values.push(v);
        }
        sample_ids.push(id);
    }
    if sample_ids.is_empty() {
        return Err(Error::Data(format!(
            "{}: no sample rows",
            composition_csv.display()
        )));
    }
    check_unique(&sample_ids, "sample id")?;

    let meta_by_id = load_meta(meta_csv)?;
    let mut meta = Vec::with_capacity(sample_ids.len());
    for id in &sample_ids {
        let m = meta_by_id
            .iter()
            .find(|m| &m.sample_id == id)
            .ok_or_else(|| {
                Error::Data(format!("{}: no meta row for sample {id:?}", meta_csv.display()))
            })?;
        meta.push(m.clone());
    }
    for m in &meta_by_id {
        if !sample_ids.contains(&m.sample_id) {
            return Err(Error::Data(format!(
                "{}: meta row for unknown sample {:?}",
                meta_csv.display(),
                m.sample_id
            )));
        }
    }

    let table = CompositionTable::from_raw(sample_ids, asv_ids, values, policy)?;
    Ok((table, meta))
}

/// True when any raw row sums over 1.5, the heuristic for count data.
/// Closure treats counts and fractions identically; this only informs logging.
pub fn looks_like_counts(values: &[f64], d: usize) -> bool {
    values.chunks(d).any(|row| row.iter().sum::<f64>() > 1.5)
}

fn load_meta(path: &Path) -> Result<Vec<SampleMeta>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("{}: missing column `{name}`", path.display())))
    };
    let id_col = col("sample_id")?;
    let lat_col = col("latitude")?;
    let depth_col = col("depth")?;
    let temp_col = col("temperature")?;
    let sal_col = col("salinity")?;
    let cruise_col = col("cruise")?;
    let ext_col = headers.iter().position(|h| h == "external_province");

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let id = record.get(id_col).unwrap_or("").to_string();
        let num = |idx: usize, name: &str| -> Result<f64> {
            let field = record.get(idx).unwrap_or("");
            field.trim().parse().map_err(|_| {
                Error::Data(format!(
                    "{}: sample {id:?}: non-numeric {name} {field:?}",
                    path.display()
                ))
            })
        };
        let latitude = num(lat_col, "latitude")?;
        if !(latitude.abs() <= 90.0) {
            return Err(Error::Data(format!(
                "{}: sample {id:?}: latitude out of range ({latitude})",
                path.display()
            )));
        }
        let depth = num(depth_col, "depth")?;
        if !depth.is_finite() {
            return Err(Error::Data(format!(
                "{}: sample {id:?}: depth must be finite",
                path.display()
            )));
        }
        let external_province = ext_col
            .and_then(|c| record.get(c))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string);
        out.push(SampleMeta {
            sample_id: id.clone(),
            latitude,
            depth,
            temperature: num(temp_col, "temperature")?,
            salinity: num(sal_col, "salinity")?,
            cruise: record.get(cruise_col).unwrap_or("").to_string(),
            external_province,
        });
    }
    let ids: Vec<String> = out.iter().map(|m| m.sample_id.clone()).collect();
    check_unique(&ids, "sample id")?;
    Ok(out)
}

/// Load a grid CSV (`grid_id,latitude,depth,temperature,salinity`).
pub fn load_grid(path: &Path) -> Result<GridSpec> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("{}: missing column `{name}`", path.display())))
    };
    let id_col = col("grid_id")?;
    let lat_col = col("latitude")?;
    let depth_col = col("depth")?;
    let temp_col = col("temperature")?;
    let sal_col = col("salinity")?;

    let mut grid = GridSpec {
        grid_ids: Vec::new(),
        latitude: Vec::new(),
        depth: Vec::new(),
        temperature: Vec::new(),
        salinity: Vec::new(),
    };
    for record in reader.records() {
        let record = record?;
        let id = record.get(id_col).unwrap_or("").to_string();
        let num = |idx: usize, name: &str| -> Result<f64> {
            let field = record.get(idx).unwrap_or("");
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Data(format!(
                    "{}: grid point {id:?}: non-numeric {name} {field:?}",
                    path.display()
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "{}: grid point {id:?}: non-finite {name}",
                    path.display()
                )));
            }
            Ok(v)
        };
        grid.latitude.push(num(lat_col, "latitude")?);
        grid.depth.push(num(depth_col, "depth")?);
        grid.temperature.push(num(temp_col, "temperature")?);
        grid.salinity.push(num(sal_col, "salinity")?);
        grid.grid_ids.push(id);
    }
    if grid.is_empty() {
        return Err(Error::Data(format!("{}: empty grid", path.display())));
    }
    Ok(grid)
}

/// Keep `floor(d * fraction)` ASV columns chosen uniformly without
/// replacement (the same columns for every sample) and renormalize each row.
/// Deterministic in `seed`; `fraction = 1` returns the table unchanged.
pub fn subsample_asvs(table: &CompositionTable, fraction: f64, seed: u64) -> Result<CompositionTable> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!(
            "subsample fraction must be in (0, 1], got {fraction}"
        )));
    }
    let d = table.n_asvs();
    let keep = (d as f64 * fraction).floor() as usize;
    if keep < 2 {
        return Err(Error::Config(format!(
            "subsampling {d} ASVs at fraction {fraction} keeps {keep} columns; need at least 2"
        )));
    }
    if keep == d {
        return Ok(table.clone());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols = rand::seq::index::sample(&mut rng, d, keep).into_vec();
    cols.sort_unstable();

    let asv_ids: Vec<String> = cols.iter().map(|&c| table.asv_ids()[c].clone()).collect();
    let n = table.n_samples();
    let mut values = Vec::with_capacity(n * keep);
    for i in 0..n {
        let row = table.row(i);
        let sum: f64 = cols.iter().map(|&c| row[c]).sum();
        for &c in &cols {
            values.push(row[c] / sum);
        }
    }
    CompositionTable::new(table.sample_ids().to_vec(), asv_ids, values)
}

fn check_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::Data(format!("duplicate {what} {id:?}")));
        }
    }
    Ok(())
}
