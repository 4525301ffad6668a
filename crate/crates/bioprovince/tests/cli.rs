//! End-to-end tests of the command-line surface: exit codes, file formats,
//! flag/config precedence, and the documented warnings.

mod common;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;

use common::planted_slope_dataset;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bioprovince"))
}

fn synth_fixture(dir: &Path, provinces: usize, samples: usize, asvs: usize, grid: usize) -> PathBuf {
    let out = dir.join("fixture");
    let status = bin()
        .args([
            "synth",
            "--provinces",
            &provinces.to_string(),
            "--samples",
            &samples.to_string(),
            "--asvs",
            &asvs.to_string(),
            "--grid-points",
            &grid.to_string(),
            "--seed",
            "4",
            "--out-dir",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    out
}

#[test]
fn missing_required_option_exits_2() {
    let output = bin().args(["cluster"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("missing required option"), "{stderr}");
}

#[test]
fn alpha_out_of_range_exits_2_before_any_stage() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = synth_fixture(dir.path(), 2, 20, 20, 16);
    let out = dir.path().join("out");
    let output = bin()
        .args(["pipeline", "--composition"])
        .arg(fixture.join("composition.csv"))
        .arg("--meta")
        .arg(fixture.join("meta.csv"))
        .arg("--grid")
        .arg(fixture.join("grid.csv"))
        .args(["--r", "5", "--alpha", "1.5", "--k-clusters", "2", "--k-neighbors", "3", "--out-dir"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    // config validation failed before any stage output was produced
    assert!(!out.join("memberships.csv").exists());
}

#[test]
fn nonexistent_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["tune-r", "--composition", "no_such.csv", "--meta", "also_missing.csv", "--out-dir"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn malformed_grid_exits_3_naming_the_column() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = synth_fixture(dir.path(), 2, 20, 20, 16);
    let bad_grid = dir.path().join("bad_grid.csv");
    std::fs::write(&bad_grid, "grid_id,latitude,depth,temperature\ng1,0,0,20\n").unwrap();
    let memberships = dir.path().join("memberships.csv");
    std::fs::write(&memberships, "sample_id,membership\nS0001,1\n").unwrap();
    let output = bin()
        .args(["predict", "--composition"])
        .arg(fixture.join("composition.csv"))
        .arg("--meta")
        .arg(fixture.join("meta.csv"))
        .arg("--grid")
        .arg(&bad_grid)
        .arg("--memberships")
        .arg(&memberships)
        .args(["--r", "5", "--k-neighbors", "3", "--out-dir"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("salinity"), "{stderr}");
}

#[test]
fn latitude_out_of_range_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let comp = dir.path().join("comp.csv");
    std::fs::write(&comp, "sample_id,a,b\ns1,1,1\ns2,1,2\n").unwrap();
    let meta = dir.path().join("meta.csv");
    std::fs::write(
        &meta,
        "sample_id,latitude,depth,temperature,salinity,cruise\ns1,95,0,20,35,c\ns2,10,0,20,35,c\n",
    )
    .unwrap();
    let output = bin()
        .args(["cluster", "--composition"])
        .arg(&comp)
        .arg("--meta")
        .arg(&meta)
        .args(["--r", "5", "--alpha", "0.1", "--k-clusters", "2", "--out-dir"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("latitude out of range"));
}

fn write_planted_csvs(dir: &Path) -> (PathBuf, PathBuf) {
    let (table, meta) = planted_slope_dataset(5, 0.06, 0.002, 0.10);
    let comp_path = dir.join("comp.csv");
    let mut comp = String::from("sample_id");
    for asv in table.asv_ids() {
        let _ = write!(comp, ",{asv}");
    }
    comp.push('\n');
    for i in 0..table.n_samples() {
        let _ = write!(comp, "{}", table.sample_ids()[i]);
        for v in table.row(i) {
            let _ = write!(comp, ",{v}");
        }
        comp.push('\n');
    }
    std::fs::write(&comp_path, comp).unwrap();

    let meta_path = dir.join("meta.csv");
    let mut m = String::from("sample_id,latitude,depth,temperature,salinity,cruise\n");
    for row in &meta {
        let _ = writeln!(
            m,
            "{},{},{},{},{},{}",
            row.sample_id, row.latitude, row.depth, row.temperature, row.salinity, row.cruise
        );
    }
    std::fs::write(&meta_path, m).unwrap();
    (comp_path, meta_path)
}

#[test]
fn tune_r_recovers_planted_ratio_and_honors_window_flags() {
    let dir = tempfile::tempdir().unwrap();
    let (comp, meta) = write_planted_csvs(dir.path());
    let out = dir.path().join("out");
    let output = bin()
        .args(["tune-r", "--composition"])
        .arg(&comp)
        .arg("--meta")
        .arg(&meta)
        .arg("--out-dir")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("tune_r.json")).unwrap()).unwrap();
    let r = summary["r"].as_f64().unwrap();
    assert!((r - 30.0).abs() / 30.0 < 0.05, "r = {r}");
    // the paper windows are the defaults
    assert_eq!(summary["lat_window"].as_f64(), Some(3.0));
    assert_eq!(summary["depth_window"].as_f64(), Some(10.0));
    assert!(out.join("tune_r_fits.csv").exists());
    assert!(out.join("tune_r_latitude.svg").exists());
    assert!(out.join("tune_r_depth.svg").exists());

    // narrow windows exclude every pair -> data error, exit 3
    let output = bin()
        .args(["tune-r", "--composition"])
        .arg(&comp)
        .arg("--meta")
        .arg(&meta)
        .args(["--lat-window", "0.0001", "--depth-window", "0.0001", "--out-dir"])
        .arg(dir.path().join("out2"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn cluster_predict_report_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = synth_fixture(dir.path(), 2, 30, 25, 36);
    let cluster_out = dir.path().join("cluster");
    let status = bin()
        .args(["cluster", "--composition"])
        .arg(fixture.join("composition.csv"))
        .arg("--meta")
        .arg(fixture.join("meta.csv"))
        .args(["--r", "8", "--alpha", "0.1", "--k-clusters", "2", "--out-dir"])
        .arg(&cluster_out)
        .status()
        .unwrap();
    assert!(status.success());
    let memberships = std::fs::read_to_string(cluster_out.join("memberships.csv")).unwrap();
    assert!(memberships.starts_with("sample_id,membership\n"));
    assert_eq!(memberships.lines().count(), 31);

    let predict_out = dir.path().join("predict");
    let status = bin()
        .args(["predict", "--composition"])
        .arg(fixture.join("composition.csv"))
        .arg("--meta")
        .arg(fixture.join("meta.csv"))
        .arg("--grid")
        .arg(fixture.join("grid.csv"))
        .arg("--memberships")
        .arg(cluster_out.join("memberships.csv"))
        .args(["--r", "8", "--k-neighbors", "3", "--out-dir"])
        .arg(&predict_out)
        .status()
        .unwrap();
    assert!(status.success());
    let province = std::fs::read_to_string(predict_out.join("province.csv")).unwrap();
    assert!(province.starts_with("grid_id,latitude,depth,membership,k_prime,tie_broken,fallback_used\n"));
    assert_eq!(province.lines().count(), 37);

    // group map: first half of the ASVs in one group
    let group_map = dir.path().join("groups.csv");
    let mut gm = String::from("asv_id,group\n");
    for l in 1..=12 {
        let _ = writeln!(gm, "ASV{l:04},picos");
    }
    std::fs::write(&group_map, gm).unwrap();

    let report_out = dir.path().join("report");
    let status = bin()
        .args(["report", "--composition"])
        .arg(fixture.join("composition.csv"))
        .arg("--meta")
        .arg(fixture.join("meta.csv"))
        .arg("--memberships")
        .arg(cluster_out.join("memberships.csv"))
        .arg("--group-map")
        .arg(&group_map)
        .arg("--out-dir")
        .arg(&report_out)
        .status()
        .unwrap();
    assert!(status.success());
    let crosstab = std::fs::read_to_string(report_out.join("crosstab.csv")).unwrap();
    assert!(crosstab.starts_with("external_province,"));
    let mean_comp = std::fs::read_to_string(report_out.join("mean_composition.csv")).unwrap();
    assert!(mean_comp.starts_with("cluster,"));
    assert!(mean_comp.contains("picos"));
    assert!(mean_comp.contains("other"));
    assert!(report_out.join("crosstab.svg").exists());
    assert!(report_out.join("mean_composition.svg").exists());
}

#[test]
fn tune_alpha_and_tune_k_emit_curves() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = synth_fixture(dir.path(), 2, 24, 20, 16);
    let out = dir.path().join("alpha");
    let status = bin()
        .args(["tune-alpha", "--composition"])
        .arg(fixture.join("composition.csv"))
        .arg("--meta")
        .arg(fixture.join("meta.csv"))
        .args(["--r", "8", "--alphas", "0,0.5,1", "--l-replicates", "5", "--seed", "3", "--out-dir"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("alpha_scores.csv")).unwrap();
    assert!(csv.starts_with("alpha,replicate,score,null_score\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 5);
    assert!(out.join("alpha_scores.svg").exists());

    let out_k = dir.path().join("k");
    let status = bin()
        .args(["tune-k", "--composition"])
        .arg(fixture.join("composition.csv"))
        .arg("--meta")
        .arg(fixture.join("meta.csv"))
        .args(["--r", "8", "--alpha", "0.1", "--ks", "1,2,3,4,5,6", "--out-dir"])
        .arg(&out_k)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out_k.join("k_curve.csv")).unwrap();
    assert!(csv.starts_with("K,wcd\n"));
    assert_eq!(csv.lines().count(), 7);
    assert!(out_k.join("k_curve.svg").exists());
}

#[test]
fn stability_defaults_and_output_format() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = synth_fixture(dir.path(), 2, 20, 20, 16);
    let out = dir.path().join("stab");
    // replicates reduced for speed; fraction left at its default
    let status = bin()
        .args(["stability", "--composition"])
        .arg(fixture.join("composition.csv"))
        .arg("--meta")
        .arg(fixture.join("meta.csv"))
        .arg("--grid")
        .arg(fixture.join("grid.csv"))
        .args([
            "--r", "8", "--alpha", "0.1", "--k-clusters", "2", "--k-neighbors", "3",
            "--replicates", "6", "--seed", "1", "--out-dir",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("stability.csv")).unwrap();
    assert!(csv.starts_with("grid_id,latitude,depth,modal_cluster,stability\n"));
    assert!(out.join("stability.svg").exists());

    // the defaults recorded in the manifest are the documented protocol
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["params"]["fraction"].as_str(), Some("0.7"));
    assert_eq!(manifest["params"]["replicates"].as_str(), Some("6"));
}

#[test]
fn k_neighbors_warning_is_soft_and_zero_is_hard() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = synth_fixture(dir.path(), 2, 20, 20, 16);
    let cluster_out = dir.path().join("cluster");
    assert!(bin()
        .args(["cluster", "--composition"])
        .arg(fixture.join("composition.csv"))
        .arg("--meta")
        .arg(fixture.join("meta.csv"))
        .args(["--r", "8", "--alpha", "0.1", "--k-clusters", "2", "--out-dir"])
        .arg(&cluster_out)
        .status()
        .unwrap()
        .success());

    let predict = |k: &str, out: &str| {
        bin()
            .args(["predict", "--composition"])
            .arg(fixture.join("composition.csv"))
            .arg("--meta")
            .arg(fixture.join("meta.csv"))
            .arg("--grid")
            .arg(fixture.join("grid.csv"))
            .arg("--memberships")
            .arg(cluster_out.join("memberships.csv"))
            .args(["--r", "8", "--k-neighbors", k, "--out-dir"])
            .arg(dir.path().join(out))
            .output()
            .unwrap()
    };
    // k = 12: warning on stderr, exit 0
    let output = predict("12", "k12");
    assert!(output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("outside the recommended range"));
    // k = 3: no warning
    let output = predict("3", "k3");
    assert!(output.status.success());
    assert!(!String::from_utf8_lossy(&output.stderr).contains("outside the recommended range"));
    // k = 0: hard error
    let output = predict("0", "k0");
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn config_file_supplies_values_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = synth_fixture(dir.path(), 2, 20, 20, 16);
    let config = dir.path().join("run.conf");
    std::fs::write(
        &config,
        format!(
            "# pipeline settings\ncomposition = {}\nmeta = {}\nr = 8\nalpha = 0.9\nk-clusters = 2\n",
            fixture.join("composition.csv").display(),
            fixture.join("meta.csv").display(),
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    // --alpha 0.1 overrides the config's 0.9
    let status = bin()
        .args(["cluster", "--config"])
        .arg(&config)
        .args(["--alpha", "0.1", "--out-dir"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["params"]["alpha"].as_str(), Some("0.1"));
}

#[test]
fn synth_outputs_feed_back_into_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = synth_fixture(dir.path(), 3, 36, 30, 25);
    for name in [
        "composition.csv",
        "meta.csv",
        "grid.csv",
        "sample_truth.csv",
        "grid_truth.csv",
        "manifest.json",
    ] {
        assert!(fixture.join(name).exists(), "{name} missing");
    }
    let out = dir.path().join("out");
    let status = bin()
        .args(["pipeline", "--composition"])
        .arg(fixture.join("composition.csv"))
        .arg("--meta")
        .arg(fixture.join("meta.csv"))
        .arg("--grid")
        .arg(fixture.join("grid.csv"))
        .args(["--r", "8", "--alpha", "0.1", "--k-clusters", "3", "--k-neighbors", "3", "--out-dir"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    // external provinces present in synth meta -> crosstab produced
    assert!(out.join("crosstab.csv").exists());
    assert!(out.join("province.svg").exists());
    assert!(out.join("manifest.json").exists());
}
