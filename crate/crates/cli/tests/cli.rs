use std::path::Path;
use std::process::{Command, Output};

use holo_mimo::geometry::{CellLattice, PlanarArray};
use holo_mimo::spectra::{receive_variances, significant_count, SpectralFactor, VmfCluster};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_holo-mimo"));
    c.env_remove("HOLO_MIMO_SEED").env_remove("HOLO_MIMO_OUT");
    c
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

const SMALL: &str = r#"schema_version = 1
experiment = "capacity-vs-snr"
seed = 3
trials = 8
snr_db = [0.0, 10.0]

[receive]
length = 3.0
spacing = 0.5

[[spectrum]]
name = "iso"
kind = "isotropic"

[sweep]
capacities = ["csir-mc", "csit-mc", "csir-asymptotic", "iid-asymptotic"]
"#;

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("config.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect::<Vec<_>>();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn presets_print_and_unknown_names_fail() {
    let out = ok(bin().args(["preset", "fig6"]).output().unwrap());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("capacity-vs-spacing"));
    let out = bin().args(["preset", "fig9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        ok(bin().arg("run").arg(&cfg).arg("--out").arg(d).output().unwrap());
    }
    let fa = std::fs::read(a.join("capacity_vs_snr.csv")).unwrap();
    let fb = std::fs::read(b.join("capacity_vs_snr.csv")).unwrap();
    assert_eq!(fa, fb);
    let m = manifest(&a);
    assert_eq!(m["seed"], 3);
    assert!(m["preset"].is_null());
    assert_eq!(m["outputs"][0]["rows"], 2 * 4);
    assert!(m["durations"]["total_s"].as_f64().unwrap() >= 0.0);
    let hash = m["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert_eq!(hash, manifest(&b)["config_hash"].as_str().unwrap());
}

#[test]
fn seed_changes_monte_carlo_rows_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(bin().arg("run").arg(&cfg).arg("--out").arg(&a).output().unwrap());
    ok(bin().arg("run").arg(&cfg).args(["--seed", "4"]).arg("--out").arg(&b).output().unwrap());
    let (_, ra) = read_csv(&a.join("capacity_vs_snr.csv"));
    let (_, rb) = read_csv(&b.join("capacity_vs_snr.csv"));
    for (x, y) in ra.iter().zip(&rb) {
        if x[4].ends_with("MC") || x[4].starts_with("CSIT") {
            assert_ne!(x[6], y[6]);
        } else {
            assert_eq!(x[6], y[6]);
        }
    }
}

#[test]
fn environment_overrides_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let env_dir = tmp.path().join("env");
    ok(bin()
        .arg("run")
        .arg(&cfg)
        .env("HOLO_MIMO_SEED", "11")
        .env("HOLO_MIMO_OUT", &env_dir)
        .output()
        .unwrap());
    assert_eq!(manifest(&env_dir)["seed"], 11);
    let flag_dir = tmp.path().join("flag");
    ok(bin()
        .arg("run")
        .arg(&cfg)
        .args(["--seed", "12"])
        .arg("--out")
        .arg(&flag_dir)
        .env("HOLO_MIMO_SEED", "11")
        .env("HOLO_MIMO_OUT", &env_dir)
        .output()
        .unwrap());
    assert_eq!(manifest(&flag_dir)["seed"], 12);
}

#[test]
fn csv_round_trip_reproduces_manifest_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    ok(bin().arg("run").arg(&cfg).arg("--out").arg(tmp.path()).output().unwrap());
    let (header, rows) = read_csv(&tmp.path().join("capacity_vs_snr.csv"));
    assert_eq!(header[6], "capacity");
    let sum = rows.iter().map(|r| r[6].parse::<f64>().unwrap()).fold(0.0, |a, b| a + b);
    let m = manifest(tmp.path());
    assert_eq!(sum, m["summary"]["capacity_sum"].as_f64().unwrap());
    for (r, p) in rows.iter().zip(m["summary"]["points"].as_array().unwrap()) {
        assert_eq!(r[6].parse::<f64>().unwrap(), p["capacity"].as_f64().unwrap());
    }
}

#[test]
fn fig3_preset_gives_the_bowl_map() {
    let tmp = tempfile::tempdir().unwrap();
    ok(bin().args(["run", "fig3", "--out"]).arg(tmp.path()).output().unwrap());
    let (header, rows) = read_csv(&tmp.path().join("variances_isotropic.csv"));
    assert_eq!(header, ["lx", "ly", "variance", "strength_db"]);
    assert_eq!(rows.len(), 344);
    let m = manifest(tmp.path());
    assert_eq!(m["preset"], "fig3");
    let values: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    let sum = values.iter().fold(0.0, |a, b| a + b);
    assert_eq!(sum, m["summary"]["isotropic"]["variance_sum"].as_f64().unwrap());
    // weakest at the centre, strongest away from it
    let db = |lx: &str, ly: &str| -> f64 {
        rows.iter().find(|r| r[0] == lx && r[1] == ly).unwrap()[3].parse().unwrap()
    };
    assert!(db("0", "0") < db("8", "0"));
    assert!(db("0", "0") < -1.0);
}

#[test]
fn fig4a_manifest_records_the_significant_count() {
    let tmp = tempfile::tempdir().unwrap();
    ok(bin().args(["run", "fig4a", "--format", "json", "--out"]).arg(tmp.path()).output().unwrap());
    let table: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("variances_vmf.json")).unwrap()).unwrap();
    assert_eq!(table["rows"].as_array().unwrap().len(), 344);
    let d = std::f64::consts::PI / 180.0;
    let spec = SpectralFactor::vmf_mixture(vec![
        VmfCluster::from_circular_variance(0.5, 30.0 * d, 15.0 * d, 0.01).unwrap(),
        VmfCluster::from_circular_variance(0.5, 10.0 * d, 180.0 * d, 0.005).unwrap(),
    ])
    .unwrap();
    let lat = CellLattice::new(&PlanarArray::square(10.0, 0.5, 1.0).unwrap()).unwrap();
    let v = receive_variances(&spec, &lat).unwrap();
    let expected = significant_count(v.as_slice(), 0.997);
    assert_eq!(manifest(tmp.path())["summary"]["vmf"]["significant"], expected);
}

#[test]
fn config_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL.replace("trials = 8", "trials = 8\ntrails = 9"));
    let out = bin().arg("run").arg(&cfg).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trails"));
    let cfg = write_config(tmp.path(), &SMALL.replace("spacing = 0.5", "spacing = 0.0"));
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("receive"));
    let out = bin().args(["run", "no-such-config"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn numeric_failures_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"schema_version = 1
experiment = "eigenvalues"
[receive]
length = 20.0
spacing = 0.25
[sweep]
models = ["clarke"]
"#;
    let cfg = write_config(tmp.path(), text);
    let out = bin().arg("run").arg(&cfg).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds"));
}
