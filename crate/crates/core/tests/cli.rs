use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wfsample"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(cmd: &str, cfg: &Path, extra: &[&str]) -> Output {
    bin().arg(cmd).arg(cfg).args(extra).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn success_prints_report() {
    let out = run("lattice-info", &config("lattice_info.toml"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_of(&out);
    assert_eq!(r["command"], "lattice-info");
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
    assert!(r["config"].is_object());
}

#[test]
fn config_errors_exit_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "[weight]\nkind = \"gevery\"\ns = 2.0\n");
    let out = run("weights-check", &p, &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("weight"), "{err}");

    let p = write_config(dir.path(), "[lattice]\nkind = \"integer\"\ndim = 2\nspacing = 1.0\n");
    let out = run("lattice-info", &p, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lattice"));

    let out = run("lattice-info", &dir.path().join("missing.toml"), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn separation_failure_exits_3_naming_the_dual_vector() {
    let out = run("wavefront", &config("separation_fail.toml"), &[]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("0.3333333333333333"), "{err}");
}

#[test]
fn empty_cone_exits_4() {
    let out = run("equivalence", &config("empty_cone.toml"), &[]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no lattice points"));
}

#[test]
fn extrapolation_exits_5() {
    let out = run("wavefront", &config("tabulated_short.toml"), &[]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn weights_check_conditions() {
    let r = json_of(&run("weights-check", &config("weights_factorial.toml"), &[]));
    assert_eq!(r["sequence"]["m3_prime"]["verdict"], "divergent-diagnostic");
    assert_eq!(r["sequence"]["m1"]["verdict"], "holds-to-depth");
    let r = json_of(&run("weights-check", &config("weights_gevrey2.toml"), &[]));
    assert_eq!(r["weight"]["report"]["beta"]["verdict"], "convergent-diagnostic");
    assert_eq!(r["sequence"]["m3_prime"]["verdict"], "convergent-diagnostic");
}

#[test]
fn fourier_series_gaussian_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let out = run("fourier-series", &config("fourier_gaussian.toml"), &["--csv", csv.to_str().unwrap()]);
    json_of(&out);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let (ki, mi) = (header.iter().position(|h| *h == "k0").unwrap(), header.iter().position(|h| *h == "modulus").unwrap());
    let mut rows = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let n: f64 = cols[ki].trim().parse().unwrap();
        let m: f64 = cols[mi].parse().unwrap();
        assert!((m - (-std::f64::consts::PI * n * n).exp()).abs() <= 1e-10, "n={n} {m}");
        rows += 1;
    }
    assert!(rows >= 11);
}

#[test]
fn fourier_series_harmonic_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    json_of(&run("fourier-series", &config("fourier_harmonic.toml"), &["--csv", csv.to_str().unwrap()]));
    let text = std::fs::read_to_string(&csv).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let mi = header.iter().position(|h| *h == "modulus").unwrap();
    let big: Vec<&str> = text
        .lines()
        .skip(1)
        .filter(|l| l.split(',').nth(mi).unwrap().parse::<f64>().unwrap() > 1e-12)
        .collect();
    assert_eq!(big.len(), 1, "{big:?}");
}

#[test]
fn fourier_series_routes_agree() {
    let r = json_of(&run("fourier-series", &config("fourier_both_routes.toml"), &[]));
    assert!(r["route_delta"].as_f64().unwrap() <= 1e-8);
    assert!(r["parseval"]["relative"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn delta_wavefront_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let csv = dir.path().join("s.csv");
    let svg = dir.path().join("svg");
    let out = run(
        "wavefront",
        &config("delta_wavefront.toml"),
        &["--json", json.to_str().unwrap(), "--csv", csv.to_str().unwrap(), "--svg-dir", svg.to_str().unwrap()],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let singular: Vec<&Value> = r["pairs"].as_array().unwrap().iter().filter(|p| p["verdict"] == "singular").collect();
    assert_eq!(singular.len(), 16);
    assert!(singular.iter().all(|p| p["seed"] == 0));

    // every spoke of the seed on the delta is drawn singular
    let s0 = std::fs::read_to_string(svg.join("seed_0.svg")).unwrap();
    assert_eq!(s0.matches("<line").count(), 16);
    assert_eq!(s0.matches("#c0392b").count(), 16);
    let s1 = std::fs::read_to_string(svg.join("seed_1.svg")).unwrap();
    assert_eq!(s1.matches("#c0392b").count(), 0);
    assert!(std::fs::read_to_string(&csv).unwrap().lines().count() > 16);
}

#[test]
fn gaussian_wavefront_is_empty_with_floor_annotated() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("svg");
    let json = dir.path().join("r.json");
    let out = run(
        "wavefront",
        &config("gaussian_wavefront.toml"),
        &["--json", json.to_str().unwrap(), "--svg-dir", svg.to_str().unwrap()],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(r["summary"]["singular"], 0);
    assert_eq!(r["summary"]["pairs"], 5 * 16);
    assert!(r["pairs"].as_array().unwrap().iter().all(|p| p["floor"].is_number()));
    let s = std::fs::read_to_string(svg.join("seed_0.svg")).unwrap();
    assert!(s.contains("floor"));
    assert_eq!(s.matches("#c0392b").count(), 0);
}

#[test]
fn equivalence_synthetic_slope_one() {
    let r = json_of(&run("equivalence", &config("equivalence.toml"), &[]));
    assert_eq!(r["pass"], true);
    for p in r["pairs"].as_array().unwrap().iter().filter(|p| p["omega"] == "gevrey(2)") {
        assert!((p["lambda_lattice"].as_f64().unwrap() - 1.0).abs() < 0.01);
        assert!((p["lambda_continuous"].as_f64().unwrap() - 1.0).abs() < 0.01);
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = run("analyze", &config("analyze_jump.toml"), &[]);
    let b = run("analyze", &config("analyze_jump.toml"), &[]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
