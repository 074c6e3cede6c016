use std::path::{Path, PathBuf};

use serde_json::Value;
use wfsample::cli::{config_schema, load_config, run, Command, REPORT_SCHEMA};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn toml_as_json(path: &Path) -> Value {
    let text = std::fs::read_to_string(path).unwrap();
    let v: toml::Value = toml::from_str(&text).unwrap();
    serde_json::to_value(v).unwrap()
}

fn errors(schema: &Value, instance: &Value) -> Vec<String> {
    let v = jsonschema::validator_for(schema).unwrap();
    v.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path())).collect()
}

#[test]
fn shipped_config_schema_is_current() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/config.schema.json");
    let generated = serde_json::to_string_pretty(&config_schema()).unwrap() + "\n";
    if std::env::var_os("WFSAMPLE_BLESS").is_some() {
        std::fs::write(&path, &generated).unwrap();
    }
    let shipped = std::fs::read_to_string(&path).expect("schema/config.schema.json (regenerate with WFSAMPLE_BLESS=1)");
    assert_eq!(shipped, generated, "config schema is stale; rerun with WFSAMPLE_BLESS=1");
}

#[test]
fn shipped_configs_validate() {
    let schema = config_schema();
    let mut n = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let errs = errors(&schema, &toml_as_json(&p));
            assert!(errs.is_empty(), "{}: {errs:?}", p.display());
            n += 1;
        }
    }
    assert!(n >= 10);
}

#[test]
fn schema_rejects_unknown_keys() {
    let schema = config_schema();
    let bad: toml::Value = toml::from_str("[lattice]\nkind = \"integer\"\ndim = 2\nspacing = 1\n").unwrap();
    assert!(!errors(&schema, &serde_json::to_value(bad).unwrap()).is_empty());
    let bad: toml::Value = toml::from_str("sedes = []\n").unwrap();
    assert!(!errors(&schema, &serde_json::to_value(bad).unwrap()).is_empty());
}

#[test]
fn fast_reports_validate() {
    let schema: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let cases = [
        (Command::WeightsCheck, "weights_factorial.toml"),
        (Command::WeightsCheck, "weights_gevrey2.toml"),
        (Command::LatticeInfo, "lattice_info.toml"),
        (Command::FourierSeries, "fourier_gaussian.toml"),
        (Command::FourierSeries, "fourier_harmonic.toml"),
        (Command::FourierSeries, "fourier_both_routes.toml"),
        (Command::Analyze, "analyze_jump.toml"),
        (Command::Wavefront, "delta_wavefront.toml"),
        (Command::Wavefront, "jump_quasianalytic.toml"),
        (Command::Equivalence, "equivalence.toml"),
    ];
    for (cmd, file) in cases {
        let cfg = load_config(&configs_dir().join(file)).unwrap();
        let rep = run(cmd, &cfg).unwrap();
        let errs = errors(&schema, &rep.json);
        assert!(errs.is_empty(), "{file}: {errs:?}");
    }
}

#[test]
fn report_schema_catches_missing_fields() {
    let schema: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let cfg = load_config(&configs_dir().join("lattice_info.toml")).unwrap();
    let mut rep = run(Command::LatticeInfo, &cfg).unwrap().json;
    rep.as_object_mut().unwrap().remove("separation");
    assert!(!errors(&schema, &rep).is_empty());
}
