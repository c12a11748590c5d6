//! End-to-end tests of the binary: exit codes, output shape, DOT emission.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chorizo::catalog;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_chorizo")
}

fn write_catalog(dir: &Path, name: &str) -> PathBuf {
    let data = catalog::builtin_get(name).unwrap().data;
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, data.to_json()).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn validate_valid_input() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_catalog(dir.path(), "nielsen-f1");
    let out = run(&["validate", f.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["valid"], serde_json::Value::Bool(true));
}

#[test]
fn validate_invalid_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut data = catalog::builtin_get("nielsen-f1").unwrap().data;
    data.genus = 7;
    let f = dir.path().join("bad.json");
    std::fs::write(&f, data.to_json()).unwrap();
    let out = run(&["validate", f.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["valid"], serde_json::Value::Bool(false));
    assert!(!doc["violations"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("junk.json");
    std::fs::write(&f, "{ not json").unwrap();
    assert_eq!(code(&run(&["validate", f.to_str().unwrap()])), 1);

    let g = dir.path().join("extra.json");
    std::fs::write(
        &g,
        r#"{"genus":2,"bodies":[],"curves":[],"map":{"bodies":{},"slots":{},"curves":{}},"body_orbits":[],"curve_orbits":[],"surprise":true}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["quotient", g.to_str().unwrap()])), 1);

    assert_eq!(code(&run(&["quotient", dir.path().join("missing.json").to_str().unwrap()])), 1);
}

#[test]
fn quotient_prints_checks_and_writes_dot() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_catalog(dir.path(), "kodaira-II*");
    let dot = dir.path().join("out.dot");
    let out = run(&["quotient", f.to_str().unwrap(), "--dot", dot.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["checks"]["euler_balance"], serde_json::Value::Bool(true));
    assert_eq!(doc["checks"]["semidefinite"], serde_json::Value::Bool(true));
    assert_eq!(doc["components"].as_array().unwrap().len(), 9);
    let rendered = std::fs::read_to_string(&dot).unwrap();
    assert!(rendered.starts_with("graph chorizo {"));
    assert!(rendered.contains("g=0, m=6"));
}

#[test]
fn compare_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let f1 = write_catalog(dir.path(), "nielsen-f1");
    let f2 = write_catalog(dir.path(), "nielsen-f2");
    let out = run(&["compare", f1.to_str().unwrap(), f2.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["verdict"], "DISTINCT_ACTION");

    let out = run(&["compare", f1.to_str().unwrap(), f1.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["verdict"], "INVARIANTS_EQUAL");

    let i0 = write_catalog(dir.path(), "kodaira-I0*");
    let ii = write_catalog(dir.path(), "kodaira-II*");
    let out = run(&["compare", i0.to_str().unwrap(), ii.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["verdict"], "DISTINCT_S");

    // Genus mismatch is a usage problem, not a conjugacy verdict.
    let id2 = write_catalog(dir.path(), "identity-genus2");
    let out = run(&["compare", id2.to_str().unwrap(), i0.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bounds_flag_and_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let mut data = catalog::builtin_get("nielsen-f1").unwrap().data;
    // A screw of -100 needs a chain of 101 entries, beyond the default
    // length bound of 64.
    data.curve_orbits[0].screw = num_rational::BigRational::from(num_bigint::BigInt::from(-100));
    let f = dir.path().join("long.json");
    std::fs::write(&f, data.to_json()).unwrap();
    let out = run(&["quotient", f.to_str().unwrap()]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["--bounds", "128,1000000", "quotient", f.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn catalog_listing_and_export_round_trip() {
    let out = run(&["catalog"]);
    assert_eq!(code(&out), 0);
    let listed: Vec<&str> = std::str::from_utf8(&out.stdout).unwrap().lines().collect();
    assert_eq!(listed, catalog::builtin_list());

    let out = run(&["catalog", "--name", "amphidrome-genus2"]);
    assert_eq!(code(&out), 0);
    let parsed = chorizo::model::PseudoPeriodicData::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(parsed, catalog::builtin_get("amphidrome-genus2").unwrap().data);

    assert_eq!(code(&run(&["catalog", "--name", "nope"])), 1);

    let dir = tempfile::tempdir().unwrap();
    let out = run(&["catalog", "--export", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    for name in catalog::builtin_list() {
        let path = dir.path().join(format!("{name}.json"));
        let text = std::fs::read_to_string(&path).unwrap();
        chorizo::model::PseudoPeriodicData::from_json(&text).unwrap();
    }
}

#[test]
fn invariants_writes_graph_dots() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_catalog(dir.path(), "amphidrome-genus2");
    let gdir = dir.path().join("graphs");
    let out = run(&["invariants", f.to_str().unwrap(), "--dot-dir", gdir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["chorizo", "weighted_graph", "action_class"] {
        assert!(doc[key].as_str().unwrap().len() > 4);
    }
    for name in ["partition.dot", "refined.dot", "quotient.dot"] {
        assert!(gdir.join(name).exists(), "{name} missing");
    }
    let refined = std::fs::read_to_string(gdir.join("refined.dot")).unwrap();
    assert!(refined.contains("fillcolor"));
}

#[test]
fn selfcheck_passes() {
    let out = run(&["selfcheck"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().all(|l| l.starts_with("ok ")), "{text}");
}
