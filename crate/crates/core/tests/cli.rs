mod common;

use std::path::Path;
use std::process::Command;

use common::fixture;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_holoflow");

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(BIN).args(args).output().expect("spawn holoflow");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn schema_check(name: &str, doc: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    if let Err(errors) = compiled.validate(doc) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{name} output violates schema: {msgs:?}\n{doc}");
    };
}

fn json_ok(args: &[&str], schema: &str) -> Value {
    let (code, out) = run(args);
    assert_eq!(code, 0, "{args:?} -> {out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    schema_check(schema, &v);
    v
}

fn zeros_path() -> String {
    fixture("zeros100.txt").display().to_string()
}

#[test]
fn infinity_example() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = format!("{}/", dir.path().display());
    let v = json_ok(&["infinity", "--poly", "[[1,0],[0,0],[1,0]]", "--out-prefix", &prefix], "infinity");
    let eqs = v["equilibria"].as_array().unwrap();
    assert_eq!(eqs.len(), 2);
    for e in eqs {
        assert_eq!(e["kind"], "saddle");
        assert_eq!(e["alpha"].as_f64().unwrap(), e["p"][0].as_f64().unwrap());
    }
}

#[test]
fn separatrix_is_real_axis() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = format!("{}/", dir.path().display());
    let v = json_ok(&["separatrix", "--poly", "z2p1", "--eps", "1e-3", "--out-prefix", &prefix], "separatrix");
    let csv = std::fs::read_to_string(v["csv"].as_str().unwrap()).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,re,im,tag"));
    let mut n = 0;
    for l in lines {
        let im: f64 = l.split(',').nth(2).unwrap().parse().unwrap();
        assert!(im.abs() < 1e-6);
        n += 1;
    }
    assert!(n > 10);
}

#[test]
fn portrait_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = format!("{}/out/", dir.path().display());
    let v = json_ok(&["portrait", "--poly", "z2p1", "--grid", "6x6", "--out-prefix", &prefix], "portrait");
    let svg = std::fs::read_to_string(v["svg"].as_str().unwrap()).unwrap();
    assert!(svg.contains("class=\"separatrix\"") && svg.contains("class=\"orbit\"") && svg.contains("class=\"dirfield\""));
    assert!(Path::new(v["csv"].as_str().unwrap()).exists());
    let v = json_ok(&["portrait", "--poly", "cosh-shift", "--grid", "4x4", "--out-prefix", &prefix], "portrait");
    assert!(v["separatrices"].as_u64().unwrap() >= 3);
}

#[test]
fn winding_modes() {
    let v = json_ok(&["winding", "--poly", "z2p1", "--z0", "0.5,1.5"], "winding");
    assert_eq!(v["periodic"], true);
    assert_eq!(v["winding"].as_i64().unwrap().abs(), 1);
    let v = json_ok(&["winding", "--poly", "z2p1", "--z0", "1,0"], "winding");
    assert_eq!(v["periodic"], false);
    let v = json_ok(&["winding", "--poly", "cosh-shift", "--z0", "3,0", "--index-flip"], "winding");
    assert_eq!(v["product"], -1);
}

#[test]
fn ctime_probe_with_surface() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = format!("{}/", dir.path().display());
    let v = json_ok(
        &["ctime-probe", "--poly", "cosh-shift", "--z0", "3,-0.5", "--t1", "0.1", "--t2", "0.05", "--grid", "5x5", "--out-prefix", &prefix],
        "ctime-probe",
    );
    assert_eq!(v["classification"], "NoSep");
    assert_eq!(v["closes"], true);
    let csv = std::fs::read_to_string(v["surface"]["csv"].as_str().unwrap()).unwrap();
    assert_eq!(csv.lines().count(), 26);
}

#[test]
fn xi_approx_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = format!("{}/", dir.path().display());
    let zeros = zeros_path();
    let v = json_ok(&["xi-approx", "--zeros", &zeros, "--m", "4", "--z0", "2,20", "--path", "straight 1", "--out-prefix", &prefix], "xi-approx");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(v["report"].as_str().unwrap()).unwrap()).unwrap();
    schema_check("xi-report", &report);
    assert!(report["invariants"]["max_scaled_residual"].as_f64().unwrap() < 1e-10);
    let v = json_ok(
        &["xi-approx", "--zeros", &zeros, "--m", "4", "--path", "rect 0.5 0.5", "--grid", "4x6", "--out-prefix", &prefix],
        "xi-approx",
    );
    assert!(Path::new(v["portrait"]["svg"].as_str().unwrap()).exists());
}

#[test]
fn report_both_kinds() {
    let v = json_ok(&["report", "--poly", "z2p1"], "report");
    assert_eq!(v["degree"], 2);
    let v = json_ok(&["report", "--poly", "cosh-shift"], "report");
    for f in v["index_flips"].as_array().unwrap() {
        assert_eq!(f["product"], -1);
        assert!(f["error"].as_f64().unwrap() < 1e-6);
    }
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"system": [[1,0],[0,0],[1,0]], "eps": 0.01}"#).unwrap();
    let v = json_ok(&["infinity", "--config", cfg.to_str().unwrap()], "infinity");
    assert_eq!(v["eps"], 0.01);
    assert_eq!(v["equilibria"][0]["seed_point"][0].as_f64().unwrap().abs(), 100.0);
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    assert_eq!(run(&["infinity", "--config", cfg.to_str().unwrap()]).0, 2);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["infinity", "--poly", "z2p1", "--no-such-flag"]).0, 2);
    assert_eq!(run(&["infinity", "--poly", "[[1,0],[2]]"]).0, 2);
    assert_eq!(run(&["infinity", "--poly", "cosh-shift"]).0, 2);
    assert_eq!(run(&["infinity", "--poly", "z2p1", "--rtol", "-1"]).0, 2);
    assert_eq!(run(&["infinity", "--poly", "z2p1", "--escape-radius", "10"]).0, 2);
    assert_eq!(run(&["xi-approx", "--zeros", &zeros_path(), "--m", "3"]).0, 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "14.1\n13.0\n").unwrap();
    let (code, out) = run(&["xi-approx", "--zeros", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    let v: Value = serde_json::from_str(&out).unwrap();
    schema_check("error", &v);
    assert_eq!(v["error"], "monotonicity");
    // Two separate centres are required on either side.
    let (code, out) = run(&["winding", "--poly", "z2p1", "--z0", "0,1.5", "--index-flip"]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    schema_check("error", &v);
    assert_eq!(v["error"], "not_between_centers");
    assert_eq!(run(&["--help"]).0, 0);
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn outputs_are_deterministic() {
    let zeros = zeros_path();
    let commands: Vec<Vec<&str>> = vec![
        vec!["infinity", "--poly", "z2p1"],
        vec!["separatrix", "--poly", "z2p1"],
        vec!["portrait", "--poly", "z2p1", "--grid", "5x5"],
        vec!["portrait", "--poly", "cosh-shift", "--grid", "4x4"],
        vec!["winding", "--poly", "z2p1", "--z0", "0.3,2"],
        vec!["ctime-probe", "--poly", "cosh-shift", "--z0", "3,-0.5", "--t1", "1", "--t2", "1", "--grid", "6x6"],
        vec!["xi-approx", "--zeros", &zeros, "--m", "4", "--path", "loop 1", "--grid", "3x5"],
        vec!["report", "--poly", "cosh-shift"],
    ];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for cmd in &commands {
        let mut outs = Vec::new();
        for d in [&a, &b] {
            let prefix = format!("{}/", d.path().display());
            let mut args = cmd.clone();
            args.extend(["--out-prefix", &prefix]);
            let (code, stdout) = run(&args);
            assert_eq!(code, 0, "{cmd:?}");
            outs.push(stdout.replace(&prefix, "<prefix>/"));
        }
        assert_eq!(outs[0], outs[1], "stdout differs for {cmd:?}");
    }
    assert_eq!(snapshot(a.path()), snapshot(b.path()));
}
