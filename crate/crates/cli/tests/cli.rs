use std::fs;
use std::process::{Command, Output};

fn logcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logcap")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn same_flags_same_bytes() {
    let args = ["averaged", "--alpha", "1.5", "--m-grid", "8,16", "--seed", "3", "--format", "json"];
    let a = logcap(&args);
    let b = logcap(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_dir_files_are_reproducible() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        let o = logcap(&["converge", "--n-grid", "1,10,100", "--out", d.path().to_str().unwrap()]);
        assert!(o.status.success());
    }
    for name in ["redistribution_convergence.csv", "redistribution_convergence.meta.json"] {
        let a = fs::read(d1.path().join(name)).unwrap();
        assert_eq!(a, fs::read(d2.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn config_from_metadata_reproduces_the_run() {
    let first = logcap(&["converge", "--n-grid", "1,10,100", "--schedule", "subexp:0.5", "--format", "json"]);
    let table: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(&path, serde_json::to_string(&table["metadata"]["config"]).unwrap()).unwrap();
    let again = logcap(&["converge", "--config", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(again.status.code(), first.status.code());
    assert_eq!(first.stdout, again.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(logcap(&["counterexample"]).status.code(), Some(0));
    // At n_1 = 2 the third set falls below half of its level.
    assert_eq!(logcap(&["counterexample", "--n1", "2", "--depth", "3"]).status.code(), Some(1));
    assert_eq!(logcap(&["counterexample", "--n1", "6"]).status.code(), Some(2));
    assert_eq!(logcap(&["converge", "--n-grid", "10,5"]).status.code(), Some(2));
}

#[test]
fn bound_from_cover_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cover.json");
    // Four intervals of length e^-8: series 1/2, energy at least 2.
    fs::write(&path, r#"{"lengths": [-8.0, -8.0, -8.0, -8.0]}"#).unwrap();
    let o = logcap(&["bound", "--cover", path.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &v["rows"][0];
    assert_eq!(row[0], "cover[4]");
    assert!((row[3].as_f64().unwrap() - 2.0).abs() < 1e-15);
    assert!((row[4].as_f64().unwrap() - (-2f64).exp()).abs() < 1e-15);

    fs::write(&path, r#"{"lengths": [0.5]}"#).unwrap();
    assert_eq!(logcap(&["bound", "--cover", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn tail_bound_reports_divergence() {
    let o = logcap(&["bound", "--alpha", "1.5"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().nth(1).unwrap().ends_with(",inf,0.0000000000000000e0,1.0000000000000000e0,false"), "{out}");
}

#[test]
fn plot_output_has_blocks() {
    let o = logcap(&["ursell", "--count", "3", "--format", "plot"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("# log_n vs j"));
}

#[test]
fn converge_with_density_file() {
    let dir = tempfile::tempdir().unwrap();
    let uniform = logcap(&["converge", "--n-grid", "4,16,64", "--format", "json"]);
    let path = dir.path().join("f.json");
    let f = r#"{"pieces": [{"center_num": "1", "center_den": "2", "log_half_length": -0.6931471805599453}], "density": [1.0], "mass": 1.0}"#;
    fs::write(&path, f).unwrap();
    let o = logcap(&["converge", "--n-grid", "4,16,64", "--density", path.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a: serde_json::Value = serde_json::from_slice(&uniform.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for (x, y) in a["rows"].as_array().unwrap().iter().zip(b["rows"].as_array().unwrap()) {
        assert!((x[2].as_f64().unwrap() - y[2].as_f64().unwrap()).abs() < 1e-10);
    }
}
