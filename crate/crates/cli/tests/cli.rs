use std::path::Path;
use std::process::{Command, Output};

fn heatbie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatbie"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(str::to_owned)
        .collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: [&str; 6] = ["--m", "8", "--n", "2", "--j", "2"];

#[test]
fn synth_writes_data_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = out.to_str().unwrap();
    let mut args = vec!["synth", "--out", o, "--delta", "0.03", "--seed", "4"];
    args.extend(SMALL);
    assert_eq!(code(&heatbie(&args)), 0);
    let data = rows(&out.join("data.csv"));
    assert_eq!(data.len(), 3 * 16);
    assert!(data[0].starts_with("0,0,"));
    let side = json(&out.join("data.json"));
    assert_eq!(side["m"], 8);
    assert_eq!(side["n"], 2);
    assert_eq!(side["delta"], 0.03);
    assert_eq!(side["seed"], 4);
    assert_eq!(side["kappa"], 1.0);
    assert_eq!(side["geometry"]["inner"]["shape"], "peanut");
    assert_eq!(side["resolved_mode"], "multi_step");

    let again = dir.path().join("t");
    args[2] = again.to_str().unwrap();
    assert_eq!(code(&heatbie(&args)), 0);
    assert_eq!(
        std::fs::read(out.join("data.csv")).unwrap(),
        std::fs::read(again.join("data.csv")).unwrap()
    );
}

#[test]
fn invalid_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    for bad in [
        vec!["synth", "--out", o, "--m", "3"],
        vec!["synth", "--out", o, "--m", "8", "--j", "8"],
        vec!["synth", "--out", o, "--r0", "0"],
        vec!["synth", "--out", o, "--lambda0", "-1"],
        vec!["synth", "--out", o, "--delta", "-0.1"],
        vec!["synth", "--out", o, "--inner", "blob"],
        vec!["synth", "--out", o, "--mode", "sideways"],
        vec!["curves", "--out", o, "blob"],
        vec!["frobnicate"],
    ] {
        let out = heatbie(&bad);
        assert_eq!(code(&out), 2, "{bad:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn config_file_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("o");
    std::fs::write(&cfg, format!("m = 8\nn = 2\nj = 2\nseed = 1\nout = {:?}\n", out.to_str().unwrap())).unwrap();
    assert_eq!(code(&heatbie(&["synth", "--config", cfg.to_str().unwrap(), "--seed", "5"])), 0);
    let side = json(&out.join("data.json"));
    assert_eq!(side["seed"], 5);
    assert_eq!(side["m"], 8);

    std::fs::write(&cfg, "m = 8\nbogus = 1\n").unwrap();
    assert_eq!(code(&heatbie(&["synth", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn invert_outputs_and_grid_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s");
    let mut args = vec!["synth", "--out", s.to_str().unwrap()];
    args.extend(SMALL);
    assert_eq!(code(&heatbie(&args)), 0);
    let data = s.join("data.csv");

    let inv = dir.path().join("i");
    let mut args = vec![
        "invert",
        "--data",
        data.to_str().unwrap(),
        "--out",
        inv.to_str().unwrap(),
        "--max-iters",
        "2",
        "--mode",
        "multi_step",
    ];
    args.extend(SMALL);
    let out = heatbie(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&inv.join("summary.json"));
    assert_eq!(summary["mode"], "multi_step");
    assert!(summary["error_inf"].as_f64().unwrap() > 0.0);
    let history = rows(&inv.join("history.csv"));
    assert_eq!(history.len(), summary["iterations"].as_u64().unwrap() as usize);
    assert!(inv.join("curve_iter_000.csv").exists());
    assert_eq!(rows(&inv.join("curve_iter_000.csv")).len(), 256);

    let mut mismatch = vec!["invert", "--data", data.to_str().unwrap(), "--out", inv.to_str().unwrap()];
    mismatch.extend(["--m", "16", "--n", "2", "--j", "2"]);
    assert_eq!(code(&heatbie(&mismatch)), 2);
    let missing = dir.path().join("none.csv");
    assert_eq!(
        code(&heatbie(&["invert", "--data", missing.to_str().unwrap(), "--out", inv.to_str().unwrap()])),
        2
    );
}

#[test]
fn zero_iterations_emit_initial_circle() {
    let dir = tempfile::tempdir().unwrap();
    let inv = dir.path().join("i");
    let mut args = vec!["invert", "--out", inv.to_str().unwrap(), "--max-iters", "0", "--r0", "0.3"];
    args.extend(SMALL);
    assert_eq!(code(&heatbie(&args)), 0);
    let curves: Vec<_> = std::fs::read_dir(&inv)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with("curve_iter_"))
        .collect();
    assert_eq!(curves.len(), 1);
    let first = rows(&inv.join("curve_iter_000.csv"))[0].clone();
    let x: f64 = first.split(',').nth(1).unwrap().parse().unwrap();
    assert!((x - 0.3).abs() < 1e-15);
    assert!(rows(&inv.join("history.csv")).is_empty());
}

#[test]
fn curves_export() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    assert_eq!(code(&heatbie(&["curves", "--out", o])), 0);
    for name in ["circle", "peanut", "apple", "rounded_rectangle", "kite1", "kite2"] {
        assert_eq!(rows(&dir.path().join(format!("{name}.csv"))).len(), 256, "{name}");
    }
    let kite = rows(&dir.path().join("kite2.csv"));
    let first: Vec<f64> = kite[0].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 1.3, 0.0]);
    let last: Vec<f64> = kite[255].split(',').map(|v| v.parse().unwrap()).collect();
    let step = 2.0 * std::f64::consts::PI / 256.0;
    assert!((last[0] + step - 2.0 * std::f64::consts::PI).abs() < 1e-12);

    assert_eq!(code(&heatbie(&["curves", "--out", o, "--curve-samples", "64", "peanut"])), 0);
    assert_eq!(rows(&dir.path().join("peanut.csv")).len(), 64);
}

#[test]
fn solver_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    // Inner circle larger than the outer one: valid keys, impossible geometry.
    let out = heatbie(&["synth", "--out", o, "--m", "8", "--n", "1", "--j", "2", "--inner", "circle", "--inner-radius", "1.5"]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
}
