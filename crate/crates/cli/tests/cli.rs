use std::path::Path;
use std::process::{Command, Output};

fn hems(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hems")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = hems(&["run", "--scenario", "case1", "--days", "2", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["timeseries.csv", "flows.csv", "summary.json", "models.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let s: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["scenario"], "case1");
    assert_eq!(s["seed"], 3);
    assert_eq!(s["days"], 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("net"));
}

#[test]
fn compare_writes_both_runs_and_a_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hems(&["compare", "--days", "2", "--out", out, "comfort_only", "base"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("comfort_only/summary.json").is_file());
    assert!(dir.path().join("base/flows.csv").is_file());
    let c: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("comparison.json")).unwrap()).unwrap();
    let (a, b) = (
        c["scenario_a"]["cost"]["net_cad_per_day"].as_f64().unwrap(),
        c["scenario_b"]["cost"]["net_cad_per_day"].as_f64().unwrap(),
    );
    let saving = c["net_cost_saving_a_vs_b_pct"].as_f64().unwrap();
    assert!((saving - 100.0 * (b - a) / b.abs()).abs() < 1e-9);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let bad_json = write(dir.path(), "bad.json", r#"{"days": 2, "typo": 1}"#);
    let bad_weather = write(dir.path(), "weather.csv", "time_h,t_ext_c\n0,1\n");
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "--scenario", "nope", "--out", out],
        vec!["run", "--scenario", "case1", "--days", "1", "--out", out],
        vec!["run", "--scenario", "case1", "--config", &bad_json, "--out", out],
        vec!["run", "--scenario", "case1", "--config", "/no/such/file.json", "--out", out],
        vec!["run", "--scenario", "base", "--days", "2", "--weather", &bad_weather, "--out", out],
        vec!["compare", "--out", out, "base", "base"],
        vec!["run", "--scenario", "case1"],
    ];
    for args in cases {
        let o = hems(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
    assert!(!Path::new(out).join("summary.json").exists());
}

#[test]
fn solver_failures_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "huge.json",
        r#"{"weights": {"w1": 1.5, "w2": 1.0, "w3": 5.0, "w4": [1e308, 1e308, 1e308], "w5": [1e308, 1e308, 1e308],
            "soc_units": "percent", "dk_h": 0.0625, "soc_term_dk": true}}"#,
    );
    let out = dir.path().join("out");
    let o = hems(&["run", "--scenario", "case1", "--days", "2", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("solver failure"));
}
