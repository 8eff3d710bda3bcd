use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_burgers-lab"));
    c.env("BURGERS_LAB_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn burgers-lab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"));
    csv_rows(path).iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn missing_alpha_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--nu", "0.1", "--init", "sine:1", "--modes", "16", "--dt", "1e-3", "--t-end", "0.01",
        "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
}

#[test]
fn inviscid_simulation_conserves_energy() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--nu", "0", "--init", "sine:1", "--modes", "128", "--dt", "1e-3", "--t-end", "0.3",
        "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let e = column(&dir.path().join("run.csv"), "energy");
    assert!(e.len() > 2);
    for v in &e {
        assert!((v - e[0]).abs() < 1e-10 * e[0], "{v} vs {}", e[0]);
    }
    assert!(dir.path().join("run.json").exists() && dir.path().join("config.json").exists());
}

#[test]
fn inviscid_reports_horizon_and_linear_decay() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["inviscid", "--init", "sine:1", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let value = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(key)).unwrap();
        line.split('=').nth(1).unwrap().trim().parse().unwrap()
    };
    assert!((value("T_max") - 1.0).abs() < 1e-12);
    assert!((value("bound") - 1.130_199_320_647_456_4).abs() < 1e-9);
    let slopes = column(&dir.path().join("inviscid.csv"), "slope");
    assert_eq!(slopes.len(), 9);
    for s in &slopes {
        assert!((s - slopes[0]).abs() < 1e-8, "{s} vs {}", slopes[0]);
    }
}

#[test]
fn inviscid_refuses_times_past_the_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["inviscid", "--init", "sine:1", "--t-end", "1.0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_runs_all_suites_or_one() {
    let all = run(&["verify", "--seed", "3"]);
    assert!(all.status.success(), "{}", stdout(&all));
    assert!(stdout(&all).lines().filter(|l| l.contains("PASS")).count() >= 5);
    let one = run(&["verify", "--seed", "3", "--suite", "key_identity"]);
    assert!(one.status.success());
    let lines: Vec<String> = stdout(&one).lines().skip(1).map(str::to_owned).collect();
    assert_eq!(lines.len(), 1, "{lines:?}");
    assert!(lines[0].starts_with("key_identity"));
    assert_eq!(run(&["verify", "--suite", "nonsense"]).status.code(), Some(1));
}

#[test]
fn certify_prints_the_corollary_certificate() {
    let o = run(&["certify", "--alpha", "0.25", "--nu", "0.04", "--init", "sine:10", "--modes", "64"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let certs: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let certs = certs.as_array().unwrap();
    assert_eq!(certs.len(), 2);
    for c in certs {
        assert_eq!(c["hypotheses_hold"], true);
    }
    let bound = certs[1]["predicted_bound_T"].as_f64().unwrap();
    assert!((bound - 1.973_920_880_217_871_7).abs() < 1e-12);
}

#[test]
fn empty_sweep_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sweep", "--alphas", "0.25", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

fn sweep(dir: &Path) -> String {
    let o = run(&["sweep", "--alphas", "0.1,0.25,0.4", "--nus", "0.02,0.05,0.2", "--amplitudes", "2,10,40",
        "--out", dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read_to_string(dir.join("sweep.csv")).unwrap()
}

#[test]
fn sweep_straddles_the_threshold_and_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = sweep(a.path());
    assert_eq!(first, sweep(b.path()));
    let margins = column(&a.path().join("sweep.csv"), "margin");
    assert_eq!(margins.len(), 27);
    assert!(margins.iter().any(|m| *m > 1.0) && margins.iter().any(|m| *m < 1.0));
    assert_eq!(std::fs::read_dir(a.path().join("cells")).unwrap().count(), 27);
}

#[test]
fn single_cell_sweep_matches_simulate() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let common = ["--modes", "64", "--dt", "1e-3", "--t-end", "0.05", "--stride", "5"];
    let mut args = vec!["sweep", "--alphas", "0.3", "--nus", "0.1", "--amplitudes", "2", "--simulate", "--out"];
    args.push(a.path().to_str().unwrap());
    args.extend(common);
    assert!(run(&args).status.success());
    let mut args = vec!["simulate", "--alpha", "0.3", "--nu", "0.1", "--init", "sine:2", "--out"];
    args.push(b.path().to_str().unwrap());
    args.extend(common);
    assert!(run(&args).status.success());
    let cell = std::fs::read_to_string(a.path().join("cells/cell_0000_run.csv")).unwrap();
    let single = std::fs::read_to_string(b.path().join("run.csv")).unwrap();
    assert_eq!(cell, single);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(
        &cfg,
        r#"{"alpha": 0.5, "nu": 0.1, "init": {"kind": "sine", "R": 1.0}, "N": 32, "dt": 0.001, "t_end": 0.02}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--nu", "0.3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stored: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(stored["nu"], 0.3);
    assert_eq!(stored["alpha"], 0.5);

    std::fs::write(&cfg, r#"{"alpah": 0.5}"#).unwrap();
    assert_eq!(run(&["simulate", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn blown_up_step_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--nu", "0", "--init", "sine:1e100", "--modes", "64", "--dt", "1", "--t-end", "5",
        "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
}
