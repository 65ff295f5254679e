use std::path::Path;
use std::process::{Command, Output};

use bcw_cli::figure::parse_figure_csv;
use bcw_cli::parse_bounds_json;
use bcw_core::bounds::from_csv;
use serde_json::Value;

fn bcw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcw"))
        .args(args)
        .env_remove("BCW_RUNLOG")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn figures_are_deterministic_and_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        stdout(&bcw(&["figure", "fig1", "--out", path.to_str().unwrap()]));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);

    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("# bcw "));
    assert!(text.contains("lambda=0.75 N_E=2 S_E=0.91"));
    let rows = parse_figure_csv(&text).unwrap();
    assert_eq!(rows.len(), 201);
    assert_eq!(rows[0].n, 0.0);
    assert!((rows[0].epi[2] - 0.639172040063988).abs() < 1e-12);
    assert!((rows[0].epi[0] + 0.584536455924589).abs() < 1e-12);
    assert!((rows[200].n - 20.0).abs() < 1e-12);

    let fig2 = stdout(&bcw(&["figure", "fig2", "--sequential"]));
    let rows = parse_figure_csv(&fig2).unwrap();
    assert!((rows[0].epni[2] - 0.113797567410251).abs() < 1e-12);
    assert!(!bcw(&["figure", "fig3"]).status.success());
}

#[test]
fn bounds_round_trip_in_both_formats() {
    let json = stdout(&bcw(&[
        "bounds",
        "attenuator",
        "--lambda",
        "0.75",
        "--env",
        "thermal:2",
        "--N",
        "0:2:0.5",
        "--method",
        "epni",
    ]));
    let reports = parse_bounds_json(&json).unwrap();
    assert_eq!(reports.len(), 5);
    // a thermal environment collapses the bounds
    for r in &reports {
        assert!((r.upper - r.lower).abs() < 1e-12, "{r:?}");
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    stdout(&bcw(&[
        "bounds",
        "classical-noise",
        "--t",
        "1",
        "--dist",
        "disc:1.5",
        "--N",
        "0,1,10",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().next().unwrap().starts_with('#'));
    let rows = from_csv(&text).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![0.0, 1.0, 10.0]);
    assert!(rows.iter().all(|r| r.upper >= r.lower));
}

#[test]
fn vacuum_environment_gives_equal_bounds() {
    let json = stdout(&bcw(&[
        "bounds",
        "attenuator",
        "--lambda",
        "0.3",
        "--env",
        "number:0",
        "--N",
        "0,1,5",
    ]));
    for r in parse_bounds_json(&json).unwrap() {
        assert_eq!(r.upper, r.lower);
        assert_eq!(r.gap_bound, 0.0);
    }
}

#[test]
fn invalid_specs_name_the_problem() {
    let out = bcw(&[
        "bounds",
        "attenuator",
        "--lambda",
        "0.5",
        "--env",
        "stats:2,3",
        "--N",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("exceeds g(N_E)"), "{err}");

    let out = bcw(&[
        "bounds",
        "classical-noise",
        "--t",
        "1",
        "--dist",
        "stats:2,5",
        "--N",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = bcw(&[
        "holevo",
        "attenuator",
        "--lambda",
        "0.5",
        "--env",
        "stats:1,0.5",
        "--N",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn holevo_reports_rate_and_bounds() {
    let out = bcw(&[
        "holevo",
        "attenuator",
        "--lambda",
        "0.75",
        "--env",
        "vacuum",
        "--N",
        "2",
        "--dim",
        "40",
    ]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rate = v["holevo"]["rate"].as_f64().unwrap();
    assert!((rate - 1.6825291675231413).abs() < 5e-3, "{rate}");
    assert_eq!(v["epi"]["upper"], v["epi"]["lower"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("chi ="));

    let out = bcw(&[
        "holevo",
        "classical-noise",
        "--t",
        "0.2",
        "--dist",
        "gaussian:iso",
        "--N",
        "0",
        "--dim",
        "10",
    ]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["holevo"]["rate"].as_f64().unwrap().abs() < 1e-9);
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("suite.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_exit_codes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let small = "seed = 7\nqepi_trials = 3\ncqepi_trials = 1\ncqepi_dim = 12\nmaxent_trials = 3\nminout_trials = 3\nepni_probes = 2\ncqepni_probes = 0\n";
    let cfg = write_config(dir.path(), small);
    let report = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let out = bcw(&[
        "verify",
        &cfg,
        "--out",
        report.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    stdout(&out);
    let first: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(first["config"]["seed"], 7);
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("check,grade,seed"));

    // same seed, same report
    let again = stdout(&bcw(&["verify", &cfg]));
    assert_eq!(serde_json::from_str::<Value>(&again).unwrap(), first);

    let cfg = write_config(dir.path(), "dim = 4\nphoton_cap = 1.5\n");
    let out = bcw(&["verify", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.to_string().contains("truncation"), "{v}");

    let cfg = write_config(dir.path(), "no_such_key = 1\n");
    assert_eq!(bcw(&["verify", &cfg]).status.code(), Some(2));
    assert_eq!(bcw(&["verify", "/nonexistent/suite.toml"]).status.code(), Some(2));
}

#[test]
fn runlog_appends_one_line_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.ndjson");
    let out_csv = dir.path().join("f.csv");
    stdout(&bcw(&[
        "--runlog",
        log.to_str().unwrap(),
        "figure",
        "fig2",
        "--out",
        out_csv.to_str().unwrap(),
    ]));
    let out = Command::new(env!("CARGO_BIN_EXE_bcw"))
        .args([
            "bounds",
            "attenuator",
            "--lambda",
            "0.5",
            "--env",
            "thermal:1",
            "--N",
            "1",
        ])
        .env("BCW_RUNLOG", &log)
        .output()
        .unwrap();
    stdout(&out);
    let text = std::fs::read_to_string(&log).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["outputs"][0], out_csv.to_str().unwrap());
    let digest = lines[1]["input_digests"][0][1].as_str().unwrap();
    assert_eq!(digest.len(), 64);

    // no flag and no variable: nothing written
    stdout(&bcw(&[
        "bounds",
        "attenuator",
        "--lambda",
        "0.5",
        "--env",
        "thermal:1",
        "--N",
        "1",
    ]));
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 2);

    // unwritable log: warning only
    let out = bcw(&["--runlog", "/nonexistent/dir/x.ndjson", "figure", "fig1"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}
