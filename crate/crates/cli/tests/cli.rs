use std::path::Path;
use std::process::{Command, Output};

fn tsh(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsh"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("tsh runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn run_writes_curve_and_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let o = tsh(
        &[
            "run",
            "--mu",
            "0.9,0.5",
            "--h",
            "1.0",
            "--horizon",
            "2000",
            "--runs",
            "20",
            "--seed",
            "42",
            "--out",
            "curve.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,mean_regret,stderr,runs"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.last().unwrap()[0], "2000");
    assert!(rows.iter().all(|r| r[3] == "20"));
    let means: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(means.windows(2).all(|w| w[0] <= w[1]));

    let env: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("curve.json")).unwrap())
            .unwrap();
    assert_eq!(env["command"], "run");
    assert_eq!(env["schema_version"], "1");
    assert_eq!(env["config"]["master_seed"], 42);
    assert_eq!(env["config"]["horizon"], 2000);
    assert!(env["wall_time"].as_f64().unwrap() >= 0.0);
    assert_eq!(env["results"]["predicted_regime"]["kind"], "Logarithmic");
}

#[test]
fn run_replays_from_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "run",
        "--mu",
        "0.8,0.6,0.3",
        "--h",
        "1.5",
        "--horizon",
        "300",
        "--runs",
        "6",
        "--seed",
        "9",
    ];
    let mut first = base.to_vec();
    first.extend(["--checkpoints", "linear:10", "--out", "a.csv"]);
    assert_eq!(code(&tsh(&first, dir.path())), 0);
    let o = tsh(&["run", "--config", "a.json", "--out", "b.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(String::from_utf8_lossy(&a).lines().count(), 11);
}

#[test]
fn run_stdout_and_json_modes() {
    let dir = tempfile::tempdir().unwrap();
    let o = tsh(
        &[
            "run",
            "--mu",
            "0.5,0.5",
            "--h",
            "1",
            "--horizon",
            "64",
            "--runs",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("t,mean_regret,stderr,runs\n"));
    assert!(out
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(1) == Some("0")));

    let o = tsh(
        &[
            "run",
            "--mu",
            "0.7,0.4",
            "--horizon",
            "64",
            "--runs",
            "2",
            "--mode",
            "baseline",
            "--json",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let env: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(env["config"]["policy"]["mode"], "posterior_draw_baseline");
    assert!(env["results"]["predicted_regime"].is_null());
}

#[test]
fn run_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // validation failures
    assert_eq!(code(&tsh(&["run", "--mu", "1.5,0.5"], dir.path())), 1);
    assert_eq!(code(&tsh(&["run", "--mu", "0.9"], dir.path())), 1);
    assert_eq!(
        code(&tsh(&["run", "--mu", "0.9,0.5", "--h", "-1"], dir.path())),
        1
    );
    assert_eq!(
        code(&tsh(&["run", "--mu", "0.9,0.5", "--runs", "0"], dir.path())),
        1
    );
    assert_eq!(code(&tsh(&["run"], dir.path())), 1);
    // usage errors
    assert_eq!(code(&tsh(&["run", "--mu", "abc"], dir.path())), 2);
    assert_eq!(
        code(&tsh(
            &["run", "--mu", "0.9,0.5", "--checkpoints", "log"],
            dir.path()
        )),
        2
    );
    assert_eq!(code(&tsh(&["run", "--bogus"], dir.path())), 2);
    assert_eq!(code(&tsh(&["frobnicate"], dir.path())), 2);
}

#[test]
fn thresholds_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = tsh(&["thresholds", "--mu1", "0.9", "--mu2", "0.5"], dir.path());
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["h_range"]["lower"], 0.5);
    let upper = r["h_range"]["upper"].as_f64().unwrap();
    assert!((upper - 1.251_551_099_461_677).abs() < 1e-9, "{upper}");
    assert_eq!(r["regime"]["kind"], "Logarithmic");
    assert_eq!(r["phase_length"], 922);
    for key in ["y", "delta", "r", "s", "u", "kl"] {
        assert!(r[key].is_number(), "{key}");
    }

    let o = tsh(
        &["thresholds", "--mu1", "0.9", "--mu2", "0.5", "--h", "0.25"],
        dir.path(),
    );
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["regime"]["kind"], "PolynomialSmallH");
    assert_eq!(r["regime"]["exponent"], 0.5);

    assert_eq!(
        code(&tsh(
            &["thresholds", "--mu1", "0.5", "--mu2", "0.9"],
            dir.path()
        )),
        1
    );
    assert_eq!(code(&tsh(&["thresholds", "--mu1", "0.5"], dir.path())), 2);
}

#[test]
fn sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = tsh(
        &[
            "sweep",
            "--mu",
            "0.9,0.5",
            "--h-grid",
            "0.25:1:0.75",
            "--horizon",
            "512",
            "--runs",
            "8",
            "--seed",
            "3",
            "--out",
            "sw",
            "--gnuplot",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sw = dir.path().join("sw");
    let summary = std::fs::read_to_string(sw.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next(),
        Some("h,final_regret_mean,stderr,log_slope,power_exponent,predicted_regime")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("0.25,") && rows[0].ends_with(",PolynomialSmallH"));
    assert!(rows[1].starts_with("1,") && rows[1].ends_with(",Logarithmic"));
    assert_eq!(stdout(&o), summary);

    let long = std::fs::read_to_string(sw.join("long.csv")).unwrap();
    assert!(long.starts_with("h,t,mean_regret,stderr\n"));
    // 1, 2, ..., 256, 512
    assert_eq!(long.lines().count(), 1 + 2 * 10);
    for f in ["curve_h0.25.csv", "curve_h1.csv", "sweep.json", "plot.gp"] {
        assert!(sw.join(f).exists(), "{f}");
    }
    let gp = std::fs::read_to_string(sw.join("plot.gp")).unwrap();
    assert!(gp.contains("'curve_h0.25.csv'") && gp.contains("'curve_h1.csv'"));
}

#[test]
fn sweep_singleton_matches_run_seed_derivation() {
    let dir = tempfile::tempdir().unwrap();
    let o = tsh(
        &[
            "sweep",
            "--mu",
            "0.8,0.4",
            "--h-grid",
            "1.0:1.0:1.0",
            "--horizon",
            "100",
            "--runs",
            "3",
            "--out",
            "s",
            "--json",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let env: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(env["results"]["rows"].as_array().unwrap().len(), 1);
    let summary = std::fs::read_to_string(dir.path().join("s/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
}

#[test]
fn sweep_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&tsh(&["sweep", "--mu", "0.9,0.5"], dir.path())), 2);
    assert_eq!(
        code(&tsh(
            &["sweep", "--mu", "0.9,0.5", "--h-grid", "1:2"],
            dir.path()
        )),
        2
    );
    assert_eq!(
        code(&tsh(
            &["sweep", "--mu", "0.9,0.5", "--h-grid", "2:1:0.5"],
            dir.path()
        )),
        1
    );
    assert_eq!(
        code(&tsh(
            &["sweep", "--mu", "0.9,0.5", "--h-grid", "0:1:0"],
            dir.path()
        )),
        1
    );
}

#[test]
fn verify_suites() {
    let dir = tempfile::tempdir().unwrap();
    let o = tsh(&["verify", "--suite", "lemma3"], dir.path());
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("max residual"));
    let row = out.lines().find(|l| l.starts_with("lemma3")).unwrap();
    let residual: f64 = row.split_whitespace().nth(5).unwrap().parse().unwrap();
    assert!(residual <= 1e-10);

    assert_eq!(code(&tsh(&["verify", "--suite", "fact2"], dir.path())), 0);
    let o = tsh(&["verify", "--suite", "all"], dir.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let table = stdout(&o);
    for name in [
        "lemma3",
        "fact2",
        "lemma4",
        "chernoff",
        "lemma567",
        "exceedance",
    ] {
        assert!(
            table
                .lines()
                .any(|l| l.starts_with(name) && l.ends_with("ok")),
            "{name}\n{table}"
        );
    }
    assert_eq!(code(&tsh(&["verify", "--suite", "lemma9"], dir.path())), 2);
}

#[test]
fn verify_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let o = tsh(
        &[
            "verify", "--suite", "lemma567", "--json", "--out", "v.jsonl",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("v.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["lemma"], "lemma567");
    assert!(first["grid_point"]["mu1"].is_number());
    assert_eq!(first["pass"], true);
    assert!(text.lines().count() > 1000);
}
