use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dsncp::io::read_pattern_csv;
use dsncp::Window;

fn dsncp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsncp")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = dsncp(args);
    assert!(
        out.status.success(),
        "dsncp {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const THOMAS: [&str; 8] = ["--model", "thomas", "--alpha", "0.03", "--rhoY", "30", "--gamma", "10"];

fn simulate_to(path: &Path, seed: &str) {
    let mut args = vec!["simulate", "-q", "--seed", seed, "--window", "rect:0,1,0,1", "-o", p(path)];
    args.extend(THOMAS);
    ok(&args);
}

#[test]
fn simulate_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    simulate_to(&a, "7");
    simulate_to(&b, "7");
    simulate_to(&c, "8");
    let (ta, tb, tc) = (fs::read(&a).unwrap(), fs::read(&b).unwrap(), fs::read(&c).unwrap());
    assert_eq!(ta, tb);
    assert_ne!(ta, tc);
    let pattern = read_pattern_csv(ta.as_slice(), Window::unit_square()).unwrap();
    let mut again = Vec::new();
    dsncp::io::write_pattern_csv(&pattern, &mut again).unwrap();
    assert_eq!(again, ta);
    assert!(pattern.len() > 50);
}

#[test]
fn simulate_to_stdout_matches_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("x.csv");
    simulate_to(&f, "3");
    let mut args = vec!["simulate", "-q", "--seed", "3", "--window", "rect:0,1,0,1"];
    args.extend(THOMAS);
    assert_eq!(ok(&args).stdout, fs::read(&f).unwrap());
}

#[test]
fn curves_default_grid_has_401_rows() {
    let out = ok(&["curves", "--model", "ginibre-dpp-thomas", "--alpha", "1", "--beta", "2", "--stat", "pcf"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,value");
    assert_eq!(lines.len(), 402);
    assert_eq!(lines[1], "0,1.5");
    assert!(lines[401].starts_with("8,"));
}

#[test]
fn crossover_radius() {
    let out = ok(&["curves", "--model", "gaussian-dpp-thomas", "--alpha", "1", "--beta", "2", "--stat", "crossover"]);
    let r: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((r - (12.0 * 3f64.ln()).sqrt()).abs() < 1e-12);
    let thomas = dsncp(&["curves", "--model", "thomas", "--alpha", "1", "--rhoY", "0.1", "--stat", "crossover"]);
    assert_eq!(thomas.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(dsncp(&["simulate", "--bogus"]).status.code(), Some(2));
    assert_eq!(dsncp(&["curves", "--model", "nope", "--alpha", "1", "--stat", "K"]).status.code(), Some(2));
    let violation = dsncp(&[
        "simulate", "--model", "gaussian-dpp-thomas", "--alpha", "1", "--beta", "2", "--rhoY", "1", "--gamma", "1",
        "--window", "rect:0,1,0,1",
    ]);
    assert_eq!(violation.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&violation.stderr).contains("existence"));
    let missing = dsncp(&["fit", "--data", "/nonexistent/x.csv", "--window", "rect:0,1,0,1", "--model", "thomas"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn fit_writes_json_with_all_fields() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    simulate_to(&data, "5");
    let fit = dir.path().join("fit.json");
    ok(&["fit", "-q", "--data", p(&data), "--window", "rect:0,1,0,1", "--model", "ginibre-dpp-thomas", "-o", p(&fit)]);
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&fit).unwrap()).unwrap();
    for key in ["family", "alpha", "beta", "rhoY", "gamma", "objective", "converged", "options"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["family"], "ginibre-dpp-thomas");
    let beta = v["beta"].as_f64().unwrap();
    let rho = v["rhoY"].as_f64().unwrap();
    assert!((rho * std::f64::consts::PI * beta * beta - 1.0).abs() < 1e-9);

    let all = ok(&["fit", "-q", "--data", p(&data), "--window", "rect:0,1,0,1", "--all-families"]);
    let arr: Vec<serde_json::Value> = serde_json::from_slice(&all.stdout).unwrap();
    assert_eq!(arr.len(), 3);
}

#[test]
fn envelope_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    simulate_to(&data, "6");
    let fit = dir.path().join("fit.json");
    ok(&["fit", "-q", "--data", p(&data), "--window", "rect:0,1,0,1", "--model", "thomas", "-o", p(&fit)]);
    let csv = dir.path().join("env.csv");
    let run = |out: &Path| {
        ok(&[
            "envelope", "-q", "--seed", "9", "--data", p(&data), "--window", "rect:0,1,0,1", "--fit", p(&fit), "--stat",
            "K", "--nsim", "99", "-o", p(out),
        ])
    };
    run(&csv);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("r,obs,lo,hi,central\n"));
    assert_eq!(text.lines().count(), 514);
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(csv.with_extension("json")).unwrap()).unwrap();
    let pv = summary["p_value"].as_f64().unwrap();
    assert!(pv > 0.0 && pv <= 1.0);
    assert!(((pv * 100.0).round() - pv * 100.0).abs() < 1e-9);
    assert_eq!(summary["n_sim"], 99);
    assert_eq!(summary["seed"], 9);

    let again = dir.path().join("again.csv");
    run(&again);
    assert_eq!(fs::read(&again).unwrap(), fs::read(&csv).unwrap());

    let too_few = dsncp(&[
        "envelope", "-q", "--data", p(&data), "--window", "rect:0,1,0,1", "--fit", p(&fit), "--nsim", "19", "-o",
        p(&csv),
    ]);
    assert_eq!(too_few.status.code(), Some(2));
}

#[test]
fn study_resumes_by_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.json");
    fs::write(
        &cfg,
        r#"{"true_families": ["thomas"], "alphas": [0.05], "gammas": [10], "rhoYs": [20],
            "fitted_families": ["thomas"], "replicates": 2, "n_sim": 99, "statistic": "K"}"#,
    )
    .unwrap();
    let out = dir.path().join("study.csv");
    ok(&["study", "-q", "--config", p(&cfg), "-o", p(&out)]);
    let first = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines[0], "true_family,fitted_family,alpha,gamma,rhoY,reject_rate,mean_rhoY_ratio");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("thomas,thomas,0.05,10,20,"));

    // rerun skips the finished cell and leaves the file untouched
    let rerun = ok(&["study", "--config", p(&cfg), "-o", p(&out)]);
    assert!(String::from_utf8_lossy(&rerun.stderr).contains("already done"));
    assert_eq!(fs::read_to_string(&out).unwrap(), first);

    // a fresh run with the same seed reproduces the bytes
    let out2 = dir.path().join("study2.csv");
    ok(&["study", "-q", "--config", p(&cfg), "-o", p(&out2)]);
    assert_eq!(fs::read_to_string(&out2).unwrap(), first);
}

#[test]
fn spectrum_dump() {
    let out = ok(&[
        "spectrum", "-q", "--model", "ginibre-dpp-thomas", "--alpha", "0.5", "--beta", "1", "--gamma", "2", "--window",
        "rect:0,4,0,4",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,eigenvalue"));
    let values: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(!values.is_empty());
    assert!(values.iter().all(|&v| (0.0..=1.0).contains(&v)));
    assert!(values.windows(2).all(|w| w[0] >= w[1]));
}
