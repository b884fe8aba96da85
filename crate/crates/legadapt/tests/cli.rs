use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use legadapt::core::estimators::design_point;
use legadapt::core::legendre::legendre_l;
use legadapt::report::FitReport;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn legadapt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_legadapt")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn column(values: impl Iterator<Item = f64>) -> String {
    values.map(|v| format!("{v}\n")).collect()
}

#[test]
fn fit_reg_writes_report_and_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let n = 512;
    let data = write(tmp.path(), "y.txt", &column((1..=n).map(|i| (2.0 * design_point(n, i)).cos())));
    let out = tmp.path().join("out");
    let o = legadapt(&["fit-reg", s(&data), "--out", s(&out), "--grid", "17", "--tables"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("report.json")).unwrap();
    let rep = FitReport::from_json(&text).unwrap();
    assert_eq!(rep.n, n);
    assert_eq!(rep.grid.len(), 17);
    assert!(rep.sigma2_hat.is_some());
    assert_eq!(rep.to_json().unwrap(), text);
    let grid = std::fs::read_to_string(out.join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 18);
    let scan = std::fs::read_to_string(out.join("scan.csv")).unwrap();
    assert!(scan.starts_with("N,tau\n1,"));
    assert_eq!(scan.lines().count(), n / 3 + 1);
}

#[test]
fn two_column_input_must_match_design() {
    let tmp = tempfile::tempdir().unwrap();
    let n = 40;
    let good: String = (1..=n).map(|i| format!("{}, {}\n", design_point(n, i), i)).collect();
    let p = write(tmp.path(), "xy.txt", &format!("# x, y\n{good}"));
    assert!(legadapt(&["fit-reg", s(&p)]).status.success());
    let shifted: String = (1..=n).map(|i| format!("{},{}\n", design_point(n, i) - 0.01, i)).collect();
    let p = write(tmp.path(), "bad.txt", &shifted);
    let o = legadapt(&["fit-reg", s(&p)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("-1 + 2i/n"), "{}", stderr(&o));
}

#[test]
fn noiseless_basis_function_file() {
    // The block rule never sees index 5 from N = 1 and the one-sided design
    // leaves order-1/n errors elsewhere, so the smallest block is tau(1).
    let tmp = tempfile::tempdir().unwrap();
    let n = 2048;
    let p = write(tmp.path(), "l5.txt", &column((1..=n).map(|i| legendre_l(5, design_point(n, i)))));
    let o = legadapt(&["fit-reg", s(&p)]);
    assert!(o.status.success());
    let rep = FitReport::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(rep.n_selected, 1);
    assert!(rep.tau_star <= 1e-3);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let short = write(tmp.path(), "short.txt", &column((0..10).map(f64::from)));
    let o = legadapt(&["fit-reg", s(&short)]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("16"));

    let text = format!("{}oops\n", column((0..20).map(f64::from)));
    let bad = write(tmp.path(), "bad.txt", &text);
    let o = legadapt(&["fit-reg", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.txt:21:"), "{}", stderr(&o));

    let missing = tmp.path().join("missing.txt");
    assert_eq!(legadapt(&["fit-reg", s(&missing)]).status.code(), Some(2));
    assert_eq!(legadapt(&["fit-reg"]).status.code(), Some(1));
    assert_eq!(legadapt(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(legadapt(&["--help"]).status.code(), Some(0));
    let ok = write(tmp.path(), "ok.txt", &column((0..20).map(f64::from)));
    assert_eq!(legadapt(&["fit-reg", s(&ok), "--rescale", "0", "1"]).status.code(), Some(1));
    assert_eq!(legadapt(&["fit-reg", s(&ok), "--tables"]).status.code(), Some(1));
}

#[test]
fn density_input_range_and_rescale() {
    let tmp = tempfile::tempdir().unwrap();
    let mut values: Vec<f64> = (0..40).map(|i| i as f64 / 40.0).collect();
    values.push(1.5);
    let p = write(tmp.path(), "xi.txt", &column(values.iter().copied()));
    let o = legadapt(&["fit-den", s(&p)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("41"), "{}", stderr(&o));
    let o = legadapt(&["fit-den", s(&p), "--rescale", "0", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rep = FitReport::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(rep.input.rescale, Some([0.0, 3.0]));
    assert!((rep.integral.unwrap() - 1.0).abs() <= 1e-10);
    let o = legadapt(&["fit-den", s(&p), "--rescale", "-1", "-2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn uniform_density_is_flat() {
    let tmp = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let p = write(tmp.path(), "u.txt", &column((0..100_000).map(|_| rng.random_range(-1.0..=1.0))));
    let o = legadapt(&["fit-den", s(&p), "--grid", "101"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rep = FitReport::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    for g in rep.grid.iter().filter(|g| g.x.abs() <= 0.9) {
        assert!((g.value - 0.5).abs() <= 0.05, "f({}) = {}", g.x, g.value);
    }
}

#[test]
fn scan_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "xi.txt", &column((0..60).map(|i| (i as f64 / 60.0) - 0.5)));
    let o = legadapt(&["scan", s(&p), "--density"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 21);
}

const CONFIG: &str = r#"
problem = "regression"
n = [64, 128]
trials = 3
seed = 1

[truth]
class = "Z"
alpha = 1.0
beta = 0.5
j = 60

[noise]
kind = "uniform"
sigma = 0.2
"#;

#[test]
fn simulate_outputs_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", CONFIG);
    let out = tmp.path().join("sim");
    let o = legadapt(&["simulate", s(&cfg), "--out", s(&out), "--trials", "4", "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trials = std::fs::read_to_string(out.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 4);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["seed"], 7);
    assert_eq!(summary["config"]["trials"], 4);
    assert_eq!(summary["per_n"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_class = write(tmp.path(), "a.toml", &CONFIG.replace("\"Z\"", "\"V\""));
    let o = legadapt(&["simulate", s(&bad_class)]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("V") && msg.contains("`W`") && msg.contains("`Z`"), "{msg}");

    let bad_key = write(tmp.path(), "b.toml", &CONFIG.replace("seed = 1", "seed = 1\nsede = 2"));
    let o = legadapt(&["simulate", s(&bad_key)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sede"), "{}", stderr(&o));

    let cfg = write(tmp.path(), "c.toml", CONFIG);
    let o = legadapt(&["simulate", s(&cfg), "--check"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("[acceptance]"));
}

#[test]
fn failed_check_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let strict = format!(
        "{CONFIG}
[acceptance]
subset_trials = 3
rate_factor = [100.0, 200.0]
adaptivity_max = 0.5
tau_consistency_max = 0.5
gamma_window = [0.1, 0.4]
coverage_min = 0.8
coverage_slack = 0.05
ratio_p95_max = 20.0
"
    );
    let cfg = write(tmp.path(), "c.toml", &strict);
    let o = legadapt(&["simulate", s(&cfg), "--check"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("FAIL rate"), "{}", stderr(&o));
}
