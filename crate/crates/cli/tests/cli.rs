use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rcv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcv")).args(args).output().expect("spawn rcv")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_sample(path: &Path, n: usize, offset: f64) {
    // A smooth, deterministic, right-skewed sample.
    let text: String = (1..=n)
        .map(|i| {
            let u = (i as f64 - 0.5) / n as f64;
            format!("{}\n", offset - (1.0 - u).ln())
        })
        .collect();
    fs::write(path, text).unwrap();
}

fn csv_cell(row: &str, header: &str, name: &str) -> String {
    let text = format!("{header}\n{row}\n");
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut recs = rdr.records();
    let head = recs.next().unwrap().unwrap();
    let vals = recs.next().unwrap().unwrap();
    let idx = head.iter().position(|h| h == name).unwrap();
    vals[idx].to_string()
}

#[test]
fn truth_reproduces_exponential_row() {
    let o = rcv(&["truth", "--dist", "exp(1)"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let row = lines.next().unwrap();
    let cell = |name| csv_cell(row, header, name).parse::<f64>().unwrap();
    assert!((cell("cv") - 1.0).abs() < 1e-12);
    assert!((cell("rcv_q") - 1.189).abs() < 5e-4);
    assert!((cell("rcv_m") - 1.030).abs() < 1e-3);
    assert!((cell("rasd_rcv_m") - 0.950).abs() < 5e-4);
}

#[test]
fn truth_leaves_undefined_cells_empty() {
    let o = rcv(&["truth", "--dist", "pareto2(1,1)"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let row = lines.next().unwrap();
    assert_eq!(csv_cell(row, header, "cv"), "");
    assert_eq!(csv_cell(row, header, "rasd_cv"), "");
}

#[test]
fn estimate_emits_ordered_interval_json() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    write_sample(&input, 120, 4.0);
    let o = rcv(&["estimate", "--input", input.to_str().unwrap(), "--measure", "rcvm", "--method", "asymptotic"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let (est, lo, hi) = (v["estimate"].as_f64().unwrap(), v["lower"].as_f64().unwrap(), v["upper"].as_f64().unwrap());
    assert!(lo < est && est < hi, "{v}");
    assert_eq!(v["method"], "rcv-m-asymptotic");
    assert!(v["diagnostics"].is_object());
}

#[test]
fn estimate_seed_determines_bootstrap() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    write_sample(&input, 60, 2.0);
    let path = input.to_str().unwrap();
    let args = ["estimate", "--input", path, "--measure", "rcvm", "--method", "boot-np", "--boot-b", "200", "--seed", "9"];
    let a = rcv(&args);
    let b = rcv(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malformed_line_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    let mut text: String = (1..=16).map(|i| format!("{i}\n")).collect();
    text.push_str("not-a-number\n18\n");
    fs::write(&input, text).unwrap();
    let o = rcv(&["estimate", "--input", input.to_str().unwrap(), "--measure", "cv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 17"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(rcv(&["estimate", "--bogus"]).status.code(), Some(1));
    assert_eq!(rcv(&["truth", "--dist", "nope(1)"]).status.code(), Some(1));
    assert_eq!(rcv(&["estimate", "--help"]).status.code(), Some(0));
}

#[test]
fn method_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.csv");
    fs::write(&input, "5\n5\n5\n5\n5\n").unwrap();
    let o = rcv(&["estimate", "--input", input.to_str().unwrap(), "--measure", "rcvq"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn compare_emits_ratio_interval() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write_sample(&a, 100, 3.0);
    write_sample(&b, 100, 6.0);
    let o = rcv(&[
        "compare",
        "--input1",
        a.to_str().unwrap(),
        "--input2",
        b.to_str().unwrap(),
        "--measure",
        "rcvq",
        "--combine",
        "quadrature",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let est = v["estimate"].as_f64().unwrap();
    assert!(est > 1.0);
    assert!(v["lower"].as_f64().unwrap() < est && est < v["upper"].as_f64().unwrap());
}

#[test]
fn simulate_is_deterministic_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.toml");
    fs::write(
        &config,
        r#"
distributions = ["normal(5,1)", "exp(1)"]
sample_sizes = [30]
trials = 20
methods = ["gulhar", "rcv-q"]
base_seed = 17
"#,
    )
    .unwrap();
    let out1 = dir.path().join("one.csv");
    let run = |workers: &str, out: &Path| {
        rcv(&[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
        ])
    };
    let o = run("1", &out1);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("[1/2]"));
    let out3 = dir.path().join("three.csv");
    assert!(run("3", &out3).status.success());
    let a = fs::read(&out1).unwrap();
    assert_eq!(a, fs::read(&out3).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("distribution,n,method,coverage,mean_width,median_width,failures,trials"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn simulate_rejects_unknown_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.toml");
    fs::write(&config, "distributions = [\"exp(1)\"]\nmethods = [\"gulhar\"]\ntrails = 5\n").unwrap();
    let o = rcv(&["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ifcurve_writes_requested_points() {
    let o = rcv(&["ifcurve", "--dist", "lnorm(0,1)", "--points", "11"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,if_cv,if_rcv_q,if_rcv_m");
    assert_eq!(lines.len(), 12);
}
