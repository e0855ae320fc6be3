use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn squashnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squashnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn field(out: &Output, key: &str) -> f64 {
    let text = stdout(out);
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key:?} in {text}"));
    line.split_whitespace().next().unwrap().parse().unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn write(p: &str, contents: &str) {
    fs::write(Path::new(p), contents).unwrap();
}

#[test]
fn scalar_gate_hits_its_levels() {
    let out = squashnet(&[
        "separate-points",
        "--x0",
        "0",
        "--x1",
        "1",
        "--eps",
        "0.2",
        "--sigma",
        "logistic",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!((field(&out, "sigma(s + t*x0)") - 0.1).abs() < 1e-12);
    assert!((field(&out, "sigma(s + t*x1)") - 0.9).abs() < 1e-12);
}

#[test]
fn scalar_gate_probe_csv_and_side_conditions() {
    let dir = TempDir::new().unwrap();
    let probes = path(&dir, "probe.csv");
    let out = squashnet(&[
        "separate-points",
        "--x0",
        "-1",
        "--x1",
        "2",
        "--eps",
        "0.05",
        "--side-conditions",
        "--probe-csv",
        &probes,
        "--probe-count",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("side conditions: hold"));
    let csv = fs::read_to_string(&probes).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,value");
    assert_eq!(lines.len(), 12);
    assert!(lines[1].starts_with("-4,"));
}

#[test]
fn scalar_gate_rejections_and_warning() {
    let out = squashnet(&[
        "separate-points",
        "--x0",
        "0.5",
        "--x1",
        "0.5",
        "--eps",
        "0.2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("degenerate pair"));

    let out = squashnet(&[
        "separate-points",
        "--x0",
        "0",
        "--x1",
        "1",
        "--eps",
        "0.6",
        "--side-conditions",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("need eps < 1/2"));

    let out = squashnet(&["separate-points", "--x0", "0", "--x1", "1", "--eps", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = squashnet(&[
        "separate-points",
        "--x0",
        "0",
        "--x1",
        "1",
        "--eps",
        "0.1",
        "--sigma",
        "relu",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn point_set_separator() {
    let dir = TempDir::new().unwrap();
    let set = path(&dir, "b.csv");
    let net = path(&dir, "g.json");
    write(&set, "x1,x2\n0.5,0.5\n1,0\n0.25,1\n");
    let out = squashnet(&[
        "separate-point-set",
        "--x0",
        "0.1,0.1",
        "--set",
        &set,
        "--domain",
        "0,1,5;0,1,5",
        "--eps",
        "0.1",
        "--out",
        &net,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(field(&out, "g(x0)") < 0.1);
    assert!(field(&out, "min over set") > 0.9 - 1e-9);
    assert!(fs::metadata(&net).unwrap().len() > 0);

    let out = squashnet(&[
        "separate-point-set",
        "--x0",
        "0.5,0.5",
        "--set",
        &set,
        "--domain",
        "0,1,5;0,1,5",
        "--out",
        &net,
    ]);
    assert_eq!(out.status.code(), Some(2));
    let off_grid = path(&dir, "off.csv");
    write(&off_grid, "x1,x2\n0.3,0.5\n");
    let out = squashnet(&[
        "separate-point-set",
        "--x0",
        "0,0",
        "--set",
        &off_grid,
        "--domain",
        "0,1,5;0,1,5",
        "--out",
        &net,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row 1"));
}

#[test]
fn singleton_sets_and_round_trip_through_verify() {
    let dir = TempDir::new().unwrap();
    let (a, b, net) = (
        path(&dir, "a.csv"),
        path(&dir, "b.csv"),
        path(&dir, "h.json"),
    );
    write(&a, "x1\n0.25\n");
    write(&b, "x1\n0.75\n");
    let out = squashnet(&[
        "separate-sets",
        "--set-a",
        &a,
        "--set-b",
        &b,
        "--domain",
        "0,1,5",
        "--out",
        &net,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(field(&out, "min over A") > 5.0 / 6.0);
    assert!(field(&out, "max over B") < 1.0 / 6.0);

    // the indicator of A as a target: H is within 1/6 of it on A ∪ B
    let target = path(&dir, "t.csv");
    write(&target, "x1,value\n0,0\n0.25,1\n0.5,0\n0.75,0\n1,0\n");
    let out = squashnet(&[
        "verify",
        "--network",
        &net,
        "--target",
        &format!("csv:{target}"),
        "--domain",
        "0,1,5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(field(&out, "sup error") <= 1.0);

    let overlap = path(&dir, "ab.csv");
    write(&overlap, "x1\n0.25\n0.5\n");
    let out = squashnet(&[
        "separate-sets",
        "--set-a",
        &overlap,
        "--set-b",
        &a,
        "--domain",
        "0,1,5",
        "--out",
        &net,
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn approximate_sine_then_verify() {
    let dir = TempDir::new().unwrap();
    let (net, trace) = (path(&dir, "f.json"), path(&dir, "trace.csv"));
    let out = squashnet(&[
        "approximate",
        "--target",
        "sin2pix",
        "--domain",
        "0,1,257",
        "--eps",
        "0.05",
        "--beta",
        "0.8",
        "--out",
        &net,
        "--trace",
        &trace,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(field(&out, "final error") < 0.05);
    let rows = fs::read_to_string(&trace).unwrap().lines().count() - 1;
    assert!(rows <= 14);
    assert_eq!(field(&out, "iterations") as usize, rows);

    let out = squashnet(&[
        "verify",
        "--network",
        &net,
        "--target",
        "sin2pix",
        "--domain",
        "0,1,257",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(field(&out, "sup error") < 0.05);
    assert!(!stdout(&out).contains("no guarantee"));

    let heatmap = path(&dir, "heat.csv");
    let out = squashnet(&[
        "verify",
        "--network",
        &net,
        "--target",
        "sin2pix",
        "--domain",
        "0,1,257",
        "--verify-multiplier",
        "4",
        "--heatmap",
        &heatmap,
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("no guarantee"));
    let heat = fs::read_to_string(&heatmap).unwrap();
    assert_eq!(heat.lines().next(), Some("x1,network,target,error"));
    assert_eq!(heat.lines().count(), 1 + 1025);
}

#[test]
fn approximate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let (net, trace) = (path(&dir, "f.json"), path(&dir, "trace.csv"));
    let out = squashnet(&[
        "approximate",
        "--target",
        "sin2pix",
        "--domain",
        "0,1,257",
        "--eps",
        "0.05",
        "--beta",
        "0.7",
        "--out",
        &net,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!Path::new(&net).exists());

    let out = squashnet(&[
        "approximate",
        "--target",
        "const:1.5",
        "--domain",
        "0,1,9;0,1,9",
        "--eps",
        "0.05",
        "--out",
        &net,
        "--trace",
        &trace,
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(field(&out, "iterations"), 0.0);
    assert_eq!(fs::read_to_string(&trace).unwrap().lines().count(), 1);

    let out = squashnet(&[
        "approximate",
        "--target",
        "sin2pix",
        "--domain",
        "0,1,257",
        "--eps",
        "0.01",
        "--max-iterations",
        "2",
        "--out",
        &net,
        "--trace",
        &trace,
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(fs::read_to_string(&trace).unwrap().lines().count(), 3);

    let out = squashnet(&[
        "approximate",
        "--target",
        "sin2pix",
        "--domain",
        "0,1,17",
        "--eps",
        "0.1",
        "--sigma",
        "ramp:0,1",
        "--out",
        &net,
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_invocations_give_identical_files() {
    let dir = TempDir::new().unwrap();
    let run = |tag: &str| {
        let (net, trace) = (
            path(&dir, &format!("{tag}.json")),
            path(&dir, &format!("{tag}.csv")),
        );
        let out = squashnet(&[
            "approximate",
            "--target",
            "gauss:0.5,0.5;0.2;1",
            "--domain",
            "0,1,9;0,1,9",
            "--eps",
            "0.1",
            "--out",
            &net,
            "--trace",
            &trace,
            "--seed",
            "7",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        (fs::read(net).unwrap(), fs::read(trace).unwrap())
    };
    assert_eq!(run("first"), run("second"));
}

#[test]
fn corrupt_network_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let net = path(&dir, "bad.json");
    write(&net, "{\"input_dim\": 1, \"sigma\": ");
    let out = squashnet(&[
        "verify",
        "--network",
        &net,
        "--target",
        "sin2pix",
        "--domain",
        "0,1,9",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("parse error at byte"));

    let out = squashnet(&[
        "verify",
        "--network",
        &path(&dir, "missing.json"),
        "--target",
        "sin2pix",
        "--domain",
        "0,1,9",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn export_writes_plot_data() {
    let dir = TempDir::new().unwrap();
    let (net, csv) = (path(&dir, "f.json"), path(&dir, "grid.csv"));
    let out = squashnet(&[
        "approximate",
        "--target",
        "proj:0",
        "--domain",
        "-1,1,5;0,1,3",
        "--eps",
        "0.2",
        "--out",
        &net,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = squashnet(&[
        "export",
        "--network",
        &net,
        "--domain",
        "-1,1,5;0,1,3",
        "--out",
        &csv,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("x1,x2,network"));
    assert_eq!(text.lines().count(), 16);

    let out = squashnet(&[
        "export",
        "--network",
        &net,
        "--domain",
        "-1,1,5;0,1,3",
        "--target",
        "proj:0",
        "--out",
        &csv,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("x1,x2,network,target,error"));
    for line in text.lines().skip(1) {
        let error: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(error < 0.2);
    }
}
