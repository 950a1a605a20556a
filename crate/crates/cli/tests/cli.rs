use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn robinlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robinlab")).args(args).output().expect("binary runs")
}

fn csv_column(path: &Path, name: &str) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let index = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(index).unwrap().to_string()).collect()
}

const SMALL: &str = "\
name = small
family = ellipse
aspects = [1.2, 1.4]
checks = [intermediate, ec_ball]
q = [1]
beta = [1]
c_rel = [0.5, 2]
n_r = 16
n_theta = 64
samples = 256
";

#[test]
fn out_of_range_q_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    fs::write(&path, SMALL.replace("q = [1]", "q = [2.5]")).unwrap();
    let out = robinlab(&["run", path.to_str().unwrap(), "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("`q`") && stderr.contains("2.5"), "{stderr}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_key_and_missing_file_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.conf");
    fs::write(&path, format!("{SMALL}betta = 1\n")).unwrap();
    assert_eq!(robinlab(&["run", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(robinlab(&["run", "no-such-config"]).status.code(), Some(2));
}

#[test]
fn rerun_overwrites_with_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.conf");
    fs::write(&path, SMALL).unwrap();
    let out_dir = dir.path().join("out");
    let run = || robinlab(&["run", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(run().status.code(), Some(0));
    let read = |f: &str| fs::read(out_dir.join(f)).unwrap();
    let first = (read("intermediate.csv"), read("ec_ball.csv"), read("summary.txt"));
    assert_eq!(run().status.code(), Some(0));
    assert_eq!(first, (read("intermediate.csv"), read("ec_ball.csv"), read("summary.txt")));
    // one row per grid point: 2 shapes x 1 q x 1 beta, times 2 obstacle levels for ec_ball
    assert_eq!(csv_column(&out_dir.join("intermediate.csv"), "pass").len(), 2);
    assert_eq!(csv_column(&out_dir.join("ec_ball.csv"), "pass").len(), 4);
    let text = String::from_utf8(first.0).unwrap();
    assert!(!text.contains('\r'));
}

#[test]
fn ellipse_builtin_reports_positive_deficits() {
    let dir = tempfile::tempdir().unwrap();
    let out = robinlab(&["run", "ellipse-q1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    for file in ["intermediate.csv", "quantitative.csv"] {
        let deficits = csv_column(&dir.path().join(file), "deficit");
        assert_eq!(deficits.len(), 5);
        assert!(deficits.iter().all(|d| d.parse::<f64>().unwrap() > 0.0));
        assert!(csv_column(&dir.path().join(file), "pass").iter().all(|p| p == "true"));
    }
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("status: PASS") && summary.contains("empirical constant"));
}

#[test]
fn ball_builtin_has_vanishing_deficits() {
    let dir = tempfile::tempdir().unwrap();
    let out = robinlab(&["run", "ball-sanity", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    for file in ["intermediate.csv", "quantitative.csv", "ec_ball.csv", "trace_poincare.csv"] {
        let path = dir.path().join(file);
        let deficits = csv_column(&path, "deficit");
        let tolerances = csv_column(&path, "tolerance");
        for (d, t) in deficits.iter().zip(&tolerances) {
            let (d, t): (f64, f64) = (d.parse().unwrap(), t.parse().unwrap());
            assert!(d.abs() <= t, "{file}: deficit {d} tolerance {t}");
        }
    }
}

#[test]
fn ball_subcommand_prints_energy() {
    let out = robinlab(&["ball", "--n", "2", "--q", "1", "--beta", "1", "--R", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let energy: f64 = stdout.lines().find_map(|l| l.strip_prefix("E ")).unwrap().trim().parse().unwrap();
    assert!((energy + std::f64::consts::PI / 2.0 * 0.625).abs() < 1e-9);

    let bad = robinlab(&["ball", "--q", "2.5"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn check_subcommand_runs_a_family() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let out = robinlab(&[
        "check",
        "intermediate",
        "--family",
        "ellipse",
        "--grid",
        "1.2,1.5",
        "--n-r",
        "16",
        "--n-theta",
        "64",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(csv_column(&csv, "check"), vec!["intermediate", "intermediate"]);
    assert_eq!(robinlab(&["check", "sideways", "--family", "ellipse", "--grid", "1.2"]).status.code(), Some(2));
}

#[test]
fn list_configs_names_the_builtins() {
    let out = robinlab(&["list-configs"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    for name in ["ball-sanity", "ellipse-q1", "shape-sweep"] {
        assert!(stdout.contains(name));
    }
}
