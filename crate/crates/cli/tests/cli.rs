use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn geomedian(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geomedian"))
        .args(args)
        .env("GEOMEDIAN_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn summary_point(out: &Output) -> Vec<f64> {
    let v: Value = serde_json::from_str(&stdout(out)).expect("JSON summary");
    v["point"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&geomedian(&["--help"])), 0);
    assert_eq!(code(&geomedian(&["--version"])), 0);
    assert_eq!(code(&geomedian(&["radar", "detect", "--help"])), 0);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&geomedian(&[])), 2);
    assert_eq!(code(&geomedian(&["solve", "median"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "x,y\n0,abc\n");
    let out = geomedian(&["solve", "median", "-i", &bad, "--manifold", "euclidean:2"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("abc"));
    let ok = write(dir.path(), "ok.csv", "x,y\n0,0\n");
    assert_eq!(code(&geomedian(&["solve", "median", "-i", &ok])), 2);
    assert_eq!(
        code(&geomedian(&[
            "solve",
            "median",
            "-i",
            &ok,
            "--manifold",
            "sphere"
        ])),
        2
    );
    let missing = dir.path().join("missing.csv");
    assert_eq!(
        code(&geomedian(&[
            "solve",
            "median",
            "-i",
            missing.to_str().unwrap(),
            "--manifold",
            "euclidean:2"
        ])),
        2
    );
    assert_eq!(
        code(&geomedian(&["radar", "detect", "--threshold", "bogus"])),
        2
    );
}

#[test]
fn triangle_median_is_the_fermat_point() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(
        dir.path(),
        "tri.csv",
        "x,y\n0,0\n1,0\n0.5,0.8660254037844386\n",
    );
    let out = geomedian(&[
        "solve",
        "median",
        "-i",
        &tri,
        "--manifold",
        "euclidean:2",
        "--warm-start",
    ]);
    assert_eq!(code(&out), 0);
    let x = summary_point(&out);
    assert!(
        (x[0] - 0.5).abs() < 1e-5 && (x[1] - 3f64.sqrt() / 6.0).abs() < 1e-5,
        "{x:?}"
    );
}

#[test]
fn single_atom_median_is_the_atom() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.csv", "p0,re,im\n2.5,0.3,-0.2\n");
    let out_dir = dir.path().join("out");
    let out = geomedian(&[
        "solve",
        "median",
        "-i",
        &one,
        "--manifold",
        "positive+disc",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(summary_point(&out), vec![2.5, 0.3, -0.2]);
    assert!(out_dir.join("point.csv").exists() && out_dir.join("result.json").exists());
}

#[test]
fn weighted_json_pmean() {
    let dir = tempfile::tempdir().unwrap();
    let mu = write(
        dir.path(),
        "mu.json",
        r#"{"manifold": "euclidean:1", "points": [[0.0], [4.0]], "weights": [3.0, 1.0]}"#,
    );
    let out = geomedian(&["solve", "pmean", "-i", &mu]);
    assert_eq!(code(&out), 0);
    assert!((summary_point(&out)[0] - 1.0).abs() < 1e-9);
}

#[test]
fn bounds_table() {
    let out = geomedian(&["bounds", "--alpha", "1,0.75", "--json"]);
    assert_eq!(code(&out), 0);
    let rows: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let refined: Vec<f64> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["refined"].as_f64().unwrap())
        .collect();
    assert!((refined[0] - 1.0).abs() < 1e-12);
    assert!((refined[1] - 0.75 / 0.5f64.sqrt()).abs() < 1e-12);
    assert_eq!(code(&geomedian(&["bounds", "--alpha", "0.5"])), 2);
    assert_eq!(
        code(&geomedian(&["bounds", "--alpha", "0.8", "--rho", "-1"])),
        2
    );
}

#[test]
fn selftest_passes() {
    let out = geomedian(&["selftest"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).matches("PASS").count(), 4);
}

#[test]
fn bundled_scene_declares_both_targets() {
    let dir = tempfile::tempdir().unwrap();
    let out = geomedian(&[
        "radar",
        "detect",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--svg",
    ]);
    assert_eq!(code(&out), 0);
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["declared"], serde_json::json!([60, 140]));
    for f in [
        "statistic.csv",
        "cells.csv",
        "filtered.csv",
        "statistic.svg",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn clean_scene_declares_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    assert_eq!(
        code(&geomedian(&[
            "radar",
            "simulate",
            "--out-dir",
            sim.to_str().unwrap()
        ])),
        0
    );
    let mut scene: Value =
        serde_json::from_str(&fs::read_to_string(sim.join("scene.json")).unwrap()).unwrap();
    scene["targets"] = serde_json::json!([]);
    let cfg = write(dir.path(), "clean.json", &scene.to_string());
    let out = geomedian(&["radar", "detect", "--config", &cfg]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("declared: []"), "{}", stdout(&out));
}

#[test]
fn simulated_cube_round_trips_through_detect() {
    let dir = tempfile::tempdir().unwrap();
    let (sim, direct, replay) = (
        dir.path().join("sim"),
        dir.path().join("direct"),
        dir.path().join("replay"),
    );
    assert_eq!(
        code(&geomedian(&[
            "radar",
            "simulate",
            "--seed",
            "3",
            "--out-dir",
            sim.to_str().unwrap()
        ])),
        0
    );
    assert_eq!(
        code(&geomedian(&[
            "radar",
            "detect",
            "--seed",
            "3",
            "--out-dir",
            direct.to_str().unwrap()
        ])),
        0
    );
    let cube = sim.join("cube.csv");
    assert_eq!(
        code(&geomedian(&[
            "radar",
            "detect",
            "-i",
            cube.to_str().unwrap(),
            "--out-dir",
            replay.to_str().unwrap()
        ])),
        0
    );
    for f in ["report.json", "filtered.csv"] {
        assert_eq!(
            fs::read(direct.join(f)).unwrap(),
            fs::read(replay.join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(
        code(&geomedian(&[
            "radar",
            "detect",
            "-i",
            cube.to_str().unwrap(),
            "--seed",
            "1"
        ])),
        2
    );
}

#[test]
fn spectra_writes_three_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = geomedian(&[
        "radar",
        "spectra",
        "--n-freq",
        "32",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    for name in ["raw", "median", "barycenter"] {
        let body = fs::read_to_string(dir.path().join(format!("spectra_{name}.csv"))).unwrap();
        assert_eq!(body.lines().count(), 1 + 200, "{name}");
    }
    assert_eq!(code(&geomedian(&["radar", "spectra"])), 2);
}
