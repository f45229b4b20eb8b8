use std::f64::consts::TAU;
use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn exitmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exitmap")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_json(o: &Output) -> Value {
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    serde_json::from_str(err.trim()).unwrap_or_else(|e| panic!("stderr is not one JSON object ({e}): {err}"))
}

/// `# name` separated CSV blocks from stdout.
fn tables(text: &str) -> Vec<(String, Vec<Vec<String>>)> {
    let mut out: Vec<(String, Vec<Vec<String>>)> = Vec::new();
    for line in text.lines() {
        if let Some(name) = line.strip_prefix("# ") {
            out.push((name.to_string(), Vec::new()));
        } else if !line.is_empty() {
            if out.is_empty() {
                out.push((String::new(), Vec::new()));
            }
            out.last_mut().unwrap().1.push(line.split(',').map(str::to_string).collect());
        }
    }
    out
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

#[test]
fn exmap_table_matches_the_hyperbolic_exit() {
    let o = exitmap(&["exitmap", "--builtin", "exmap"]);
    assert!(o.status.success());
    let t = tables(&stdout(&o));
    assert_eq!(t[0].0, "first_out");
    let rows = &t[0].1;
    assert_eq!(rows[0], ["s", "status", "T", "exit_s", "type_label", "horizon", "graze_count"]);
    assert_eq!(rows.len(), 65);
    for r in &rows[1..] {
        let s: f64 = r[0].parse().unwrap();
        let (x, y) = ((TAU * s).cos(), (TAU * s).sin());
        // orbits of (x, -y) keep x y and the quadrant
        if x.abs() < 1e-12 {
            assert_eq!(r[1], "undefined", "{r:?}");
            continue;
        }
        let exit = (y.abs().copysign(x), x.abs().copysign(y));
        let expected = if x.abs() >= y.abs() - 1e-12 { s } else { (exit.1.atan2(exit.0) / TAU).rem_euclid(1.0) };
        let got: f64 = r[3].parse().unwrap();
        assert!(circle_dist(got, expected) < 1e-5, "s = {s}: {got} vs {expected}");
    }
}

#[test]
fn sink_first_out_is_empty_and_first_in_fixes_everything() {
    let o = exitmap(&["exitmap", "--builtin", "sink", "--samples", "16"]);
    assert!(o.status.success());
    let t = tables(&stdout(&o));
    assert!(t[0].1[1..].iter().all(|r| r[1] == "undefined"));
    assert!(t[1].1[1..].iter().all(|r| r[1] == "defined" && r[2] == "0" && r[0] == r[3]));
}

#[test]
fn missing_region_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    fs::write(&path, r#"{"name": "x", "flow": {"kind": "sink"}}"#).unwrap();
    let o = exitmap(&["exitmap", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_json(&o);
    assert_eq!(e["error"], "schema");
    assert!(e["message"].as_str().unwrap().contains("region"));
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    fs::write(
        &path,
        r#"{"name": "x", "flow": {"kind": "sink"}, "region": {"kind": "disc", "radius": 1}, "colour": 1}"#,
    )
    .unwrap();
    for args in [
        vec!["exitmap", "--scenario", path.to_str().unwrap()],
        vec!["exitmap", "--scenario", "/nonexistent/s.json"],
        vec!["exitmap", "--builtin", "nope"],
        vec!["exitmap"],
        vec!["exitmap", "--builtin", "exmap", "--horizon", "-1"],
        vec!["frobnicate"],
    ] {
        let o = exitmap(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(error_json(&o)["exit_code"], 2);
    }
}

#[test]
fn affine_classification_splits_at_minus_one() {
    let o = exitmap(&["classify", "--builtin", "affine(1)"]);
    assert!(o.status.success());
    let t = tables(&stdout(&o));
    for r in &t[0].1[1..] {
        let x: f64 = r[1].parse().unwrap();
        // type B exactly when x >= -lambda p / mu = -1
        assert_eq!(r[3] == "B", x >= -1.0, "{r:?}");
    }
}

#[test]
fn typeseq_of_exmap_has_nine_runs() {
    let o = exitmap(&["typeseq", "--builtin", "exmap", "--samples", "256"]);
    assert!(o.status.success());
    let t = tables(&stdout(&o));
    let labels: Vec<&str> = t[0].1[1..].iter().map(|r| r[1].as_str()).collect();
    assert_eq!(labels, ["B", "A-2", "C", "A-2", "B", "A-2", "C", "A-2", "B"]);
}

#[test]
fn check_matrix_flags_the_negative_control() {
    let o = exitmap(&["check", "--builtin", "control_monotonicity"]);
    assert_eq!(o.status.code(), Some(0), "a control that fails is the expected outcome");
    let text = stdout(&o);
    let row = text.lines().find(|l| l.starts_with("control_monotonicity ")).unwrap();
    let cells: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cells[3], "fail", "{row}");
    assert!(text.contains("violation"));
    assert!(text.contains("overall: ok"));

    let o = exitmap(&["check", "--builtin", "exmap", "--samples", "32", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["ok"], true);
}

#[test]
fn realize_neg_reports_a_small_error() {
    let o = exitmap(&["realize", "--map", "neg", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["max_error"].as_f64().unwrap() < 1e-6, "{}", v["max_error"]);
    assert_eq!(v["samples"].as_array().unwrap().len(), 32);
    assert_eq!(v["scenario"]["flow"]["kind"], "realization");
}

#[test]
fn realize_rejects_an_invalid_map() {
    let o = exitmap(&["realize", "--map", r#"{"kind": "tabulated", "points": [[-1, 1], [1, 2]]}"#]);
    assert_eq!(o.status.code(), Some(1));
    let e = error_json(&o);
    assert_eq!(e["error"], "hypothesis");
    let probes = e["details"]["failed_probes"].as_array().unwrap();
    assert!(probes.iter().any(|p| p.as_str().unwrap().starts_with("P(1) = 2")), "{probes:?}");
}

#[test]
fn bouncing_ball_is_zeno_near_four() {
    let o = exitmap(&["hybrid", "--builtin", "bouncing_ball", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let z = &v["hybrid"]["trajectory"]["zeno"];
    assert_eq!(z["verdict"], "zeno");
    assert!((z["accumulation"].as_f64().unwrap() - 4.0).abs() < 1e-3, "{z}");
}

#[test]
fn zeno_shear_does_not_induce_a_system() {
    let o = exitmap(&["hybrid", "--builtin", "zeno_shear"]);
    assert_eq!(o.status.code(), Some(1));
    let e = error_json(&o);
    assert_eq!(e["error"], "induce");
    assert!(e["details"]["unresolved"].as_array().unwrap().iter().any(|x| x.as_f64().unwrap().abs() < 0.1));
}

#[test]
fn output_directory_gets_named_files_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = exitmap(&["exitmap", "--builtin", "affine(-1)", "--out", d, "--svg"]);
    assert!(o.status.success());
    for f in ["affine_-1_first_out.csv", "affine_-1_first_in.csv", "affine_-1_exitmap.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let svg = fs::read_to_string(dir.path().join("affine_-1_exitmap.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    let o = exitmap(&["hybrid", "--builtin", "bouncing_ball", "--out", d]);
    assert!(o.status.success());
    let traj = fs::read_to_string(dir.path().join("bouncing_ball_0.5_trajectory.csv")).unwrap();
    assert!(traj.starts_with("n,t,x,y,mode\n"));
    assert!(dir.path().join("bouncing_ball_0.5_jumps.csv").exists());
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let run = |dir: &str, threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_exitmap"))
            .args(["exitmap", "--builtin", "exmap_shear", "--samples", "48", "--out", dir])
            .env("EXITMAP_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
    };
    run(a.path().to_str().unwrap(), "1");
    run(b.path().to_str().unwrap(), "4");
    for f in ["exmap_shear_first_out.csv", "exmap_shear_first_in.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_exitmap")).args(["list"]).env("EXITMAP_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shown_scenarios_load_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fold.json");
    let o = exitmap(&["show", "--builtin", "fold_junction"]);
    fs::write(&path, &o.stdout).unwrap();
    let o = exitmap(&["typeseq", "--scenario", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn tolerance_file_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let tol = dir.path().join("tol.json");
    fs::write(&tol, r#"{"horizn": 3}"#).unwrap();
    let o = exitmap(&["exitmap", "--builtin", "sink", "--tol-file", tol.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    fs::write(&tol, r#"{"horizon": 3}"#).unwrap();
    let s = dir.path().join("s.json");
    fs::write(&s, r#"{"name": "x", "flow": {"kind": "sink"}, "region": {"kind": "disc", "radius": 1}, "analysis": {"samples": 8}}"#)
        .unwrap();
    let o = exitmap(&["exitmap", "--scenario", s.to_str().unwrap(), "--tol-file", tol.to_str().unwrap()]);
    assert!(o.status.success());
    let t = tables(&stdout(&o));
    assert!(t[0].1[1..].iter().all(|r| r[5] == "3"));
}

#[test]
fn schema_lists_the_sections() {
    let o = exitmap(&["schema"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["properties"]["hybrid"].is_object());
}

#[test]
fn shipped_scenarios_match_the_schema_and_run() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let published: Value = serde_json::from_str(&fs::read_to_string(dir.join("schema.json")).unwrap()).unwrap();
    let current: Value = serde_json::from_str(&stdout(&exitmap(&["schema"]))).unwrap();
    assert_eq!(published, current, "scenarios/schema.json is stale; regenerate with `exitmap schema`");
    let mut n = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.file_name().unwrap() == "schema.json" {
            continue;
        }
        let o = exitmap(&["show", "--scenario", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&o.stderr));
        n += 1;
    }
    assert!(n >= 5);
    let o = exitmap(&["check", "--scenario", dir.join("van_der_pol_disc.json").to_str().unwrap()]);
    assert!(o.status.success() && stdout(&o).contains("overall: ok"));
}
