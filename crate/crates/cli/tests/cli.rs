use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use symporder::prequantization::{rotation_curve_distance, LeafFunction};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symporder"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn maslov_of_stored_rotation_loop() {
    let doc = run_ok(&["maslov", "--path", s(&data("rotation_loop.json"))]);
    let v = doc["result"]["value"].as_f64().unwrap();
    assert!((v - 2.0 * PI).abs() < 1e-8, "{v}");
    assert!((doc["result"]["via_trace"].as_f64().unwrap() - 2.0 * PI).abs() < 1e-4);
    assert!(doc["convention"].as_str().unwrap().starts_with("radians"));
    assert_eq!(doc["inputs"]["samples"], 65);
}

#[test]
fn rot_distance_of_cosine_is_half_log_three() {
    let doc = run_ok(&[
        "rot-distance",
        "--s",
        "2",
        "--func",
        s(&data("cos_grid.json")),
    ]);
    let d = doc["result"]["distance"].as_f64().unwrap();
    assert!((d - 0.5 * 3f64.ln()).abs() < 1e-12, "{d}");
}

#[test]
fn numbers_round_trip_exactly() {
    let doc = run_ok(&[
        "rot-distance",
        "--s",
        "2.5",
        "--func",
        s(&data("cos_grid.json")),
    ]);
    let text = fs::read_to_string(data("cos_grid.json")).unwrap();
    let raw: Value = serde_json::from_str(&text).unwrap();
    let values: Vec<f64> = raw["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let f = LeafFunction::new(vec![values.len()], values).unwrap();
    let expected = rotation_curve_distance(2.5, &f).unwrap();
    assert_eq!(
        doc["result"]["distance"].as_f64().unwrap(),
        expected.distance
    );
    assert_eq!(doc["result"]["t_star"].as_f64().unwrap(), expected.t_star);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["defect-sample", "--pairs", "4", "--seed", "11"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = run(&["defect-sample", "--pairs", "4", "--seed", "12"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn out_flag_writes_the_document() {
    let out = scratch("rot.json");
    let printed = run(&["maslov", "--path", s(&data("rotation_loop.json"))]);
    let written = run(&[
        "maslov",
        "--path",
        s(&data("rotation_loop.json")),
        "--out",
        s(&out),
    ]);
    assert!(written.status.success());
    assert!(written.stdout.is_empty());
    assert_eq!(fs::read(&out).unwrap(), printed.stdout);
}

#[test]
fn malformed_file_gives_line_anchored_exit_one() {
    let bad = scratch("bad_path.json");
    fs::write(&bad, "{\n  \"dim\": 2,\n  \"times\": [0, 0.5 1]\n}\n").unwrap();
    let out = run(&["maslov", "--path", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(&format!("{}:3:", bad.display())), "{err}");
}

#[test]
fn missing_file_and_bad_shapes_exit_one() {
    let out = run(&["cone", "--path", "/nonexistent/path.json"]);
    assert_eq!(out.status.code(), Some(1));

    let short = scratch("short_matrix.json");
    fs::write(
        &short,
        r#"{"dim": 2, "times": [0, 0.5, 1], "matrices": [[1,0,0,1],[1,0,0],[1,0,0,1]]}"#,
    )
    .unwrap();
    let out = run(&["maslov", "--path", s(&short)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("matrices[1]"));

    let non_symplectic = scratch("non_symplectic.json");
    fs::write(
        &non_symplectic,
        r#"{"dim": 2, "times": [0, 0.5, 1], "matrices": [[1,0,0,1],[2,0,0,2],[1,0,0,1]]}"#,
    )
    .unwrap();
    assert_eq!(
        run(&["maslov", "--path", s(&non_symplectic)]).status.code(),
        Some(1)
    );
}

#[test]
fn domain_errors_exit_one() {
    // s below the negative norm of cos
    let out = run(&[
        "rot-distance",
        "--s",
        "0.5",
        "--func",
        s(&data("cos_grid.json")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&[
        "maslov",
        "--path",
        s(&data("rotation_loop.json")),
        "--tol",
        "-1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn synthesized_path_reads_back() {
    let target = scratch("target.json");
    fs::write(&target, r#"{"dim": 2, "values": [4.0, 0.0, 0.0, 0.25]}"#).unwrap();
    let doc = run_ok(&["synth-positive", "--matrix", s(&target), "--grid", "128"]);
    let r = &doc["result"];
    assert!(r["endpoint_error"].as_f64().unwrap() < 1e-8);
    assert!(r["min_hamiltonian_eigenvalue"].as_f64().unwrap() > 1e-6);

    let path = scratch("synth_path.json");
    fs::write(&path, serde_json::to_string(&r["path"]).unwrap()).unwrap();
    let m = run_ok(&["maslov", "--path", s(&path)]);
    let mu = m["result"]["value"].as_f64().unwrap();
    assert!((mu - r["maslov"].as_f64().unwrap()).abs() < 1e-9);
    assert!(mu <= 4.0 * PI + 1e-6);
}

#[test]
fn gamma_of_rotation_loops_matches_closed_form() {
    let one = data("rotation_loop.json");
    let three = scratch("three_turns.json");
    let samples = 193;
    let times: Vec<f64> = (0..samples)
        .map(|k| k as f64 / (samples - 1) as f64)
        .collect();
    let mats: Vec<Vec<f64>> = times
        .iter()
        .map(|t| {
            let (sn, c) = (6.0 * PI * t).sin_cos();
            vec![c, -sn, sn, c]
        })
        .collect();
    fs::write(
        &three,
        serde_json::json!({ "dim": 2, "times": times, "matrices": mats }).to_string(),
    )
    .unwrap();
    let doc = run_ok(&["gamma", "--x", s(&one), "--y", s(&three), "--nmax", "8"]);
    assert_eq!(
        doc["result"]["closed_form"]["estimate"].as_f64().unwrap(),
        3.0
    );
    for entry in doc["result"]["sequence"].as_array().unwrap() {
        let n = entry["n"].as_i64().unwrap();
        let g = entry["gamma_n"].as_i64().unwrap();
        assert!((g - 3 * n).abs() <= 1, "n {n} gamma_n {g}");
    }
    let k = run_ok(&["kdist", "--x", s(&one), "--y", s(&three)]);
    let d = k["result"]["distance"]["estimate"].as_f64().unwrap();
    assert!((d - 3f64.ln()).abs() < 1e-9);

    let csv = run(&[
        "gamma",
        "--x",
        s(&one),
        "--y",
        s(&three),
        "--nmax",
        "2",
        "--csv",
    ]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("n,gamma_n,ratio\n"));
}

#[test]
fn csv_is_rejected_where_unsupported() {
    let out = run(&["cone", "--path", s(&data("rotation_loop.json")), "--csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn quant_commands_agree() {
    let cos = data("cos_grid.json");
    let g = run_ok(&[
        "quant-gamma",
        "--f",
        s(&cos),
        "--s",
        "2",
        "--g",
        s(&cos),
        "--t",
        "3",
        "--nmax",
        "1000",
    ]);
    let gamma = g["result"]["gamma"].as_f64().unwrap();
    let iv = &g["result"]["bruteforce_interval"];
    assert!(
        iv["lo"].as_f64().unwrap() <= gamma + 1e-12 && gamma <= iv["hi"].as_f64().unwrap() + 1e-12
    );

    let k = run_ok(&[
        "quant-k",
        "--f",
        s(&cos),
        "--s",
        "2",
        "--g",
        s(&cos),
        "--t",
        "3",
    ]);
    let r = &k["result"];
    let expected = r["log_gamma_ab"]
        .as_f64()
        .unwrap()
        .max(r["log_gamma_ba"].as_f64().unwrap());
    assert!((r["k"].as_f64().unwrap() - expected).abs() < 1e-12);

    let e = run_ok(&["embed", "--func", s(&cos)]);
    assert!(e["result"]["func"]["normalized"].as_bool().unwrap());
}

#[test]
fn cw_of_normalized_family_vanishes() {
    let fam = scratch("family.json");
    let n = 32;
    let slices: Vec<Vec<f64>> = (0..4)
        .map(|j| {
            (0..n)
                .map(|k| (j as f64 + 1.0) * (2.0 * PI * k as f64 / n as f64).sin())
                .collect()
        })
        .collect();
    fs::write(
        &fam,
        serde_json::json!({ "times": [0.0, 0.25, 0.7, 1.0], "grid_shape": [n], "slices": slices })
            .to_string(),
    )
    .unwrap();
    let doc = run_ok(&["cw", "--family", s(&fam)]);
    assert!(doc["result"]["cw"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn verify_quant_suite_passes() {
    let doc = run_ok(&["verify", "--suite", "quant", "--seed", "7"]);
    let ids: Vec<u64> = doc["result"]["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_u64().unwrap())
        .collect();
    assert_eq!(ids, vec![8, 9, 10, 11]);
    assert_eq!(doc["result"]["passed"], true);
}

#[test]
fn verify_linear_suite_passes() {
    let doc = run_ok(&["verify", "--suite", "linear", "--seed", "7"]);
    let criteria = doc["result"]["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 7);
    assert!(criteria.iter().all(|c| c["passed"] == true));
}
