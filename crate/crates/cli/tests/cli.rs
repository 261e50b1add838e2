use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn altgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_altgame"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn diagonal_game(diag: [f64; 4]) -> Value {
    let mut entries = vec![json!([0.0, 0.0]); 16];
    for (i, d) in diag.iter().enumerate() {
        entries[5 * i] = json!([d, 0.0]);
    }
    json!({
        "observable": {"dim": 4, "entries": entries},
        "registers": [
            {"id": "X1", "qubits": 1, "owner": "maximizer", "turn": 1},
            {"id": "Y1", "qubits": 1, "owner": "minimizer", "turn": 2}
        ]
    })
}

fn solve(dir: &Path, name: &str, instance: &Value) -> Value {
    let path = dir.join(name);
    std::fs::write(&path, instance.to_string()).unwrap();
    let out = altgame(&["solve", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn gen_is_seeded() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs: Vec<_> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    for (dir, seed) in dirs.iter().zip(["1", "1", "2"]) {
        let out = altgame(&[
            "gen",
            "--type",
            "qgame",
            "--count",
            "3",
            "--seed",
            seed,
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let a = read_dir_sorted(&dirs[0]);
    assert_eq!(a.len(), 3);
    assert_eq!(a[0].0, "qgame-0000.json");
    assert_eq!(a, read_dir_sorted(&dirs[1]));
    assert_ne!(a, read_dir_sorted(&dirs[2]));
    assert_ne!(a[0].1, a[1].1);
}

#[test]
fn generated_instances_solve() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    for args in [
        vec!["--type", "distgame", "--m", "1", "--k", "2"],
        vec![
            "--type",
            "distgame",
            "--m",
            "1",
            "--k",
            "3",
            "--first-mover",
            "minimizer",
        ],
        vec![
            "--type",
            "protocol",
            "--m",
            "1",
            "--i",
            "2",
            "--k",
            "1",
            "--honest",
            "minimizer",
        ],
        vec!["--type", "qgame", "--qubits", "1,1,1"],
    ] {
        let mut full = vec!["gen", "--out", dir];
        full.extend(args);
        assert!(altgame(&full).status.success());
    }
    for (name, _) in read_dir_sorted(tmp.path()) {
        let path = tmp.path().join(&name);
        let out = altgame(&["solve", path.to_str().unwrap(), "--grid-res", "0.125"]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(rep["schema_version"], 1);
        assert_eq!(rep["converged"], true);
        let v = rep["value"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v), "{name}: {v}");
    }
}

#[test]
fn distgame_file_is_valid_json() {
    let tmp = tempfile::tempdir().unwrap();
    let out = altgame(&[
        "gen",
        "--type",
        "distgame",
        "--m",
        "2",
        "--k",
        "2",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("distgame-0000.json")).unwrap()).unwrap();
    assert_eq!(v["m"], 2);
    assert_eq!(v["accept"].as_array().unwrap().len(), 16);
    assert_eq!(v["first_mover"], "maximizer");
}

#[test]
fn identity_observable_has_value_one() {
    let tmp = tempfile::tempdir().unwrap();
    let rep = solve(tmp.path(), "id.json", &diagonal_game([1.0; 4]));
    assert!((rep["value"].as_f64().unwrap() - 1.0).abs() <= 1e-4);
    assert!(rep["gap"].as_f64().unwrap() <= 1e-4);
}

#[test]
fn projector_average_has_value_one_quarter() {
    let tmp = tempfile::tempdir().unwrap();
    let rep = solve(tmp.path(), "proj.json", &diagonal_game([0.5, 0.0, 0.0, 0.5]));
    assert!((rep["value"].as_f64().unwrap() - 0.25).abs() <= 1e-3, "{rep}");
    assert!(rep["lower_cert"].as_f64().unwrap() <= 0.25 + 1e-9);
    assert!(rep["upper_cert"].as_f64().unwrap() >= 0.25 - 1e-9);
}

#[test]
fn matching_distgame_value() {
    let tmp = tempfile::tempdir().unwrap();
    let game = json!({"m": 1, "k": 2, "first_mover": "maximizer", "accept": [1.0, 0.0, 0.0, 1.0]});
    let rep = solve(tmp.path(), "match.json", &game);
    assert!((rep["value"].as_f64().unwrap() - 0.5).abs() <= 1e-12);
    assert_eq!(rep["kind"], "distgame2");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(altgame(&["solve", bad.to_str().unwrap()]).status.code(), Some(4));

    let invalid = tmp.path().join("invalid.json");
    std::fs::write(
        &invalid,
        r#"{"m": 1, "k": 2, "first_mover": "maximizer", "accept": [0.5, 2.0, 0.0, 1.0]}"#,
    )
    .unwrap();
    assert_eq!(altgame(&["solve", invalid.to_str().unwrap()]).status.code(), Some(4));

    let missing = tmp.path().join("missing.json");
    assert_eq!(altgame(&["solve", missing.to_str().unwrap()]).status.code(), Some(3));

    assert_eq!(altgame(&["experiment", "nonsense"]).status.code(), Some(4));
    assert_eq!(altgame(&["experiment", "sion", "--tol", "0.5"]).status.code(), Some(4));
    assert_eq!(altgame(&["--help"]).status.code(), Some(0));
}

#[test]
fn failing_suite_exits_one_with_csv() {
    let out = altgame(&["experiment", "counting-bounds", "--m", "5", "--k", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("id,label,seed,measured,threshold,pass\n"));
    assert!(csv.lines().last().unwrap().ends_with(",false"));
}

#[test]
fn experiment_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str, jobs: &str| {
        let path = tmp.path().join(name);
        let out = altgame(&[
            "experiment",
            "sparsify-k2",
            "--m",
            "1",
            "--count",
            "4",
            "--trials",
            "40",
            "--seed",
            "9",
            "--jobs",
            jobs,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", "1");
    assert_eq!(a, run("b.csv", "3"));
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 42);
}
