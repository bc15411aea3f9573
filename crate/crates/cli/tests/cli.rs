use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn camnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_camnet"))
        .args(args)
        .env_remove("CAMNET_OUT_DIR")
        .output()
        .unwrap()
}

fn files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_happy_path_writes_two_files() {
    let out = tempfile::tempdir().unwrap();
    let hall = scenario("hall.scn");
    let o = camnet(&[
        "run", "--scenario", hall.to_str().unwrap(), "--controller", "stat", "--targets", "5", "--steps", "100",
        "--seed", "7", "--out", out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(files(out.path()), vec!["stat-m5-seed7.csv", "stat-m5-seed7.json"]);
    let doc = json(out.path().join("stat-m5-seed7.json"));
    assert_eq!(doc["seed"], 7);
    assert_eq!(doc["tau"], 100);
    assert_eq!(doc["scenario_hash"].as_str().unwrap().len(), 64);
    assert!(doc["version"].as_str().unwrap().starts_with('v'));
    let table = fs::read_to_string(out.path().join("stat-m5-seed7.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 100 + 1);
}

#[test]
fn unknown_controller_exits_2_with_names() {
    let o = camnet(&["run", "--scenario", scenario("hall.scn").to_str().unwrap(), "--controller", "greedy"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("pomdp, mp, msp, sys, stat"), "{err}");
}

#[test]
fn config_errors_exit_2() {
    let o = camnet(&["run", "--scenario", "/nonexistent/x.scn"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scn");
    fs::write(
        &bad,
        "[map]\nwidth = 3\nheight = 1\nblocked = [[2, 0]]\n\n[[cameras]]\nid = 4\nstates = [{ fov = [[2, 0]] }]\n",
    )
    .unwrap();
    let o = camnet(&["run", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("camera 4") && err.contains("(2, 0)"), "{err}");

    let o = camnet(&["run", "--scenario", scenario("hall.scn").to_str().unwrap(), "--seeds", "9..2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_3() {
    // more targets than free cells is only detected when spawning
    let out = tempfile::tempdir().unwrap();
    let o = camnet(&[
        "run", "--scenario", scenario("hall.scn").to_str().unwrap(), "--targets", "500", "--steps", "2",
        "--out", out.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn seed_range_emits_summaries_and_aggregate() {
    let out = tempfile::tempdir().unwrap();
    let o = camnet(&[
        "run", "--scenario", scenario("hall.scn").to_str().unwrap(), "--controller", "sys", "--targets", "3",
        "--steps", "20", "--seeds", "1..20", "--jobs", "3", "--out", out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let names = files(out.path());
    let summaries: Vec<&String> = names.iter().filter(|n| n.ends_with(".json") && n.contains("seed")).collect();
    assert_eq!(summaries.len(), 20);
    let values: Vec<f64> = summaries
        .iter()
        .map(|n| json(out.path().join(n))["percent_obs"].as_f64().unwrap())
        .collect();
    let agg = json(out.path().join("sys-m3-aggregate.json"));
    let mean = values.iter().sum::<f64>() / 20.0;
    assert!((agg["percent_obs"]["mean"].as_f64().unwrap() - mean).abs() < 1e-9);
    assert_eq!(agg["percent_obs"]["count"], 20);
    assert_eq!(agg["seeds"].as_array().unwrap().len(), 20);
}

#[test]
fn out_dir_from_environment() {
    let out = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_camnet"))
        .args(["run", "--scenario", scenario("corridor.scn").to_str().unwrap(), "--steps", "5", "--controller", "mp"])
        .env("CAMNET_OUT_DIR", out.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(files(out.path()), vec!["mp-m5-seed1.csv", "mp-m5-seed1.json"]);
}

#[test]
fn reproducible_outputs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = camnet(&[
            "run", "--scenario", scenario("junction.scn").to_str().unwrap(), "--targets", "4", "--steps", "15",
            "--seeds", "1,2", "--emit-beliefs", "--reproducible", "--out", dir.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let names = files(a.path());
    assert_eq!(names, files(b.path()));
    assert!(names.contains(&"pomdp-m4-seed1-beliefs.json".to_string()));
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n}");
    }
}

fn truth_columns(table: &str) -> Vec<String> {
    table
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            cols[3..].iter().step_by(2).copied().collect::<Vec<_>>().join(",")
        })
        .collect()
}

#[test]
fn compare_shape_and_seed_matching() {
    let out = tempfile::tempdir().unwrap();
    let o = camnet(&[
        "compare", "--scenario", scenario("junction.scn").to_str().unwrap(), "--targets", "2,4", "--seeds", "1..3",
        "--steps", "15", "--emit-runs", "--out", out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.path().join("compare.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    for m in ["2", "4"] {
        let controllers: Vec<&str> = rows
            .iter()
            .filter(|r| r.split(',').nth(1) == Some(m))
            .map(|r| r.split(',').next().unwrap())
            .collect();
        assert_eq!(controllers, vec!["pomdp", "mp", "msp", "sys", "stat"]);
    }
    let doc = json(out.path().join("compare.json"));
    assert_eq!(doc["seeds"], serde_json::json!([1, 2, 3]));
    assert_eq!(doc["scenario_hash"].as_str().unwrap().len(), 64);

    let runs = out.path().join("runs");
    for seed in 1..=3 {
        let truths: Vec<Vec<String>> = ["pomdp", "mp", "msp", "sys", "stat"]
            .iter()
            .map(|c| truth_columns(&fs::read_to_string(runs.join(format!("{c}-m4-seed{seed}.csv"))).unwrap()))
            .collect();
        assert!(truths.windows(2).all(|p| p[0] == p[1]), "seed {seed}");
    }
}

fn bench_slope(out: &Path, stub: bool) -> (Value, f64) {
    let mut args = vec![
        "bench".to_string(),
        "--scenario".into(),
        scenario("junction.scn").to_str().unwrap().into(),
        "--repeats".into(),
        "5".into(),
        "--out".into(),
        out.to_str().unwrap().into(),
    ];
    if stub {
        args.push("--stub".into());
    }
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let o = camnet(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(out.join("bench.json"));
    let slope = doc["report"]["fit"]["slope"].as_f64().unwrap();
    (doc, slope)
}

#[test]
fn bench_rows_and_stub_control() {
    let out = tempfile::tempdir().unwrap();
    let (doc, planner_slope) = bench_slope(out.path(), false);
    let rows = doc["report"]["rows"].as_array().unwrap();
    let ms: Vec<u64> = rows.iter().map(|r| r["m"].as_u64().unwrap()).collect();
    assert_eq!(ms, vec![5, 10, 20, 40]);
    assert_eq!(doc["mode"], "planner");
    assert!(doc["report"]["fit"]["r_squared"].as_f64().unwrap() >= 0.95);
    let (stub, stub_slope) = bench_slope(out.path(), true);
    assert_eq!(stub["mode"], "stub");
    assert!(stub_slope.abs() < 0.01 * planner_slope, "stub slope {stub_slope} vs planner {planner_slope}");
}
