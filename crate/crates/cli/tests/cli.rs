use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hyperjoin_core::{datagen, io};
use tempfile::TempDir;

const EDGES: &str = "1,2\n2,3\n1,3\n3,1\n2,1\n";

fn hyperjoin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperjoin"))
        .args(args)
        .env_remove("HC_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A directory holding `e.csv` and a triangle job over it.
fn triangle_job(extra: &str) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("e.csv"), EDGES).unwrap();
    let job = dir.path().join("job.json");
    std::fs::write(
        &job,
        format!(
            r#"{{"query": "Q(X,Y,Z) :- R(X,Y), S(Y,Z), T(X,Z).",
                "relations": {{"R": "e.csv", "S": "e.csv", "T": "e.csv"}},
                "threads": 4 {extra}}}"#
        ),
    )
    .unwrap();
    (dir, job)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_counts_the_example_triangles() {
    let (_dir, job) = triangle_job("");
    let out = hyperjoin(&["run", path(&job)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("count: 3"), "{text}");
    assert!(text.contains("load:") && text.contains("(not in total)"));
    for phase in ["optimize:", "preprocess:", "join:", "total:"] {
        assert!(text.contains(phase), "{phase} missing from {text}");
    }
}

#[test]
fn tuples_go_to_the_output_file() {
    let dir = TempDir::new().unwrap();
    let out_file = dir.path().join("out.csv");
    let extra = format!(r#", "output": {{"file": "{}"}}"#, path(&out_file));
    let (_d, job) = triangle_job(&extra);
    let out = hyperjoin(&["run", path(&job)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        std::fs::read_to_string(&out_file).unwrap(),
        "1,2,3\n2,1,3\n2,3,1\n"
    );
}

#[test]
fn tuples_mode_keeps_stdout_clean() {
    let (_dir, job) = triangle_job(r#", "output": "tuples""#);
    let out = hyperjoin(&["run", path(&job)]);
    assert_eq!(stdout(&out), "1,2,3\n2,1,3\n2,3,1\n");
    assert!(stderr(&out).contains("count: 3"));
}

#[test]
fn no_rewrite_gives_the_same_count() {
    let (_dir, job) = triangle_job("");
    for flags in [
        &["--no-rewrite"][..],
        &["--workers", "3"],
        &["--seed", "17"],
    ] {
        let mut args = vec!["run", path(&job), "--json"];
        args.extend_from_slice(flags);
        let out = hyperjoin(&args);
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["count"], 3, "{flags:?}");
    }
}

#[test]
fn instrument_reports_steps() {
    let (_dir, job) = triangle_job("");
    let out = hyperjoin(&["run", path(&job), "--json", "--instrument"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["steps"].as_u64().unwrap() > 0);
    assert!(v["skew_ratio"].as_f64().unwrap() >= 1.0);
}

#[test]
fn explain_echoes_overrides() {
    let (_dir, job) = triangle_job("");
    let out = hyperjoin(&[
        "explain",
        path(&job),
        "--order",
        "Z,X,Y",
        "--shares",
        "X=2,Z=4",
        "--json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["order"], serde_json::json!(["Z", "X", "Y"]));
    assert_eq!(v["threads"], 8);
    assert_eq!(
        v["shares"],
        serde_json::json!([["Z", 4], ["X", 2], ["Y", 1]])
    );
}

#[test]
fn explain_counts_share_candidates() {
    let (_dir, job) = triangle_job("");
    let out = hyperjoin(&["explain", path(&job), "--threads", "1024"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("66 share candidates enumerated"));
}

#[test]
fn explain_spreads_shares_on_a_skewed_graph() {
    let dir = TempDir::new().unwrap();
    let g = datagen::zipf_graph(20_000, 40_000, 1.2, 1);
    io::write_binary(&g, dir.path().join("g.bin")).unwrap();
    let job = dir.path().join("job.json");
    std::fs::write(
        &job,
        r#"{"query": "Q(X,Y,Z) :- R(X,Y), S(Y,Z), T(X,Z).",
            "relations": {"R": "g.bin", "S": "g.bin", "T": "g.bin"},
            "threads": 1024, "symmetrize": true}"#,
    )
    .unwrap();
    let out = hyperjoin(&["explain", path(&job), "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let shares: Vec<u64> = v["shares"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p[1].as_u64().unwrap())
        .collect();
    assert!(!shares.contains(&1024), "{shares:?}");
    assert_eq!(v["search"]["fallback"], false);
}

#[test]
fn bench_reports_the_mean_of_repeats() {
    let (dir, job) = triangle_job("");
    let csv = dir.path().join("tasks.csv");
    let out = hyperjoin(&[
        "bench",
        path(&job),
        "--repeats",
        "3",
        "--sweep",
        "1,2",
        "--csv",
        path(&csv),
        "--json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["repeats"], 3);
    assert_eq!(v["tasks"], 4);
    assert_eq!(v["count"], 3);
    assert_eq!(v["sweep"].as_array().unwrap().len(), 2);
    let lines: Vec<String> = std::fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect();
    assert_eq!(lines[0], "task_id,steps,emitted,wall_nanos");
    assert_eq!(lines.len(), 5);
    let steps: Vec<u64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(steps.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(
        steps.iter().sum::<u64>(),
        v["cumulative_steps"].as_u64().unwrap()
    );
}

#[test]
fn oracle_agrees() {
    let (_dir, job) = triangle_job("");
    let out = hyperjoin(&["oracle", path(&job)]);
    assert_eq!(stdout(&out).trim(), "count: 3");
}

#[test]
fn convert_roundtrips_and_symmetrizes() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("e.csv");
    std::fs::write(&csv, EDGES).unwrap();
    let bin = dir.path().join("e.bin");
    let out = hyperjoin(&["convert", path(&csv), path(&bin)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let loaded = io::load_binary(&bin).unwrap();
    assert_eq!(loaded.data(), io::load_csv(&csv, 2, false).unwrap().data());

    let sym = dir.path().join("s.bin");
    hyperjoin(&["convert", path(&csv), path(&sym), "--symmetrize"]);
    assert_eq!(io::load_binary(&sym).unwrap().len(), 6);
}

#[test]
fn exit_codes() {
    let (_dir, job) = triangle_job("");
    let bad_threads = hyperjoin(&["run", path(&job), "--threads", "6"]);
    assert_eq!(bad_threads.status.code(), Some(1));
    assert!(stderr(&bad_threads).contains("power of two"));

    let missing = hyperjoin(&["run", "/definitely/not/here.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("/definitely/not/here.json"));

    let usage = hyperjoin(&["frobnicate"]);
    assert_eq!(usage.status.code(), Some(1));

    let zero_workers = Command::new(env!("CARGO_BIN_EXE_hyperjoin"))
        .args(["run", path(&job)])
        .env("HC_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(zero_workers.status.code(), Some(1));
    assert!(stderr(&zero_workers).contains("workers"));
}
