use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn towsync(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_towsync"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn towsync")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn zero_steps_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    ok(&towsync(&["run", "--steps", "0", "--out", "r"], dir.path()));
    let trace = fs::read_to_string(dir.path().join("r/trace.csv")).unwrap();
    assert_eq!(
        trace,
        "t,node,phase,channel,collided,success,reward,gated\n"
    );
    let summary = json(&dir.path().join("r/summary.json"));
    assert_eq!(summary["steps"], 0);
    assert!(summary["throughput"].is_null());
    let manifest = json(&dir.path().join("r/manifest.json"));
    assert_eq!(manifest["seeds"], serde_json::json!([0]));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        ok(&towsync(
            &["run", "--seed", "7", "--steps", "500", "--out", out],
            dir.path(),
        ));
    }
    for f in ["trace.csv", "summary.json", "manifest.json"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    ok(&towsync(
        &["run", "--seed", "8", "--steps", "500", "--out", "c"],
        dir.path(),
    ));
    assert_ne!(
        fs::read(dir.path().join("a/trace.csv")).unwrap(),
        fs::read(dir.path().join("c/trace.csv")).unwrap()
    );
}

#[test]
fn default_run_forms_groups_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    ok(&towsync(&["run", "--seed", "0", "--out", "r"], dir.path()));
    let trace = fs::read_to_string(dir.path().join("r/trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 10 * 10_000);

    let summary = json(&dir.path().join("r/summary.json"));
    let groups = summary["final_groups"]["groups"].as_array().unwrap().len();
    assert!(groups >= 2, "{groups}");
    assert_eq!(summary["conclusions"]["required_groups"], 2);
    let mean = summary["throughput"]["mean_success_per_step"]
        .as_f64()
        .unwrap();
    assert!(mean <= summary["throughput"]["capacity_bound"].as_f64().unwrap());

    ok(&towsync(&["analyze", "r/trace.csv"], dir.path()));
    assert_eq!(
        fs::read(dir.path().join("r/summary.json")).unwrap(),
        fs::read(dir.path().join("r/analysis/summary.json")).unwrap()
    );

    // stripes: with Ω = π/4 every ungated step advances by exactly 45°
    let phases = fs::read_to_string(dir.path().join("r/analysis/phases.csv")).unwrap();
    let mut lines = phases.lines();
    assert_eq!(lines.next(), Some("t,node,phase_deg"));
    let rows: Vec<(u64, usize, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(rows.len(), 100_000);
    let node0: Vec<f64> = rows.iter().filter(|r| r.1 == 0).map(|r| r.2).collect();
    let gated: Vec<bool> = trace
        .lines()
        .skip(1)
        .filter(|l| l.split(',').nth(1) == Some("0"))
        .map(|l| l.ends_with(",1"))
        .collect();
    for t in 0..node0.len() - 1 {
        if !gated[t] {
            let step = (node0[t + 1] - node0[t]).rem_euclid(360.0);
            assert!((step - 45.0).abs() < 1e-9, "t={t}: {step}");
        }
    }
}

#[test]
fn paper_default_locks_a_pair_across_groups() {
    let dir = tempfile::tempdir().unwrap();
    ok(&towsync(&["run", "--seed", "0", "--out", "r"], dir.path()));
    ok(&towsync(
        &["analyze", "r/trace.csv", "--out", "a"],
        dir.path(),
    ));
    let s = json(&dir.path().join("a/summary.json"));
    let drift = s["lock"]["intergroup_pair_drift"].as_f64().unwrap();
    assert!(drift < 0.017_453_3, "{drift}");
    let pair = s["lock"]["intergroup_pair"].as_array().unwrap();
    assert_ne!(pair[0], pair[1]);
}

#[test]
fn analyze_hand_built_rigid_trace() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("t,node,phase,channel,collided,success,reward,gated\n");
    for t in 0..40u64 {
        for (node, start) in [(0usize, 1.0f64), (1, 4.0)] {
            let phase = (start + t as f64 * PI / 4.0).rem_euclid(TAU);
            text.push_str(&format!("{t},{node},{phase},{node},0,1,1,0\n"));
        }
    }
    fs::write(dir.path().join("trace.csv"), text).unwrap();
    ok(&towsync(
        &["analyze", "trace.csv", "--set", "M=2", "--out", "a"],
        dir.path(),
    ));
    let s = json(&dir.path().join("a/summary.json"));
    assert!(s["lock"]["max_pair_drift"].as_f64().unwrap() < 1e-9);
    assert_eq!(s["throughput"]["mean_success_per_step"], 2.0);
}

#[test]
fn analyze_rejects_schema_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("trace.csv"),
        "t,node,angle,channel,collided,success,reward,gated\n",
    )
    .unwrap();
    let out = towsync(&["analyze", "trace.csv"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("phase") && err.contains("angle"), "{err}");
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.json"), "{}").unwrap();
    ok(&towsync(
        &[
            "run",
            "--config",
            "empty.json",
            "--steps",
            "1",
            "--out",
            "e",
        ],
        dir.path(),
    ));
    let c = &json(&dir.path().join("e/summary.json"))["config"];
    assert_eq!(c["node_count"], 10);
    assert_eq!(c["channel_count"], 5);
    assert_eq!(c["memory_alpha"], 0.95);
    assert_eq!(c["noise_amplitude"], 0.1);
    assert_eq!(c["coupling"], 0.5);
    assert_eq!(
        c["channel_probs"],
        serde_json::json!([0.1, 0.2, 0.3, 0.4, 0.5])
    );

    fs::write(dir.path().join("k.json"), r#"{"coupling": 0.2, "M": 12}"#).unwrap();
    ok(&towsync(
        &[
            "run", "--config", "k.json", "--set", "M=40", "--set", "N=5", "--steps", "1", "--out",
            "o",
        ],
        dir.path(),
    ));
    let c = &json(&dir.path().join("o/summary.json"))["config"];
    assert_eq!(c["node_count"], 40);
    assert_eq!(c["coupling"], 0.2);

    let out = towsync(
        &[
            "run",
            "--set",
            "channel_probs=[0.5,0.5]",
            "--set",
            "N=5",
            "--out",
            "x",
        ],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("channel_probs"));
}

#[test]
fn one_point_sweep_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    ok(&towsync(
        &["run", "--seed", "5", "--steps", "800", "--out", "r"],
        dir.path(),
    ));
    ok(&towsync(
        &["sweep", "--seed", "5", "--steps", "800", "--out", "s"],
        dir.path(),
    ));
    assert_eq!(
        fs::read(dir.path().join("r/summary.json")).unwrap(),
        fs::read(dir.path().join("s/run-0000/summary.json")).unwrap()
    );
    assert_eq!(
        fs::read(dir.path().join("r/trace.csv")).unwrap(),
        fs::read(dir.path().join("s/run-0000/trace.csv")).unwrap()
    );
    let csv = fs::read_to_string(dir.path().join("s/sweep.csv")).unwrap();
    let mean =
        json(&dir.path().join("r/summary.json"))["throughput"]["mean_success_per_step"].to_string();
    assert!(
        csv.lines().nth(1).unwrap().contains(&format!(",{mean},")),
        "{csv}"
    );
}

#[test]
fn zero_coupling_keeps_phase_differences() {
    let dir = tempfile::tempdir().unwrap();
    ok(&towsync(
        &[
            "sweep",
            "--set",
            "K=0,0.5",
            "--seeds",
            "2",
            "--workers",
            "3",
            "--steps",
            "2000",
            "--out",
            "s",
        ],
        dir.path(),
    ));
    let csv = fs::read_to_string(dir.path().join("s/sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("run,seed,K,mean_success_per_step,group_count,min_gap,lock_drift,status")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        assert_eq!(row[7], "ok");
        if row[2] == "0" {
            // no coupling: rigid rotation, pairwise differences never move
            assert!(row[6].parse::<f64>().unwrap() < 1e-9, "{row:?}");
        }
    }
    assert!(dir.path().join("s/run-0003/trace.csv").exists());
}

#[test]
fn sweep_records_partial_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = towsync(
        &["sweep", "--set", "N=5,4", "--steps", "10", "--out", "s"],
        dir.path(),
    );
    assert!(!out.status.success());
    let csv = fs::read_to_string(dir.path().join("s/sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].ends_with(",ok"));
    assert!(
        rows[1].contains("error") && rows[1].contains("channel_probs"),
        "{}",
        rows[1]
    );
}

#[test]
fn population_sweep_stays_under_capacity() {
    let dir = tempfile::tempdir().unwrap();
    ok(&towsync(
        &[
            "sweep",
            "--set",
            "M=10,20,40",
            "--workers",
            "2",
            "--steps",
            "1000",
            "--out",
            "s",
        ],
        dir.path(),
    ));
    let csv = fs::read_to_string(dir.path().join("s/sweep.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let m: f64 = f[2].parse().unwrap();
        let mean: f64 = f[3].parse().unwrap();
        assert!(mean <= 12.0_f64.min(m), "{line}");
    }
}
