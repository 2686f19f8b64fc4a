//! End-to-end tests of the `myobench` binary: the documented pipeline
//! session, error reporting, and re-run determinism.

use std::path::Path;
use std::process::{Command, Output};

fn myobench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_myobench"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn documented_session_works_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    assert_ok(&myobench(root, &["synth", "--preset", "bio-like", "--scale", "0.05", "--seed", "7"]));
    assert!(root.join("out/bundle/manifest.json").is_file());
    assert!(root.join("out/bundle/run_config.json").is_file());

    assert_ok(&myobench(root, &["preprocess", "--seed", "7"]));
    assert_ok(&myobench(root, &["features", "--seed", "7", "--sets", "acc-med,emg-td"]));
    assert!(root.join("out/features/store.json").is_file());
    assert!(root.join("out/features/s001_acc-med.csv").is_file());

    let eval = myobench(
        root,
        &[
            "eval",
            "--task",
            "position",
            "--features",
            "acc-med",
            "--classifier",
            "lda",
            "--seed",
            "7",
        ],
    );
    assert_ok(&eval);
    let result_path = root.join("out/results/position_acc-med_lda_s7.json");
    assert!(result_path.is_file());
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&result_path).unwrap()).unwrap();
    // The result JSON carries the aggregate accuracy and the resolved config.
    assert!(parsed["result"]["mean"].as_f64().unwrap() > 0.9);
    assert_eq!(parsed["run_config"]["seed"].as_u64().unwrap(), 7);
    assert_eq!(parsed["tdpsd_version"].as_str().unwrap(), "tdpsd-v1");
    assert!(root.join("out/results/position_acc-med_lda_s7_confusion.csv").is_file());

    assert_ok(&myobench(
        root,
        &["eval", "--task", "sequential", "--features", "acc-med,emg-td", "--seed", "7"],
    ));

    let report = myobench(root, &["report", "--csv"]);
    assert_ok(&report);
    let md = std::fs::read_to_string(root.join("out/report.md")).unwrap();
    assert!(md.contains("Multi-gesture position recognition (bio-like)"));
    assert!(md.contains("Sequential gesture recognition (bio-like)"));
    assert!(root.join("out/report.csv").is_file());
}

#[test]
fn sequential_on_hci_bundle_fails_with_single_line_error() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    assert_ok(&myobench(root, &["synth", "--preset", "hci-like", "--scale", "0.02", "--seed", "1"]));
    assert_ok(&myobench(root, &["preprocess"]));
    assert_ok(&myobench(root, &["features", "--sets", "acc-med,emg-td"]));

    let out = myobench(root, &["eval", "--task", "sequential"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    let lines: Vec<&str> = stderr.trim().lines().collect();
    assert_eq!(lines.len(), 1, "error must be a single line: {stderr}");
    assert!(lines[0].starts_with("error: "), "{stderr}");
    assert!(lines[0].contains("task unavailable: no position labels"), "{stderr}");
}

#[test]
fn unknown_flags_and_bad_config_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    let out = myobench(root, &["eval", "--task", "flying"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("unknown task"), "{stderr}");

    let out = myobench(root, &["synth", "--preset", "nonexistent"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("error: "), "{stderr}");

    let out = myobench(root, &["--no-such-flag", "report"]);
    assert!(!out.status.success());
}

#[test]
fn convert_validates_and_reencodes() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    assert_ok(&myobench(root, &["synth", "--preset", "bio-like", "--scale", "0.02", "--seed", "3"]));

    let out = myobench(
        root,
        &["convert", "--input", "out/bundle", "--output", "canonical", "--encoding", "f32le"],
    );
    assert_ok(&out);
    assert!(root.join("canonical/manifest.json").is_file());
    let manifest =
        std::fs::read_to_string(root.join("canonical/manifest.json")).unwrap();
    assert!(manifest.contains("\"encoding\": \"f32le\""));

    // Corrupt a trial file; convert must refuse it.
    let bad = root.join("out/bundle/trials");
    let first = std::fs::read_dir(&bad).unwrap().next().unwrap().unwrap().path();
    let mut text = std::fs::read_to_string(&first).unwrap();
    text.push_str("0.5\n"); // ragged row: too few columns
    std::fs::write(&first, text).unwrap();
    let out = myobench(root, &["convert", "--input", "out/bundle", "--output", "c2"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("error: "), "{stderr}");
}

#[test]
fn identical_reruns_are_byte_identical_at_any_job_count() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let run = |jobs: &str, out_dir: &str| {
        assert_ok(&myobench(
            root,
            &[
                "synth", "--preset", "bio-like", "--scale", "0.02", "--seed", "5",
                "--jobs", jobs, "--output-dir", out_dir,
            ],
        ));
        assert_ok(&myobench(root, &["preprocess", "--jobs", jobs, "--output-dir", out_dir]));
        assert_ok(&myobench(
            root,
            &["features", "--sets", "acc-med", "--jobs", jobs, "--output-dir", out_dir],
        ));
        assert_ok(&myobench(
            root,
            &[
                "eval", "--task", "position", "--classifier", "rf", "--seed", "5",
                "--jobs", jobs, "--output-dir", out_dir,
            ],
        ));
    };
    run("1", "a");
    run("4", "b");
    let read = |p: &str| std::fs::read(root.join(p)).unwrap();
    // Bundle and feature files carry no job-count echo: byte identical.
    assert_eq!(read("a/bundle/manifest.json"), read("b/bundle/manifest.json"));
    assert_eq!(
        read("a/bundle/trials/s001_g001_p001_r001_emg.csv"),
        read("b/bundle/trials/s001_g001_p001_r001_emg.csv")
    );
    assert_eq!(read("a/features/s001_acc-med.csv"), read("b/features/s001_acc-med.csv"));
    // Result JSON echoes the resolved config (including --jobs), so compare
    // the task result payloads.
    let parse = |p: &str| -> serde_json::Value {
        serde_json::from_slice::<serde_json::Value>(&read(p)).unwrap()["result"].clone()
    };
    assert_eq!(
        parse("a/results/position_acc-med_rf10_s5.json"),
        parse("b/results/position_acc-med_rf10_s5.json")
    );
}
