use std::path::Path;
use std::process::{Command, Output};

fn stance(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stance"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn stages_run_one_at_a_time() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(stance(d, &["synth", "--out", "s", "--users", "60", "--seed-rng", "3"])
        .status
        .success());
    let cfg = "s/synthetic/config.toml";
    for stage in [
        "ingest",
        "build-graph",
        "cotrain",
        "weaklabel",
        "train-conv",
        "predict",
        "eval",
        "analyze",
    ] {
        let o = stance(d, &[stage, "--config", cfg]);
        assert!(o.status.success(), "{stage}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("done"), "{stage}");
    }
    let run = d.join("s/synthetic/run");
    for f in [
        "user_stance.csv",
        "weak_labels.csv",
        "conv_model.json",
        "predictions.jsonl",
        "eval_report.json",
    ] {
        assert!(run.join(f).exists(), "{f}");
    }
    let again = stance(d, &["run-all", "--config", cfg]);
    assert!(again.status.success());
    assert!(!stdout(&again).contains(" done"), "{}", stdout(&again));

    // a threshold flag changes the co-training settings, so it reruns
    let o = stance(d, &["cotrain", "--config", cfg, "--theta-u", "0.8"]);
    assert!(stdout(&o).contains("cotrain      done"), "{}", stdout(&o));
}

#[test]
fn out_of_order_stage_names_its_dependency() {
    let dir = tempfile::tempdir().unwrap();
    let o = stance(dir.path(), &["weaklabel", "--out", "x"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("run `ingest` first"), "{err}");
}

#[test]
fn raw_input_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("t.jsonl"),
        concat!(
            "{\"id\":\"1\",\"user\":\"a\",\"text\":\"yes #good\",\"hashtags\":[\"good\"]}\n",
            "{\"id\":\"2\",\"user\":\"b\",\"text\":\"no #bad\",\"hashtags\":[\"bad\"]}\n",
            "{\"id\":\"3\",\"user\":\"c\",\"text\":\"@a agreed\",\"reply_to\":\"1\"}\n",
        ),
    )
    .unwrap();
    let o = stance(d, &["ingest", "--input", "t.jsonl", "--out", "o", "--event", "demo"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pairs = std::fs::read_to_string(d.join("o/conversations.jsonl")).unwrap();
    assert_eq!(pairs.lines().count(), 1);
    assert!(pairs.contains("\"demo\""));
    let o = stance(
        d,
        &[
            "build-graph",
            "--out",
            "o",
            "--seeds",
            "good:pro,bad:anti",
            "--topk-hashtags",
            "1",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = stance(d, &["cotrain", "--out", "o", "--seeds", "good:pro", "--mode", "pair"]);
    assert!(!o.status.success());

    let bad = stance(d, &["ingest", "--mode", "sideways"]);
    assert!(!bad.status.success());
}
