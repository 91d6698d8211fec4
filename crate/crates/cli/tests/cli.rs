use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn softmask(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_softmask"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = softmask(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn phantom_then_run_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("out");
    ok(&["phantom", "--count", "3", "--size", "48", "--seed", "4", "--out", s(&data)]);
    let manifest = data.join("manifest.jsonl");
    assert!(manifest.exists());
    let stdout = ok(&["run", s(&manifest), "--out-dir", s(&out), "--workers", "2", "--seed", "9"]);
    assert!(stdout.contains("3 processed, 3 succeeded, 0 failed"), "{stdout}");
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["mean_dice_vs_ground_truth"].as_f64().unwrap() >= 0.95);
    assert!(out.join("phantom_000_soft.pgm").exists());
}

#[test]
fn any_failed_entry_gives_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["phantom", "--count", "2", "--size", "32", "--annotation", "binary", "--out", s(&data)]);
    fs::remove_file(data.join("phantom_001_gt.pgm")).unwrap();
    let out = softmask(&["run", s(&data.join("manifest.jsonl")), "--out-dir", s(&dir.path().join("out"))]);
    assert!(!out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("1 succeeded, 1 failed"), "{stdout}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("phantom_001"));
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["phantom", "--count", "1", "--size", "32", "--out", s(&data)]);
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"matting": {"max_iters": 1}}"#).unwrap();
    let manifest = data.join("manifest.jsonl");
    let starved = softmask(&["run", s(&manifest), "--out-dir", s(&dir.path().join("a")), "--config", s(&cfg)]);
    assert!(!starved.status.success(), "one solver iteration cannot converge");
    ok(&[
        "run",
        s(&manifest),
        "--out-dir",
        s(&dir.path().join("b")),
        "--config",
        s(&cfg),
        "--max-iters",
        "5000",
    ]);
    fs::write(&cfg, r#"{"no_such_key": 1}"#).unwrap();
    let bad = softmask(&["run", s(&manifest), "--out-dir", s(&dir.path().join("c")), "--config", s(&cfg)]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("config error"));
}

#[test]
fn single_image_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["phantom", "--count", "1", "--size", "40", "--annotation", "multirater", "--out", s(d)]);
    let img = d.join("phantom_000.pgm");
    let gt = d.join("phantom_000_gt.pgm");
    let trimap = d.join("t.pgm");
    ok(&["trimap", "--image", s(&img), "--mask", s(&gt), "--out", s(&trimap)]);
    let soft = d.join("soft.pgm");
    ok(&["matte", "--image", s(&img), "--trimap", s(&trimap), "--out", s(&soft)]);
    let bin = d.join("bin.pgm");
    ok(&["binarize", "--soft", s(&soft), "--out", s(&bin)]);
    ok(&["soften", "--soft", s(&soft), "--mask", s(&gt), "--out", s(&d.join("softened.pgm"))]);
    let raters: Vec<String> = (0..3).map(|k| s(&d.join(format!("phantom_000_r{k}.pgm"))).to_string()).collect();
    let mut args = vec!["consensus"];
    args.extend(raters.iter().map(String::as_str));
    let cons = d.join("cons.pgm");
    args.extend(["--out", s(&cons)]);
    ok(&args);
    let multi = d.join("t_multi.pgm");
    let mut args = vec!["trimap", "--image", s(&img), "--raters"];
    args.extend(raters.iter().map(String::as_str));
    args.extend(["--out", s(&multi)]);
    ok(&args);

    let line = serde_json::json!({
        "case_id": "c0",
        "ground_truth": s(&gt),
        "prediction": s(&soft),
        "raters": {"r0": raters[0], "r1": raters[1], "r2": raters[2]},
    });
    fs::write(d.join("cases.jsonl"), format!("{line}\n")).unwrap();
    let stdout = ok(&["eval", "--cases", s(&d.join("cases.jsonl")), "--out-dir", s(&d.join("eval")), "--pooled"]);
    assert!(stdout.contains("1 cases: dice"), "{stdout}");
    let csv = fs::read_to_string(d.join("eval/pairwise_dice.csv")).unwrap();
    assert!(csv.starts_with("name,r0,r1,r2,consensus50,prediction,ground_truth"), "{csv}");
    let metrics: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("eval/metrics.json")).unwrap()).unwrap();
    assert!(metrics["cases"][0]["dice"].as_f64().unwrap() >= 0.9);
    assert!(metrics["pooled"].is_object());
}

#[test]
fn recist_trimap_from_manifest_axes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["phantom", "--count", "1", "--size", "48", "--out", s(d)]);
    let line = fs::read_to_string(d.join("manifest.jsonl")).unwrap();
    let entry: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
    let axes: Vec<String> = entry["annotation"]["axes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.to_string())
        .collect();
    let img = d.join("phantom_000.pgm");
    let out = d.join("t.pgm");
    let stdout = ok(&["trimap", "--image", s(&img), "--recist", &axes.join(","), "--out", s(&out)]);
    assert!(stdout.contains("foreground"), "{stdout}");
    let short = softmask(&["trimap", "--image", s(&img), "--recist", "1,2,3", "--out", s(&out)]);
    assert!(!short.status.success());
}

#[test]
fn usage_errors_exit_nonzero() {
    assert!(!softmask(&[]).status.success());
    assert!(!softmask(&["trimap", "--image", "x.pgm", "--out", "y.pgm"]).status.success());
    let out = softmask(&["binarize", "--soft", "/nonexistent.pgm", "--out", "/tmp/never.pgm"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
