use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn aegen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aegen")).args(args).env_remove("AEGEN_ORACLE_URL").output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_config(dir: &Path, generations: usize, oracle: &str) -> PathBuf {
    let config = format!(
        r#"{{
  "scenario": {{"kind": "accuracy_vs_amount", "norm": "l2", "correct_labels": ["frog"]}},
  "encoding": {{"kind": "direct", "block_size": 4, "bound": 64}},
  "optimizer": {{"population_size": 20, "generations": {generations}, "seed": 3}},
  "oracle": {oracle},
  "io": {{"image": {image:?}, "output_dir": "out"}}
}}"#,
        image = fixture("frog16.ppm"),
    );
    let path = dir.join("attack.json");
    std::fs::write(&path, config).unwrap();
    path
}

fn builtin() -> String {
    format!(r#"{{"kind": "builtin", "weights": {:?}}}"#, fixture("disk16.aemlp"))
}

#[test]
fn dct_dims_prints_lengths() {
    for (ap, expected) in [("1", "848"), ("5", "1104"), ("10", "1424")] {
        let out = aegen(&["dct-dims", "224", "224", ap, "8"]);
        assert!(out.status.success());
        assert_eq!(stdout(&out).trim(), expected);
    }
    assert_eq!(aegen(&["dct-dims", "32", "32", "1", "8"]).stdout, b"80\n");
    assert_eq!(aegen(&["dct-dims", "0", "32", "1", "8"]).status.code(), Some(2));
    assert_eq!(aegen(&["dct-dims", "32", "32", "-1", "8"]).status.code(), Some(2));
}

#[test]
fn zero_generation_run_exports_the_zero_genotype() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 0, &builtin());
    let out = aegen(&["attack", config.to_str().unwrap()]);
    let out_dir = dir.path().join("out");
    let front = std::fs::read_to_string(out_dir.join("front.csv")).unwrap();
    let mut lines = front.lines();
    assert_eq!(lines.next(), Some("index,confidence,amount,violation,feasible,genotype"));
    assert!(front.lines().skip(1).any(|l| l.split(',').nth(2) == Some("0")), "{front}");
    assert_eq!(out.status.code(), Some(if front.contains(",true,") { 0 } else { 1 }));
    for file in ["run.json", "checkpoint.json", "individuals.jsonl", "front.svg", "images/ae_0.ppm", "genotypes/g_0.csv"] {
        assert!(out_dir.join(file).exists(), "{file} missing");
    }
    let genotype = std::fs::read_to_string(out_dir.join("genotypes/g_0.csv")).unwrap();
    assert_eq!(genotype.trim().split(',').count(), 16 * 3);
}

#[test]
fn resume_extends_a_finished_run() {
    let dir = tempfile::tempdir().unwrap();
    let short = write_config(dir.path(), 5, &builtin());
    assert!(aegen(&["attack", short.to_str().unwrap()]).status.code().is_some());
    let longer = write_config(dir.path(), 12, &builtin());
    let out = aegen(&["attack", longer.to_str().unwrap(), "--resume"]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1), "{out:?}");
    let run: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("out/run.json")).unwrap()).unwrap();
    assert_eq!(run["resumed_from_generation"], 5);
    assert_eq!(run["generations_completed"], 12);

    let resumed_front = std::fs::read(dir.path().join("out/front.csv")).unwrap();
    let fresh = tempfile::tempdir().unwrap();
    let config = write_config(fresh.path(), 12, &builtin());
    aegen(&["attack", config.to_str().unwrap()]);
    assert_eq!(std::fs::read(fresh.path().join("out/front.csv")).unwrap(), resumed_front);
}

#[test]
fn bad_configs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"scenario": {"kind": "accuracy_vs_amount"}, "bogus": 1}"#).unwrap();
    assert_eq!(aegen(&["attack", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(aegen(&["attack", dir.path().join("missing.json").to_str().unwrap()]).status.code(), Some(2));
    let no_oracle = write_config(dir.path(), 1, "null");
    assert_eq!(aegen(&["attack", no_oracle.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn unreachable_oracle_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 1, r#"{"kind": "remote", "endpoint": "http://127.0.0.1:9", "timeout_ms": 500, "retries": 0}"#);
    assert_eq!(aegen(&["attack", config.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(aegen(&["conformance", "http://127.0.0.1:9", "--timeout-ms", "500"]).status.code(), Some(3));
}

#[test]
fn eval_lists_nine_angles() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("eval.csv");
    let clean = fixture("frog16.ppm");
    let out = aegen(&[
        "eval",
        clean.to_str().unwrap(),
        clean.to_str().unwrap(),
        "--weights",
        fixture("disk16.aemlp").to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).starts_with("correct labels: frog"));
    let table = std::fs::read_to_string(csv).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows[0].starts_with("-60,") && rows[8].starts_with("60,"));
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[1..4], f[4..7]);
    }
}

#[test]
fn eval_requires_an_oracle() {
    let clean = fixture("frog16.ppm");
    let out = aegen(&["eval", clean.to_str().unwrap(), clean.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn schema_and_plot() {
    let out = aegen(&["schema"]);
    assert!(out.status.success());
    let schema: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(schema["properties"]["optimizer"].is_object(), "{schema}");

    let dir = tempfile::tempdir().unwrap();
    let front = dir.path().join("front.csv");
    std::fs::write(&front, "index,l0,l1,violation,feasible,genotype\n0,3,9.5,0,true,g\n1,7,2.25,0,true,g\n").unwrap();
    let svg = dir.path().join("front.svg");
    assert!(aegen(&["plot", front.to_str().unwrap(), svg.to_str().unwrap()]).status.success());
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.matches("<circle").count() == 2);
    std::fs::write(&front, "nonsense\n").unwrap();
    assert_eq!(aegen(&["plot", front.to_str().unwrap(), svg.to_str().unwrap()]).status.code(), Some(2));
}
