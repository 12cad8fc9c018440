use std::process::{Command, Output};

fn pbv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbv")).args(args).output().expect("spawn pbv")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn sample_json_records_seed_and_counts() {
    let out = pbv(&["sample", "--keys", "011,101", "--shots", "256", "--seed", "9"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["schema"], "pbv.sample/1");
    assert_eq!(doc["seed"], 9);
    assert_eq!(doc["rng"], "chacha8");
    assert!(doc["wall_time_ms"].is_number());
    let text = doc.to_string();
    assert!(text.contains("011") && text.contains("101"));
}

#[test]
fn omitted_seed_is_reported() {
    let out = pbv(&["sample", "--keys", "01", "--shots", "4"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc["seed"].is_u64());
    assert_eq!(doc["config"]["seed"], doc["seed"]);
}

#[test]
fn csv_has_comment_header_then_table() {
    let out = pbv(&["sample", "--keys", "011,101", "--shots", "16", "--seed", "3", "--format", "csv"]);
    let text = stdout(&out);
    let table: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(table[0], "outcome,count,probability,exact_probability");
    let total: u64 = table[1..]
        .iter()
        .map(|row| row.split(',').nth(1).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 16);
}

#[test]
fn analyze_text_lists_recovery_grid() {
    let out = pbv(&["analyze", "--k", "2", "--m", "2..=4", "--format", "text"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for p in ["1/2", "3/4", "7/8"] {
        assert!(text.contains(p), "missing {p} in\n{text}");
    }
}

#[test]
fn out_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.json");
    let out = pbv(&["simulate", "--keys", "011,101", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["schema"], "pbv.simulate/1");
}

#[test]
fn bad_input_exits_2() {
    assert_eq!(pbv(&["sample", "--keys", "01x"]).status.code(), Some(2));
    assert_eq!(pbv(&["sample", "--keys", "01,011"]).status.code(), Some(2));
    assert_eq!(pbv(&["nonsense"]).status.code(), Some(2));
    let out = pbv(&["analyze", "--keys", "01", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn oversized_register_exits_3() {
    let key = "1".repeat(24);
    let keys = format!("{key},{}", "0".repeat(24));
    let out = pbv(&["simulate", "--keys", &keys]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("qubits"));
}

#[test]
fn unwritable_out_exits_1() {
    let out = pbv(&["simulate", "--keys", "01", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn same_seed_same_adversary_result() {
    let args = ["adversary", "--keys", "0001,0011,1011,1110", "--m", "64", "--trials", "200", "--seed", "5"];
    let a: serde_json::Value = serde_json::from_str(&stdout(&pbv(&args))).unwrap();
    let b: serde_json::Value = serde_json::from_str(&stdout(&pbv(&args))).unwrap();
    assert_eq!(a["result"], b["result"]);
}
