use std::process::{Command, Output};

use serde_json::Value as Json;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eschubert"))
        .args(args)
        .env_remove("ESCHUBERT_QORDER")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<Json> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn b2_table_has_four_exact_zeros() {
    let o = run(&["table", "--type", "B2", "--word", "1,2", "--backend", "exact", "--qorder", "6", "--seed", "7", "--format", "json"]);
    assert!(o.status.success());
    let doc: Json = serde_json::from_str(&stdout(&o)).unwrap();
    let entries = doc["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 8);
    let is_zero = |v: &Json| v.as_array().unwrap().iter().all(|c| c == "0");
    let zeros: Vec<&str> =
        entries.iter().filter(|e| is_zero(&e["value"])).map(|e| e["sigma_word"].as_str().unwrap()).collect();
    assert_eq!(zeros, ["2,1", "1,2,1", "2,1,2", "2,1,2,1"]);
    assert_eq!(doc["chart"]["name"], "so5");
    assert_eq!(doc["backend"]["order"], 6);
}

#[test]
fn empty_word_gives_the_initial_table() {
    let o = run(&["table", "--type", "A2", "--word", "id", "--qorder", "2"]);
    assert!(o.status.success());
    let doc: Json = serde_json::from_str(&stdout(&o)).unwrap();
    let nonzero: Vec<&Json> = doc["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["value"].as_array().unwrap().iter().any(|c| c != "0"))
        .collect();
    assert_eq!(nonzero.len(), 1);
    assert_eq!(nonzero[0]["sigma_word"], "id");
}

#[test]
fn qorder_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_eschubert"))
        .args(["table", "--type", "A1", "--word", "1"])
        .env("ESCHUBERT_QORDER", "3")
        .output()
        .unwrap();
    let doc: Json = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["entries"][0]["value"].as_array().unwrap().len(), 4);
}

#[test]
fn duality_campaigns_pass() {
    for t in ["A1", "B2"] {
        let o = run(&["verify", "duality", "--type", t, "--points", "2", "--qorder", "4"]);
        assert!(o.status.success(), "{t}: {}", String::from_utf8_lossy(&o.stderr));
        let records = json_lines(&o);
        let pairs = if t == "A1" { 4 } else { 64 };
        assert_eq!(records.len(), 2 * pairs);
        assert!(records.iter().all(|r| r["pass"] == true));
    }
}

#[test]
fn other_campaigns_pass() {
    for args in [
        ["verify", "recursions", "--type", "A2", "--backend", "complex", "--points", "5"],
        ["verify", "normalization", "--type", "B2", "--qorder", "3", "--points", "1"],
        ["verify", "double-dual", "--type", "A2", "--qorder", "3", "--points", "1"],
    ] {
        let o = run(&args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn corpus_passes() {
    let o = run(&["corpus", "--qorder", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let records = json_lines(&o);
    assert!(records.iter().any(|r| r["check"] == "cross-table"));
    assert_eq!(records.iter().filter(|r| r["check"] == "entry").count(), 37 * 3);
}

#[test]
fn wrong_corpus_entry_fails_with_a_listing() {
    let dir = std::env::temp_dir().join(format!("eschubert-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("bad.txt");
    std::fs::write(&file, "A1 1 1 (z2/z1|h)\nA1 1 id 0\n").unwrap();
    let o = run(&["corpus", "--file", file.to_str().unwrap(), "--qorder", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.txt:1") && err.contains("bad.txt:2"), "{err}");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["verify", "duality", "--type", "B2", "--points", "2", "--qorder", "3", "--seed", "11"],
        vec!["table", "--type", "G2", "--word", "w0", "--backend", "complex", "--seed", "5"],
        vec!["corpus", "--qorder", "2", "--format", "csv"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let a = run(&["table", "--type", "A2", "--word", "12", "--seed", "1"]);
    let b = run(&["table", "--type", "A2", "--word", "12", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn formats() {
    let csv = run(&["table", "--type", "A1", "--word", "1", "--qorder", "1", "--format", "csv"]);
    let text = stdout(&csv);
    assert_eq!(text.lines().next(), Some("sigma_word,value"));
    assert_eq!(text.lines().count(), 3);
    let pretty = run(&["verify", "duality", "--type", "A1", "--format", "pretty", "--qorder", "2"]);
    assert!(stdout(&pretty).contains("12/12"));
    let chart = run(&["chart", "--type", "C2"]);
    assert!(stdout(&chart).contains("zeta2 = 1/z2^2"));
}

#[test]
fn bad_input_is_rejected() {
    for args in [
        vec!["table", "--type", "X3", "--word", "1"],
        vec!["table", "--type", "B2", "--word", "3"],
        vec!["table", "--type", "B2", "--word", "1a"],
        vec!["table", "--type", "A1", "--qorder", "0"],
        vec!["table", "--type", "A1", "--backend", "complex", "--q", "1.5"],
        vec!["verify", "sideways", "--type", "A1"],
        vec!["chart", "--type", "G2"],
        vec!["corpus", "--file", "/nonexistent/corpus.txt"],
    ] {
        let o = run(&args);
        assert!(!o.status.success(), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}
