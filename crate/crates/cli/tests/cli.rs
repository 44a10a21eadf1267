use std::fs;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn skcomm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skcomm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

#[test]
fn capacity_from_graph_files() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("path3.json");
    fs::write(&path, r#"{"vertices": 3, "edges": [[1, 2], [2, 3]]}"#).unwrap();
    let out = skcomm(&["capacity", "--pin", path.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["results"];
    assert_eq!(r["capacity"], "1/1");
    assert_eq!(r["packing_rate"], "1/1");

    let list = dir.path().join("k3.txt");
    fs::write(&list, "# triangle\n3\n1 2\n1 3\n2 3\n").unwrap();
    let out = skcomm(&["capacity", "--pin", list.to_str().unwrap(), "-n", "2", "--json"]);
    let r = &json(&out)["results"];
    assert_eq!(r["capacity"], "3/2");
    assert_eq!(r["trees"], 3);
}

#[test]
fn capacity_from_pmf() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("xy.json");
    fs::write(
        &path,
        r#"{"terminals": 2, "alphabet_sizes": [2, 2], "pmf": [[[0, 0], "1/2"], [[1, 1], "1/2"]]}"#,
    )
    .unwrap();
    let out = skcomm(&["capacity", "--model", path.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["results"];
    assert_eq!(r["capacity"], "1/1");
    assert_eq!(r["exact"], true);
}

#[test]
fn complete_five_reports_r_co() {
    let out = skcomm(&["capacity", "--complete", "5", "--json"]);
    let r = &json(&out)["results"];
    assert_eq!(r["capacity"], "5/2");
    assert_eq!(r["r_co"], "15/2");
    let text = String::from_utf8(skcomm(&["capacity", "--complete", "5"]).stdout).unwrap();
    assert!(text.contains("capacity: 2.500000 (5/2)"));
    assert!(text.contains("r_co: 7.500000 (15/2)"));
}

#[test]
fn protocol_round_trips_through_transcript_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("t.json");
    let out = skcomm(&["protocol", "--complete", "3", "-n", "2", "--out", path.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["results"];
    assert_eq!(r["key_rate"], "3/2");
    assert_eq!(r["comm_rate"], "3/2");

    let check = skcomm(&["protocol", "--check", path.to_str().unwrap(), "--json"]);
    assert_eq!(check.status.code(), Some(0));
    assert_eq!(json(&check)["results"]["verdicts"]["secret_key"]["pass"], true);

    // Hand the key to the public: leakage makes the check fail.
    let mut t: Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    let key0 = t["key"][0].clone();
    t["transmissions"].as_array_mut().unwrap().push(serde_json::json!({"sender": 1, "row": key0}));
    fs::write(&path, serde_json::to_vec(&t).unwrap()).unwrap();
    let leaked = skcomm(&["protocol", "--check", path.to_str().unwrap(), "--json"]);
    assert_eq!(leaked.status.code(), Some(1));
    assert_eq!(json(&leaked)["results"]["verdicts"]["secret_key"]["leakage"], 1);
}

#[test]
fn odd_nm_warns_but_succeeds() {
    let out = skcomm(&["protocol", "--complete", "3", "-n", "1", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(json(&out)["results"]["maximal"], false);
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "--suite", "cmi-formula", "--trials", "20", "--seed", "11", "--json"];
    let a = skcomm(&args);
    let b = skcomm(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["seed"], 11);
    let trials = v["results"]["trials"].as_array().unwrap();
    assert!(trials.iter().enumerate().all(|(i, t)| t["index"] == i));
}

#[test]
fn cmi_of_matrix_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("l.json");
    fs::write(&path, r#"{"labels": ["e0:1-2#0", "e1:1-3#0", "e2:2-3#0"], "rows": ["8"]}"#).unwrap();
    let out = skcomm(&["cmi", "--matrix", path.to_str().unwrap(), "--complete", "3", "--json"]);
    let r = &json(&out)["results"];
    assert_eq!(r["cmi"], "1/1");
    assert_eq!(r["lower_bound"], "1/1");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1 2\n2 x\n").unwrap();
    let out = skcomm(&["capacity", "--pin", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    assert_eq!(skcomm(&["capacity", "--pin", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(skcomm(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(skcomm(&["verify", "--suite", "lemma1", "--trials", "0"]).status.code(), Some(2));

    let unnormalized = dir.path().join("pmf.json");
    fs::write(&unnormalized, r#"{"terminals": 1, "alphabet_sizes": [2], "pmf": [[[0], "1/3"]]}"#).unwrap();
    assert_eq!(skcomm(&["capacity", "--model", unnormalized.to_str().unwrap()]).status.code(), Some(2));
}
