use std::process::{Command, Output};

use serde_json::Value;

fn rankone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankone")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap().trim_end().to_string()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = rankone(&full);
    (out.status.code().unwrap(), serde_json::from_str(&stdout(&out)).expect("valid json"))
}

#[test]
fn word_command() {
    let out = rankone(&["word", "--spec", "chacon", "--n", "2"]);
    assert_eq!(stdout(&out), "001011110010111110010");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&rankone(&["word", "--spec", "chacon", "--n", "0"])), "0");
    let (code, v) = json(&["word", "--spec", "hk", "--n", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["word"], "0011100");
    assert_eq!(v["length"], 7);
}

#[test]
fn lazy_letter_matches_materialized_word() {
    let full = stdout(&rankone(&["word", "--spec", "chacon", "--n", "5"]));
    for j in [0usize, 7, 100, 1234, full.len() - 1] {
        let letter = stdout(&rankone(&["word", "--spec", "chacon", "--n", "5", "--at", &j.to_string()]));
        assert_eq!(letter, full[j..=j], "index {j}");
    }
    let out = rankone(&["word", "--n", "40", "--at", "10^9"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(matches!(stdout(&out).as_str(), "0" | "1"));
}

#[test]
fn word_streams_past_the_cap() {
    let capped = rankone(&["word", "--spec", "chacon", "--n", "4", "--cap", "10"]);
    let full = rankone(&["word", "--spec", "chacon", "--n", "4"]);
    assert_eq!(stdout(&capped), stdout(&full));
}

#[test]
fn check_command() {
    let (code, v) = json(&["check", "--spec", "chacon"]);
    assert_eq!(code, 0);
    let cert = &v["partial_boundedness"]["certificate"];
    assert_eq!((cert["cut_bound"].as_u64(), cert["spread_bound"].as_str(), cert["threshold"].as_u64()), (Some(4), Some("2"), Some(1)));
    let (code, v) = json(&["check", "--spec", "hk"]);
    assert_eq!(code, 0);
    assert_eq!(v["partial_boundedness"]["status"], "certified");
    let (code, v) = json(&["check", "--spec", "finite-odometer"]);
    assert_eq!(code, 1);
    assert_eq!(v["partial_boundedness"]["condition"], 3);
    let (_, v) = json(&["check", "--spec", "chacon-raw"]);
    assert_eq!(v["sufficient_conditions"]["status"], "holds");
}

#[test]
fn orbit_and_name_commands() {
    let out = stdout(&rankone(&["orbit", "--spec", "chacon", "--point", "1:3:1/3"]));
    assert_eq!(out.lines().last(), Some("2:12:0/1"));
    let out = stdout(&rankone(&["orbit", "--spec", "chacon", "--point", "0:0:1/3"]));
    assert_eq!(out.lines().last(), Some("1:2:0/1"));
    let (code, v) = json(&["orbit", "--spec", "chacon", "--point", "2:12:0/1", "--inverse"]);
    assert_eq!(code, 0);
    assert_eq!(v["orbit"][1], "0:0:7/9");
    let out = stdout(&rankone(&["orbit", "--spec", "chacon", "--point", "0:0:7/9", "--steps", "1"]));
    assert_eq!(out.lines().last(), Some("2:12:0/1"));
    let (_, v) = json(&["name", "--spec", "chacon", "--point", "2:0:1/7", "--window", "0:21"]);
    assert_eq!(v["letters"], "001011110010111110010");
    let (_, v) = json(&["name", "--spec", "chacon", "--point", "2:5:1/7", "--window", "-5:16"]);
    assert_eq!(v["letters"], "001011110010111110010");
    let (_, v) = json(&["name", "--spec", "chacon", "--point", "2:5:1/7", "--window", "3:3"]);
    assert_eq!(v["letters"], "");
}

#[test]
fn seeded_sampling_is_reproducible() {
    let args = ["name", "--spec", "hk", "--n", "4", "--seed", "17", "--window", "-20:20"];
    assert_eq!(stdout(&rankone(&args)), stdout(&rankone(&args)));
}

#[test]
fn analyze_command() {
    let (code, v) = json(&["analyze", "--spec", "chacon", "--n", "2", "--x", "word:4", "--y", "shift:8", "--m", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["propagation"]["ell"], 8);
    assert_eq!(v["density"]["ratio"], "1");
    assert_eq!(v["totals"]["mixed"], 0);
    let (_, v) = json(&["analyze", "--spec", "chacon", "--n", "2", "--y", "shift:0"]);
    assert!(v["occurrences"].as_array().unwrap().iter().all(|r| r["verdict"] == "good" && r["rho"] == 0));
    let (_, v) = json(&["analyze", "--spec", "chacon", "--n", "2", "--y", "insert:30:1"]);
    assert_eq!(v["density"]["exceeds_threshold"], false);
}

#[test]
fn inverse_command() {
    let (code, v) = json(&["inverse", "--spec", "hk"]);
    assert_eq!((code, v["isomorphic_to_inverse"].as_bool(), v["n"].as_u64()), (0, Some(true), Some(0)));
    let (code, v) = json(&["inverse", "--spec", "chacon"]);
    assert_eq!((code, v["isomorphic_to_inverse"].as_bool()), (1, Some(false)));
    let (code, v) = json(&["inverse", "--spec", "chacon", "--against", "chacon-reversed"]);
    assert_eq!(code, 0);
    assert_eq!(v["criteria_met"], true);
    assert!(!v["witnesses"].as_array().unwrap().is_empty());
    let (code, v) = json(&["inverse", "--spec", "chacon", "--against", "hk"]);
    assert_eq!(code, 1);
    assert_eq!(v["conditions"][0]["status"], "fails");
    let (code, _) = json(&["inverse", "--spec", "chacon", "--against", "chacon"]);
    assert_eq!(code, 3);
}

#[test]
fn spec_files_and_input_errors() {
    let dir = std::env::temp_dir().join(format!("rankone-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("odometer.spec");
    std::fs::write(&path, "name: odometer\ncycle: [r=2, s=(h)]\n").unwrap();
    let out = rankone(&["word", "--spec", path.to_str().unwrap(), "--n", "2"]);
    assert_eq!(stdout(&out), "010111010");
    std::fs::write(&path, "cycle: [r=1, s=()]\n").unwrap();
    assert_eq!(rankone(&["check", "--spec", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(rankone(&["word", "--spec", "nope", "--n", "1"]).status.code(), Some(2));
    assert_eq!(rankone(&["name", "--point", "oops", "--window", "0:4"]).status.code(), Some(2));
    assert_eq!(rankone(&["name", "--point", "0:0:1/2", "--window", "4:0"]).status.code(), Some(2));
    let (code, v) = json(&["word", "--spec", "nope", "--n", "1"]);
    assert_eq!(code, 2);
    assert!(v["error"].is_string());
    std::fs::remove_dir_all(dir).unwrap();
}
