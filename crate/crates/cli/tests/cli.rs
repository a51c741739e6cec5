use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    root.join(name).to_string_lossy().into_owned()
}

fn hcsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcsp"))
        .args(args)
        .env_remove("HCSP_CAP")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_h_is_npc() {
    let out = hcsp(&["classify", "-s", &data("henson3_H.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["outcome"], "NPC");
}

#[test]
fn classify_reports_solver() {
    let out = hcsp(&["classify", "-s", &data("henson3_horn.json")]);
    let v = json(&out);
    assert_eq!(v["outcome"], "P");
    assert_eq!(v["witness"]["solver"], "horn");
    assert_eq!(v["witness"]["behaviour"], "B_min");
    assert!(v["trail"].as_array().is_some_and(|t| !t.is_empty()));
}

#[test]
fn delegated_base_is_a_verdict() {
    let out = hcsp(&["classify", "-s", &data("random_graph.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["outcome"], "DELEGATED");
}

#[test]
fn triangle_is_unsat_with_exit_zero() {
    let sig = data("henson3_horn.json");
    let inst = data("triangle.json");
    for solver in ["oracle", "auto", "horn"] {
        let out = hcsp(&["solve", "-s", &sig, "-i", &inst, "--solver", solver]);
        assert_eq!(out.status.code(), Some(0), "{solver}");
        assert_eq!(json(&out)["status"], "UNSAT", "{solver}");
    }
}

#[test]
fn witness_only_on_request() {
    let sig = data("henson3_horn.json");
    let inst = data("horn_chain.json");
    let plain = json(&hcsp(&["solve", "-s", &sig, "-i", &inst]));
    assert_eq!(plain["status"], "SAT");
    assert!(plain.get("witness").is_none());
    let with = json(&hcsp(&["solve", "-s", &sig, "-i", &inst, "--witness"]));
    assert_eq!(
        with["witness"]["variables"].as_array().map(Vec::len),
        Some(4)
    );
}

#[test]
fn parity_emits_gf2_system() {
    let out = hcsp(&[
        "solve",
        "-s",
        &data("omega2_A.json"),
        "-i",
        &data("parity_odd.json"),
        "--emit-gf2",
    ]);
    let v = json(&out);
    assert_eq!(v["solver"], "parity");
    assert_eq!(v["gf2"]["vars"], 6);
}

#[test]
fn oracle_verb() {
    let out = hcsp(&[
        "oracle",
        "-s",
        &data("omega2_A.json"),
        "-i",
        &data("parity_odd.json"),
    ]);
    let v = json(&out);
    assert_eq!(v["status"], "SAT");
    assert!(v["witness"]["entries"].is_string());
}

#[test]
fn cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_hcsp"))
        .args([
            "oracle",
            "-s",
            &data("henson3_horn.json"),
            "-i",
            &data("horn_chain.json"),
        ])
        .env("HCSP_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gadget_instance_is_unsat() {
    let out = hcsp(&[
        "gadget",
        "--n",
        "3",
        "--formula",
        &data("one_in_three.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let inst = json(&out);
    assert_eq!(inst["variables"].as_array().map(Vec::len), Some(8));
    assert_eq!(inst["constraints"].as_array().map(Vec::len), Some(4));

    let path = std::env::temp_dir().join(format!("hcsp-gadget-{}.json", std::process::id()));
    std::fs::write(&path, &out.stdout).unwrap();
    let solved = hcsp(&[
        "solve",
        "-s",
        &data("henson3_H.json"),
        "-i",
        path.to_str().unwrap(),
    ]);
    std::fs::remove_file(&path).ok();
    assert_eq!(json(&solved)["status"], "UNSAT");
}

#[test]
fn gen_is_deterministic() {
    let args = [
        "gen",
        "relation",
        "--base",
        r#"{"kind":"henson","n":3}"#,
        "--arity",
        "3",
        "--seed",
        "7",
        "--closed-under",
        "B_min",
    ];
    let a = hcsp(&args);
    let b = hcsp(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let sig = data("henson3_horn.json");
    let args = [
        "gen",
        "instance",
        "-s",
        &sig,
        "--vars",
        "5",
        "--constraints",
        "4",
        "--seed",
        "7",
    ];
    assert_eq!(hcsp(&args).stdout, hcsp(&args).stdout);
}

#[test]
fn emitted_json_round_trips() {
    let out = hcsp(&["classify", "-s", &data("omega2_A.json")]);
    let v: hcsp_core::Verdict = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(serde_json::to_value(&v).unwrap(), json(&out));

    let sig = data("henson3_horn.json");
    let out = hcsp(&[
        "gen",
        "instance",
        "-s",
        &sig,
        "--vars",
        "5",
        "--constraints",
        "4",
        "--seed",
        "1",
    ]);
    let inst: hcsp_core::model::InstanceJson = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(serde_json::to_value(&inst).unwrap(), json(&out));
}

#[test]
fn input_errors_exit_two() {
    let sig = data("henson3_horn.json");
    let inst = data("triangle.json");
    assert_eq!(
        hcsp(&["solve", "-s", "missing.json", "-i", &inst])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        hcsp(&["solve", "-s", &sig, "-i", &inst, "--solver", "bogus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        hcsp(&["solve", "-s", &data("random_graph.json"), "-i", &inst])
            .status
            .code(),
        Some(2)
    );
    // A forced solver that does not apply to the base.
    assert_eq!(
        hcsp(&["solve", "-s", &sig, "-i", &inst, "--solver", "parity"])
            .status
            .code(),
        Some(2)
    );
}
