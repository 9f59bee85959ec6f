//! End-to-end checks of the binary: determinism of structured output,
//! exit-code contract, and format selection through the environment.

use std::process::{Command, Output};

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_supersing"));
    cmd.args(args);
    cmd.env_remove("SUPERSING_FORMAT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

#[test]
fn structured_output_is_byte_identical_across_runs() {
    let args = [
        "verify",
        "dieudonne",
        "--g",
        "2",
        "--trials",
        "4",
        "--seed",
        "11",
        "--format",
        "structured",
    ];
    let a = run(&args, &[]);
    let b = run(&args, &[]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
    // Structured output is JSON with the schema marker and no timing.
    let text = String::from_utf8(a.stdout).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["schema"], "1");
    assert!(json.get("wall_time_ms").is_none());
}

#[test]
fn solve_reports_are_deterministic() {
    for g in ["3", "4"] {
        let args = ["solve", "--g", g, "--format", "structured"];
        let a = run(&args, &[]);
        let b = run(&args, &[]);
        assert!(a.status.success(), "solve --g {g} failed");
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn exit_codes() {
    // 0: all pass (findings allowed; solve --g 4 contains findings).
    let out = run(&["solve", "--g", "4"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("finding"));

    // 2: usage errors, both clap-level and validation-level.
    let out = run(&["classes", "--g", "7"], &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve", "--g", "5"], &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["no-such-command"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn counts_pass_at_p2() {
    let out = run(
        &[
            "verify", "counts", "--p", "2", "--trials", "5", "--format", "structured",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let items = json["items"].as_array().unwrap();
    assert!(items.len() >= 8);
    for item in items {
        assert_eq!(item["status"], "pass", "{item}");
    }
}

#[test]
fn format_env_variable_selects_structured() {
    let out = run(
        &["verify", "identities"],
        &[("SUPERSING_FORMAT", "structured")],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(serde_json::from_str::<serde_json::Value>(&text).is_ok());
}

#[test]
fn crosscheck_section_present_with_verdicts() {
    let out = run(&["solve", "--g", "4", "--format", "structured"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let items = json["items"].as_array().unwrap();
    let pairs: Vec<&serde_json::Value> = items
        .iter()
        .filter(|i| i["name"].as_str().unwrap().starts_with("crosscheck pair"))
        .collect();
    assert_eq!(pairs.len(), 3);
    for pair in pairs {
        let verdict = pair["computed"].as_str().unwrap();
        assert!(verdict.contains("relation ideal"), "{verdict}");
        assert!(
            verdict.contains("values agree") || verdict.contains("values disagree"),
            "{verdict}"
        );
    }
}
