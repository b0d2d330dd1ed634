use std::process::{Command, Output};

use serde_json::Value;

fn qtoda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtoda"))
        .args(args)
        .output()
        .expect("failed to run qtoda")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is not JSON")
}

#[test]
fn root_system_json() {
    let out = qtoda(&["root-system", "--type", "A", "--rank", "2", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["coroot_gram"], serde_json::json!([["2", "-1"], ["-1", "2"]]));
}

#[test]
fn pipeline_rank_one_passes() {
    let out = qtoda(&["pipeline", "--type", "A", "--rank", "1", "--json"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let v = json(&out);
    assert_eq!(v["passed"], Value::Bool(true));
    assert!(v
        .get("stages")
        .and_then(Value::as_array)
        .is_some_and(|s| s.iter().all(|s| s.get("elapsed_ms").is_none())));
}

#[test]
fn pipeline_timings_are_opt_in() {
    let out = qtoda(&["pipeline", "--type", "A", "--rank", "1", "--json", "--timings"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["stages"].as_array().unwrap().iter().all(|s| s["elapsed_ms"].is_u64()));
}

#[test]
fn fault_injection_fails_with_pinpointed_entry() {
    let out = qtoda(&["pipeline", "--type", "A", "--rank", "1", "--fault-inject", "v"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("hypotheses: FAIL"), "{text}");
    assert!(text.contains("row 1: 4*q1 != 2*q1"), "{text}");
}

#[test]
fn input_errors_exit_two() {
    for args in [
        &["root-system", "--type", "E", "--rank", "6"][..],
        &["root-system", "--type", "A", "--rank", "9"],
        &["root-system", "--type", "G", "--rank", "3"],
        &[
            "verify",
            "hypotheses",
            "--type",
            "A",
            "--rank",
            "2",
            "--fault-inject",
            "nonsense",
        ],
        &[
            "verify",
            "hypotheses",
            "--type",
            "A",
            "--rank",
            "1",
            "--fault-inject",
            "commute",
        ],
        &[
            "verify",
            "flat-sections",
            "--type",
            "A",
            "--rank",
            "1",
            "--h-value",
            "0",
        ],
        &[
            "verify",
            "flat-sections",
            "--type",
            "A",
            "--rank",
            "1",
            "--h-value",
            "1/x",
        ],
        &["pipeline", "--type", "A"],
    ] {
        let out = qtoda(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn out_file_matches_json_stdout() {
    let dir = std::env::temp_dir().join(format!("qtoda-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("toda.json");
    let out = qtoda(&[
        "toda",
        "--type",
        "A",
        "--rank",
        "2",
        "--json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout(&out));
    assert!(written.ends_with('\n'));
    assert_eq!(json(&out)["integrals"].as_array().unwrap().len(), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn present_rank_one_relation() {
    let out = qtoda(&["present", "--type", "A", "--rank", "1"]);
    assert_eq!(code(&out), 0);
    assert!(
        stdout(&out).contains("relation 1: 2*l1^2 - 2*q1 = 0"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn verify_suites_pass_for_a2() {
    for what in ["hypotheses", "relations", "commutators", "flat-sections", "all"] {
        let out = qtoda(&["verify", what, "--type", "A", "--rank", "2", "--order", "2"]);
        assert_eq!(code(&out), 0, "{what}: {}", stdout(&out));
        assert!(stdout(&out).ends_with("A2 PASS\n"));
    }
}

#[test]
fn specialized_h_value() {
    let out = qtoda(&[
        "verify",
        "flat-sections",
        "--type",
        "B",
        "--rank",
        "2",
        "--order",
        "2",
        "--h-value",
        "3/2",
        "--json",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(json(&out)["passed"], Value::Bool(true));
}

#[test]
fn reports_are_deterministic() {
    let args = ["pipeline", "--type", "B", "--rank", "2", "--order", "2", "--json"];
    assert_eq!(qtoda(&args).stdout, qtoda(&args).stdout);
}
