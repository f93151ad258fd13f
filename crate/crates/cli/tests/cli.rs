//! End-to-end runs of the binary: exit codes, report determinism, and the
//! JSON schema.

use std::process::Command;

fn twirl(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_twirl"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn exit_codes() {
    let ok = twirl(&["verify", "ft16", "--p", "3", "--n", "2"]);
    assert_eq!(ok.status.code(), Some(0));

    let usage = twirl(&["ring", "--p", "4", "--n", "2"]);
    assert_eq!(usage.status.code(), Some(2));

    let usage2 = twirl(&["appendix", "--p", "7", "--check", "colengths"]);
    assert_eq!(usage2.status.code(), Some(2));

    let unknown = twirl(&["verify", "bogus", "--p", "3"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn json_reports_are_byte_identical() {
    let run = || {
        twirl(&[
            "verify",
            "resolution",
            "--p",
            "3",
            "--n",
            "2",
            "--format",
            "json",
        ])
    };
    let a = run();
    let b = run();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let parsed: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(parsed["command"], "verify resolution");
    assert_eq!(parsed["params"]["p"], "3");
    assert_eq!(parsed["elapsed_ms"], 0);
    assert!(parsed["checks"].as_array().unwrap().len() >= 4);
    for c in parsed["checks"].as_array().unwrap() {
        assert_eq!(c["status"], "pass");
        assert!(
            c.get("name").is_some() && c.get("expected").is_some() && c.get("actual").is_some()
        );
        assert!(c.get("detail").is_some());
    }
}

#[test]
fn ring_json_lists_four_odd_generators_at_p5() {
    let out = twirl(&["ring", "--p", "5", "--n", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let odd: Vec<_> = parsed["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| {
            c["name"]
                .as_str()
                .unwrap()
                .starts_with("presentation/odd_generator_")
        })
        .collect();
    assert_eq!(odd.len(), 4);
}

#[test]
fn appendix_conjecture_is_evidence() {
    let out = twirl(&[
        "appendix",
        "--p",
        "3",
        "--check",
        "conjecture",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let c = &parsed["checks"][0];
    assert_eq!(c["status"], "evidence");
    assert!(c["name"].as_str().unwrap().contains("conjecture_i"));
}

#[test]
fn threads_flag_gives_identical_report() {
    let seq = twirl(&["verify", "all", "--p", "3", "--n", "2", "--format", "json"]);
    let par = twirl(&[
        "verify",
        "all",
        "--p",
        "3",
        "--n",
        "2",
        "--format",
        "json",
        "--threads",
        "4",
    ]);
    assert_eq!(seq.status.code(), Some(0));
    assert_eq!(seq.stdout, par.stdout);
}
