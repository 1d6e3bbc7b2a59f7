use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dimacheck::report::{AnalysisReport, RowVerdict};

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn dimacheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dimacheck")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn model(name: &str) -> String {
    models().join(name).to_string_lossy().into_owned()
}

const SENDER: &str = r#"
[[automaton]]
name = "sender"
clocks = ["x"]
actions = [{ name = "a", kind = "broadcast", dir = "output" }]

[[automaton.locations]]
name = "idle"
invariant = "x <= 4"

[[automaton.edges]]
from = "idle"
to = "idle"
guard = "x >= 2"
sync = "a!"
update = "x := 0"
"#;

const EAGER: &str = r#"
[[automaton]]
name = "eager"
clocks = ["x"]
actions = [{ name = "a", kind = "broadcast", dir = "output" }]

[[automaton.locations]]
name = "idle"
invariant = "x <= 4"

[[automaton.edges]]
from = "idle"
to = "idle"
guard = "x >= 3"
sync = "a!"
update = "x := 0"
"#;

const EXTRA: &str = r#"
[[automaton]]
name = "extra"
actions = [{ name = "z", kind = "broadcast", dir = "output" }]

[[automaton.locations]]
name = "idle"
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn case1_report_round_trips_and_flags_p3() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("case1.jsonl");
    let out = dimacheck(&[
        "check-system",
        &model("dima-case1"),
        "--format",
        "structured",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    let report = AnalysisReport::from_jsonl(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let cells: Vec<&str> = report.rows.iter().map(|r| r.verdict.as_cell()).collect();
    assert_eq!(cells, ["Yes", "Yes", "No", "Yes", "Yes"]);
    assert!(!report.is_schedulable());
    assert!(report.row("P3").unwrap().violation.as_deref().unwrap().contains("Msg2"));
}

#[test]
fn case2_is_schedulable() {
    let out = dimacheck(&["check-system", &model("dima-case2")]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let table = stdout(&out);
    assert!(table.contains("schedulable"), "{table}");
    assert!(!table.contains(" No "), "{table}");
}

#[test]
fn partition_p3_of_case1_prints_its_trace() {
    let out = dimacheck(&["check-partition", &model("dima-case1"), "--partition", "P3"]);
    assert_eq!(code(&out), 2);
    let text = stdout(&out);
    assert!(text.contains("refresh violation"), "{text}");
    assert!(text.contains("Msg2"), "{text}");
    assert!(text.contains("nav_in"), "{text}");
}

#[test]
fn unknown_partition_is_a_usage_error() {
    let out = dimacheck(&["check-partition", &model("dima-case1"), "--partition", "P9"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn missing_input_is_a_usage_error() {
    let out = dimacheck(&["validate", "/nonexistent/model.toml"]);
    assert_eq!(code(&out), 1);
    assert!(!out.stderr.is_empty());
}

#[test]
fn zero_quantum_is_rejected() {
    let out = dimacheck(&["validate", &model("dima-case1"), "--quantum", "0"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn validate_summarises_a_system() {
    let out = dimacheck(&["validate", &model("dima-case1")]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("5 partitions"), "{text}");
    assert!(text.contains("22 tasks"), "{text}");
}

#[test]
fn validate_rejects_undeclared_clock() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", &SENDER.replace("clocks = [\"x\"]", "clocks = []"));
    let out = dimacheck(&["validate", &bad]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("x"));
}

#[test]
fn simulation_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let sender = write(dir.path(), "sender.toml", SENDER);
    let eager = write(dir.path(), "eager.toml", EAGER);
    let extra = write(dir.path(), "extra.toml", EXTRA);

    let same = dimacheck(&["check-simulation", &sender, &sender]);
    assert_eq!(code(&same), 0, "{}", stdout(&same));
    assert!(stdout(&same).contains("simulation holds"));

    // the concrete side may emit at 2, its abstraction only from 3 on
    let fails = dimacheck(&["check-simulation", &sender, &eager]);
    assert_eq!(code(&fails), 2);
    assert!(stdout(&fails).contains("clause-2-output"), "{}", stdout(&fails));

    let alphabet = dimacheck(&["check-simulation", &sender, &extra]);
    assert_eq!(code(&alphabet), 3);
}

#[test]
fn simulation_structured_output() {
    let dir = tempfile::tempdir().unwrap();
    let sender = write(dir.path(), "sender.toml", SENDER);
    let out = dimacheck(&["check-simulation", &sender, &sender, "--format", "structured"]);
    assert_eq!(code(&out), 0);
    let lines: Vec<serde_json::Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines[0].get("version").is_some());
    assert_eq!(lines[1]["record"], "simulation");
    assert_eq!(lines[1]["holds"], true);
}

#[test]
fn global_check_reports_exhausted_budget() {
    let out = dimacheck(&["check-global", &model("dima-case1-reduced"), "--max-states", "1000"]);
    assert_eq!(code(&out), 4, "{}", stdout(&out));
}

#[test]
fn global_check_scoped_to_p3_finds_the_violation() {
    let out = dimacheck(&[
        "check-global",
        &model("dima-case1-reduced"),
        "--partition",
        "P3",
        "--format",
        "structured",
    ]);
    assert_eq!(code(&out), 2);
    let global = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .find(|v| v["record"] == "global")
        .expect("global record");
    let result: dimacheck::report::GlobalResult = serde_json::from_value(global["result"].clone()).unwrap();
    assert_eq!(result.verdict, RowVerdict::Unsafe);
    assert!(result.violation.unwrap().contains("Msg2"));
}

#[test]
fn interfaces_of_case2_are_certified() {
    let out = dimacheck(&["synthesize-interfaces", &model("dima-case2")]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    for msg in ["Msg1", "Msg2", "Msg3", "Msg4"] {
        assert!(text.contains(msg), "{text}");
    }
}
