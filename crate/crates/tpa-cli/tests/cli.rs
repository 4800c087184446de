use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(file: &str) -> String {
    root().join("scenarios").join(file).to_string_lossy().into_owned()
}

fn tpa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tpa")).args(args).env("NO_COLOR", "1").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn schema_valid(schema: &str, out: &Output) -> Value {
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schema").join(schema)).unwrap()).unwrap();
    let v: Value = serde_json::from_str(&stdout(out)).expect("stdout is json");
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
    v
}

#[test]
fn simulate_replays_the_relay_schedule() {
    let o = tpa(&["simulate", &scenario("brands_chaum.proto"), "--topology", &scenario("mafia-demo.topo"), "--schedule", &scenario("relay.sched")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "init clock 0");
    assert_eq!(lines[lines.len() - 2], "(verifier,1,4,$t3 ⊖ $t2 ≤ 2*d,2,6)");
    assert_eq!(lines[lines.len() - 1], "end clock 6 after 26 steps");
}

#[test]
fn simulate_json_matches_schema() {
    let o = tpa(&["simulate", "--scenario", "brands-chaum", "--topology", "mafia-demo", "--schedule", &scenario("relay.sched"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = schema_valid("simulate.schema.json", &o);
    assert_eq!(v["final_clock"], "6");
    assert_eq!(v["steps"], 26);
}

#[test]
fn simulate_without_topology_fails() {
    let o = tpa(&["simulate", &scenario("brands_chaum.proto")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("topology required"), "{}", stderr(&o));
}

#[test]
fn simulate_zero_steps_prints_the_initial_state() {
    let o = tpa(&["simulate", "--scenario", "brands-chaum", "--topology", "mafia-demo", "--max-steps", "0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = schema_valid("simulate.schema.json", &o);
    assert_eq!(v["trace"].as_array().unwrap().len(), 1);
    assert_eq!(v["trace"][0]["action"], "Init");
}

#[test]
fn bad_schedule_step_is_a_replay_error() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("bad.sched");
    std::fs::write(&sched, "new verifier\nrecv verifier 1 from prover 1\n").unwrap();
    let o = tpa(&["simulate", "--scenario", "brands-chaum", "--topology", "mafia-demo", "--schedule", sched.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("replay error"), "{}", stderr(&o));
}

#[test]
fn random_simulation_is_reproducible() {
    let args = ["simulate", "--scenario", "brands-chaum", "--topology", "mafia-demo", "--seed", "7", "--max-steps", "80", "--format", "json"];
    let a = tpa(&args);
    let b = tpa(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    schema_valid("simulate.schema.json", &a);
    let c = tpa(&["simulate", "--scenario", "brands-chaum", "--topology", "mafia-demo", "--seed", "8", "--max-steps", "80", "--format", "json"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn analyze_mafia_finds_nothing() {
    let o = tpa(&["analyze", "--scenario", "brands-chaum", "--pattern", "mafia"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = schema_valid("analyze.schema.json", &o);
    assert_eq!(v["verdict"], "no-attack");
}

#[test]
fn analyze_hijacking_reports_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("attack.constraints");
    let o = tpa(&["analyze", "--scenario", "brands-chaum", "--pattern", "hijacking", "--dump-constraints", dump.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let v = schema_valid("analyze.schema.json", &o);
    assert_eq!(v["verdict"], "attack-found");
    assert_eq!(v["realizable"], true);
    assert!(!v["witness"].as_object().unwrap().is_empty());
    let again = tpa(&["analyze", "--scenario", "brands-chaum", "--pattern", "hijacking"]);
    assert_eq!(o.stdout, again.stdout);
    let smt = tpa(&["export-smt", dump.to_str().unwrap()]);
    assert_eq!(smt.status.code(), Some(0), "{}", stderr(&smt));
    let script = stdout(&smt);
    assert!(script.starts_with("(set-logic QF_LRA)") && script.contains("(check-sat)"), "{script}");
}

#[test]
fn analyze_text_output_has_no_escapes_under_no_color() {
    let o = tpa(&["analyze", "--scenario", "brands-chaum", "--pattern", "hijacking", "--format", "text"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert!(text.starts_with("brands_chaum hijacking: attack-found"), "{text}");
    assert!(!text.contains('\x1b'));
}

#[test]
fn analyze_at_a_tiny_state_bound_is_inconclusive() {
    let o = tpa(&["analyze", "--scenario", "brands-chaum", "--pattern", "mafia", "--max-states", "10"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let v = schema_valid("analyze.schema.json", &o);
    assert_eq!(v["verdict"], "inconclusive");
    assert_eq!(v["bounds"]["states"], 10);
}

#[test]
fn analyze_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.attacks");
    std::fs::write(&bad, "attack broken { verifier : recv }").unwrap();
    let o = tpa(&["analyze", &scenario("brands_chaum.proto"), "--patterns", bad.to_str().unwrap(), "--pattern", "broken"]);
    assert_eq!(o.status.code(), Some(1));
    let o = tpa(&["analyze", "--scenario", "brands-chaum", "--pattern", "nonesuch"]);
    assert_eq!(o.status.code(), Some(1));
    let o = tpa(&["analyze", "--scenario", "brands-chaum", "--pattern", "mafia", "--max-steps", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = tpa(&["analyze", "--scenario", "no-such-scenario", "--pattern", "mafia"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn analyze_with_files_matches_the_scenario() {
    let o = tpa(&["analyze", &scenario("meadows_id.proto"), "--patterns", &scenario("meadows_id.attacks"), "--pattern", "hijacking"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let b = tpa(&["analyze", "--scenario", "meadows-id", "--pattern", "hijacking"]);
    assert_eq!(o.stdout, b.stdout);
}

#[test]
fn transform_prints_strands() {
    let o = tpa(&["transform", "--scenario", "brands-chaum", "--format", "strand", "--role", "verifier"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("(verifier): [ -(Commit @ A1 : t1' -> V : t1 ⊎ AS1)"), "{text}");
    assert!(text.contains("(t3 ⊖ t2 ≤ 2*d)"));
    let o = tpa(&["transform", "--scenario", "brands-chaum"]);
    assert_eq!(stdout(&o).lines().count(), 6);
}

#[test]
fn transform_of_an_empty_protocol_fails() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.proto");
    std::fs::write(&p, "protocol empty { theory xor ; }").unwrap();
    let o = tpa(&["transform", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn export_smt_of_out_of_range_is_the_pinned_script() {
    let want = std::fs::read_to_string(root().join("crates/tpa/tests/fixtures/out_of_range.smt2")).unwrap();
    let o = tpa(&["export-smt", &scenario("out_of_range.constraints")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), want);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out_of_range.smt2");
    let o = tpa(&["export-smt", &scenario("out_of_range.constraints"), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(out).unwrap(), want);
    let o = tpa(&["export-smt", "/nonexistent/file"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(tpa(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(tpa(&["analyze"]).status.code(), Some(1));
    assert_eq!(tpa(&["--help"]).status.code(), Some(0));
    assert_eq!(tpa(&["--version"]).status.code(), Some(0));
}
