//! End-to-end checks of the command-line binary: exit codes, output
//! contract strings, and byte-level determinism of emitted traces.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn flpe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flpe"))
        .args(args)
        .env_remove("FLPE_CAP")
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let output = flpe(args);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", text(&output.stderr));
    text(&output.stdout)
}

fn exit_code(args: &[&str]) -> i32 {
    flpe(args).status.code().expect("no signal")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn arg(path: &Path) -> &str {
    path.to_str().unwrap()
}

// ---------------------------------------------------------------------- run

#[test]
fn run_writes_byte_identical_traces_for_the_same_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.trace");
    let b = dir.path().join("b.trace");
    run_ok(&["run", "--scenario", arg(&scenario("bridge-run.scn")), "--out", arg(&a)]);
    run_ok(&["run", "--scenario", arg(&scenario("bridge-run.scn")), "--out", arg(&b)]);

    let first = std::fs::read(&a).unwrap();
    assert!(!first.is_empty());
    assert_eq!(first, std::fs::read(&b).unwrap(), "same seed must give the same bytes");
    assert!(text(&first).starts_with("flpe-trace v1 "));
}

#[test]
fn run_honors_the_seed_override() {
    let trace = run_ok(&["run", "--scenario", arg(&scenario("guarded.scn")), "--seed", "11"]);
    assert!(trace.contains(" seed=11 "), "trace header must carry the override");
}

// ------------------------------------------------------------------- explore

#[test]
fn explore_reports_the_split_profile() {
    let report = run_ok(&["explore", "--scenario", arg(&scenario("flp-split.scn"))]);
    assert!(report.contains("explored initial="));
    assert!(report.contains("profile=(T,F,T)"), "one crash must split p1:\n{report}");
}

#[test]
fn explore_fault_free_is_all_good() {
    let report = run_ok(&["explore", "--scenario", arg(&scenario("fault-free.scn"))]);
    assert!(report.contains("profile=(T,T,T)"));
    assert!(!report.contains("profile=(T,F,T)"));
}

#[test]
fn explore_emits_csv_on_request() {
    let report = run_ok(&["explore", "--scenario", arg(&scenario("fault-free.scn")), "--format", "csv"]);
    assert!(report.starts_with("digest,depth,profile,decisions\n"));
}

// --------------------------------------------------------------------- sweep

#[test]
fn sweep_locates_the_phase_transition() {
    let report = run_ok(&["sweep", "--scenario", arg(&scenario("flp-split.scn"))]);
    assert!(report.contains("transition feature="), "missing transition line:\n{report}");
    assert!(report.contains(" at=1 "), "the split appears at one crash:\n{report}");
}

// ----------------------------------------------------------------- emergence

#[test]
fn emergence_add_oracle_recurs_one_level_up() {
    let report = run_ok(&[
        "emergence",
        "--scenario",
        arg(&scenario("oracle-emergence.scn")),
        "--transform",
        "add-oracle",
    ]);
    assert!(report.contains("RECURRED at level 1"), "got:\n{report}");
}

#[test]
fn emergence_padding_shifts_the_split_later() {
    let report =
        run_ok(&["emergence", "--scenario", arg(&scenario("flp-split.scn")), "--transform", "pad:2"]);
    assert!(report.contains("RECURRED, step index shifted +4"), "got:\n{report}");
}

// --------------------------------------------------------------------- logic

#[test]
fn logic_verdicts_follow_the_staircase() {
    assert_eq!(run_ok(&["logic", "--logic", "cpl", "--gamma", "A,~A"]), "cpl: TRIVIAL\n");
    assert_eq!(
        run_ok(&["logic", "--logic", "c1", "--gamma", "A,~A"]),
        "c1: inconsistent, non-trivial\n"
    );
    assert_eq!(run_ok(&["logic", "--logic", "mbc", "--gamma", "A,~A,oA"]), "mbc: TRIVIAL\n");
    assert_eq!(run_ok(&["logic", "--logic", "mbc", "--gamma", "A"]), "mbc: consistent\n");
}

#[test]
fn logic_answers_entailment_queries() {
    let out = run_ok(&["logic", "--logic", "cpl", "--gamma", "A", "--goal", "A | B"]);
    assert_eq!(out, "ENTAILS\n");
    let out = run_ok(&["logic", "--logic", "cpl", "--gamma", "A", "--goal", "B"]);
    assert!(out.starts_with("COUNTEREXAMPLE "), "got:\n{out}");
}

// -------------------------------------------------------------------- bridge

#[test]
fn bridge_reads_a_split_trace_classically_and_paraconsistently() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("split.trace");
    run_ok(&["run", "--scenario", arg(&scenario("bridge-run.scn")), "--out", arg(&trace)]);

    let report = run_ok(&["bridge", "--trace", arg(&trace)]);
    assert!(report.starts_with("outcome: "), "got:\n{report}");
    assert!(report.contains("CPL: TRIVIAL"), "got:\n{report}");
    assert!(report.contains("mbc: inconsistent, non-trivial"), "got:\n{report}");
}

// ---------------------------------------------------------------- exit codes

#[test]
fn bad_input_exits_2() {
    assert_eq!(exit_code(&["logic", "--logic", "k9", "--gamma", "A"]), 2);
    assert_eq!(exit_code(&["run", "--scenario", "no-such-file.scn"]), 2);
    assert_eq!(exit_code(&["logic", "--logic", "cpl", "--gamma", "A &"]), 2);
}

#[test]
fn failed_preconditions_exit_3() {
    // The split scenario declares the exhaustive adversary: it cannot `run`.
    assert_eq!(exit_code(&["run", "--scenario", arg(&scenario("flp-split.scn"))]), 3);
}

#[test]
fn exhausted_resource_caps_exit_4() {
    let output = Command::new(env!("CARGO_BIN_EXE_flpe"))
        .args(["explore", "--scenario", arg(&scenario("flp-split.scn"))])
        .env("FLPE_CAP", "40")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4), "stderr: {}", text(&output.stderr));
    // The partial report is still emitted before the failure is signalled.
    assert!(text(&output.stdout).contains("partial=true"));
}

#[test]
fn malformed_cap_env_exits_2() {
    let output = Command::new(env!("CARGO_BIN_EXE_flpe"))
        .args(["explore", "--scenario", arg(&scenario("fault-free.scn"))])
        .env("FLPE_CAP", "plenty")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}
