use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn mmwb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmwb")).current_dir(root()).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn run_halts_on_even_input() {
    let o = mmwb(&["run", "machines/exa.mm", "--config", "1;2,0", "--fuel", "100"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("outcome: halted\n"), "{out}");
    assert!(out.contains("final: (0;0,0)\n"));
    assert!(out.contains("steps: 3\n"));
    assert!(out.ends_with("status: ok\n"));
}

#[test]
fn fuel_exhaustion_exits_3() {
    let o = mmwb(&["run", "machines/exa.mm", "--config", "1;1,0", "--fuel", "50"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("status: fuel-exhausted\n"));
    let o = mmwb(&["decide", "machines/exa.mm", "--variant", "s1", "--u", "1;1,0", "--v", "0", "--fuel", "500"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&mmwb(&["run", "machines/exa.mm"])), 2);
    assert_eq!(code(&mmwb(&["run", "machines/missing.mm", "--config", "1;0,0"])), 2);
    assert_eq!(code(&mmwb(&["emit", "s9", "machines/exa.mm"])), 2);
    assert_eq!(code(&mmwb(&["identity-eval", "--semigroup", "Q", "--identity", "xy=yx"])), 2);
    let o = mmwb(&["run", "machines/exa.mm", "--config", "1;a,0"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("status: usage-error\n"));
}

#[test]
fn broken_simulation_exits_1() {
    let m = scratch("sub2.mm");
    fs::write(&m, "machine sub2 glasses=2\n1: inc g2 goto 2\n2: if g2>0 dec g2 goto 2\n2: if g2=0 goto 0\n").unwrap();
    let m = m.to_str().unwrap();
    assert_eq!(code(&mmwb(&["conway-verify", m, "--m", "0..3"])), 0);
    assert_eq!(code(&mmwb(&["conway-verify", m, "--m", "0..3", "--literal-sub2"])), 1);
}

#[test]
fn emitted_files_match_golden() {
    let golden = root().join("crates/core/tests/golden");
    for (variant, machine, file) in [("s1", "exa", "exa_s1"), ("s2r", "exc", "exc_s2r"), ("amalgam", "exa", "exa_amalgam")] {
        let out = scratch(&format!("{file}.txt"));
        let o = mmwb(&["emit", variant, &format!("machines/{machine}.mm"), "-o", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        assert!(stdout(&o).contains("output: "));
        assert_eq!(fs::read_to_string(&out).unwrap(), fs::read_to_string(golden.join(format!("{file}.txt"))).unwrap());
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cases: [&[&str]; 4] = [
        &["decide", "machines/exa.mm", "--variant", "amalgam", "--u", "1;2,1", "--v", "2;1,1", "--confluence", "4", "--seed", "9"],
        &["quotient", "machines/exc.mm", "--variant", "s1p", "--word", "C A1 q1 A2", "--quasi-identity", "1;0,0"],
        &["conway-verify", "machines/exa.mm", "--m", "0..8"],
        &["variety-check", "crates/cli/tests/data/squares.txt"],
    ];
    for args in cases {
        let a = mmwb(args);
        let b = mmwb(args);
        assert_eq!(code(&a), 0, "{}", stdout(&a));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn conway_verify_agrees_on_ex_a() {
    let o = mmwb(&["conway-verify", "machines/exa.mm", "--m", "0..8", "--fuel", "100000"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("agree: 9\n") && out.contains("disagree: 0\n"), "{out}");
    let o = mmwb(&["conway-run", "machines/exa.mm", "--m", "2"]);
    assert!(stdout(&o).ends_with("--\n28\n22\n7\n5\n1\n# reached_one: true s: 4 max: 28\n"));
}

#[test]
fn quotient_reports_failed_quasi_identity() {
    let o = mmwb(&["quotient", "machines/exc.mm", "--variant", "s1p", "--word", "C A1 q1 A2", "--quasi-identity", "1;0,0"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("word_nonzero: true\n"));
    assert!(out.contains("quasi_identity: false\n"));
    assert!(out.contains("satisfies x^2 y^2 = y^2 x^2: true\n"));
}

#[test]
fn table_round_trip_through_identity_eval() {
    let table = scratch("rees.txt");
    let o = mmwb(&["rees-matrix", "--group", "Z2", "--sandwich", "1 0;0 1", "-o", table.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("zero_simple: true\n"));
    let o = mmwb(&["identity-eval", "--semigroup", table.to_str().unwrap(), "--identity", "x^2 y^2 = y^2 x^2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("order: 9\n"));
}

#[test]
fn isoterm_and_zimin() {
    let o = mmwb(&["isoterm", "--word", "ababbab", "--identity", "x^2=x^3"]);
    assert!(stdout(&o).contains("isoterm: false\n"));
    let o = mmwb(&["isoterm", "--word", "ababbab", "--identity", "x^3=x^4"]);
    assert!(stdout(&o).contains("isoterm: true\n"));
    let o = mmwb(&["zimin", "--n", "3"]);
    assert!(stdout(&o).ends_with("--\nx1 x2 x1 x3 x1 x2 x1\n"));
}

#[test]
fn split_system_of_an_extension() {
    let o = mmwb(&["split-system", "crates/cli/tests/data/z3_no_squares.txt", "--extensions"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("extensions: 1\n") && out.contains("nilpotency_degree=4\n"), "{out}");
    // without extending, the partial group itself gives a non-associative table
    assert_eq!(code(&mmwb(&["split-system", "crates/cli/tests/data/z3_no_squares.txt"])), 2);
}
