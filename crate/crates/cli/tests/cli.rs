use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hyperbms::inference::{CompletionReport, Status};
use tempfile::TempDir;

const EXAMPLE: &str = include_str!("../../../data/example_5x5.tbl");
const GENERATOR: &str = "a^9*X1*X2^3 + a^6*X2^2";

fn hyperbms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperbms")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn detect_lists_the_window() {
    let dir = TempDir::new().unwrap();
    let table = write(&dir, "ex.tbl", EXAMPLE);
    let out = hyperbms(&["detect", s(&table)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).lines().any(|l| l == "tau=(0,1) t=2"));
}

#[test]
fn malformed_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let table = write(&dir, "bad.tbl", "# field p=2 m=4\n# shape 2 2\n0 a^1\nzz 0\n");
    for cmd in ["detect", "complete"] {
        assert_eq!(code(&hyperbms(&[cmd, s(&table)])), 2, "{cmd}");
    }
    assert_eq!(code(&hyperbms(&["complete", s(&dir.path().join("missing.tbl"))])), 2);
    let good = write(&dir, "ex.tbl", EXAMPLE);
    assert_eq!(code(&hyperbms(&["complete", s(&good), "--order", "sideways"])), 2);
    assert_eq!(code(&hyperbms(&["verify", s(&good), "X3"])), 2);
}

#[test]
fn complete_fills_the_example() {
    let dir = TempDir::new().unwrap();
    let table = write(&dir, "ex.tbl", EXAMPLE);
    let json = dir.path().join("report.json");
    let out = hyperbms(&["complete", s(&table), "--json", s(&json)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("status=Completed"), "{text}");
    assert!(text.contains(GENERATOR));
    assert_eq!(text.lines().skip(1).filter(|l| l.contains('*')).count(), 0);

    let report: CompletionReport = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report.status, Status::Completed);
    assert_eq!(report.filled.len(), 7);
    assert_eq!(report.exit_code(), 0);
}

#[test]
fn corrupted_cell_is_not_a_syndrome() {
    let dir = TempDir::new().unwrap();
    let table = write(&dir, "bad.tbl", &EXAMPLE.replace("* a^4 a^4", "* a^3 a^4"));
    let out = hyperbms(&["complete", s(&table)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).starts_with("status=NotSyndrome"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("attempt "));
}

#[test]
fn either_forced_order_completes_the_example() {
    let dir = TempDir::new().unwrap();
    let table = write(&dir, "ex.tbl", EXAMPLE);
    for order in ["lex", "graded"] {
        let out = hyperbms(&["complete", s(&table), "--order", order, "--tau", "0,1", "--t", "2"]);
        assert_eq!(code(&out), 0, "{order}");
        assert!(stdout(&out).contains(&format!("order={order}")));
    }
}

#[test]
fn verify_checks_offset_and_coefficients() {
    let dir = TempDir::new().unwrap();
    let table = write(&dir, "ex.tbl", EXAMPLE);
    let run = |poly: &str, tau: &str| code(&hyperbms(&["verify", s(&table), poly, "--tau", tau]));
    assert_eq!(run(GENERATOR, "0,1"), 0);
    assert_eq!(run(GENERATOR, "0,2"), 1);
    assert_eq!(run("a^8*X1*X2^3 + a^6*X2^2", "0,1"), 1);
}

#[test]
fn synth_round_trips_through_complete() {
    let dir = TempDir::new().unwrap();
    let table = dir.path().join("s.tbl");
    let out = hyperbms(&["synth", "--seed", "7", "--holes", "3", "-o", s(&table)]);
    assert_eq!(code(&out), 0);
    let truth: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("s.tbl.truth.json")).unwrap()).unwrap();
    assert_eq!(truth["holes"].as_array().unwrap().len(), 3);

    let out = hyperbms(&["complete", s(&table)]);
    assert_eq!(code(&out), 0);
    let grid: Vec<String> = stdout(&out).lines().skip(1).map(str::to_owned).collect();
    let expected: Vec<String> = truth["table"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_owned()).collect();
    assert_eq!(grid, expected);
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let paths: Vec<PathBuf> = ["a.tbl", "b.tbl"].iter().map(|n| dir.path().join(n)).collect();
    for p in &paths {
        assert_eq!(code(&hyperbms(&["synth", "--seed", "11", "--holes", "2", "--extension", "-o", s(p)])), 0);
    }
    assert_eq!(fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
    let other = dir.path().join("c.tbl");
    assert_eq!(code(&hyperbms(&["synth", "--seed", "12", "--holes", "2", "--extension", "-o", s(&other)])), 0);
    assert_ne!(fs::read(&paths[0]).unwrap(), fs::read(&other).unwrap());
}
