use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ineq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ineq"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn temp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("ineq-cli-{}-{name}", std::process::id()))
}

#[test]
fn proves_with_exit_zero() {
    let o = ineq(&["prove", "corpus/p02.poly"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("proved\nrounds="));
}

#[test]
fn split_depth_changes_the_verdict() {
    let o = ineq(&["prove", "corpus/p15.poly"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("unknown_saturated"));
    let o = ineq(&["prove", "corpus/p15.poly", "--split-depth", "2"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(ineq(&["prove", "missing.poly"]).status.code(), Some(2));
    let bad = temp("bad.poly");
    std::fs::write(&bad, "hyp x^(y) > 1\n").unwrap();
    let o = ineq(&["prove", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("input_error"));
    assert_eq!(
        ineq(&["prove", "corpus/p02.poly", "--modules", "nope"])
            .status
            .code(),
        Some(2)
    );
    std::fs::remove_file(bad).unwrap();
}

#[test]
fn modules_can_be_disabled() {
    let o = ineq(&["prove", "corpus/p02.poly", "--modules", "additive"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ineq(&[
        "prove",
        "corpus/p02.poly",
        "--modules",
        "additive,multiplicative",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn round_cap_is_reported() {
    let o = ineq(&["prove", "corpus/square.poly", "--max-rounds", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("unknown_resource\nrounds=3 "));
}

#[test]
fn trace_is_written_and_checked() {
    let path = temp("p13.trace");
    let o = ineq(&[
        "prove",
        "corpus/p13.poly",
        "--trace",
        path.to_str().unwrap(),
        "--check-trace",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("trace accepted"));
    let t = std::fs::read_to_string(&path).unwrap();
    assert!(t.starts_with("trace 1\n"));
    assert!(t.lines().any(|l| l.starts_with("contradiction ")));
    std::fs::remove_file(path).unwrap();
}

#[test]
fn corpus_report() {
    let dir = temp("corpus");
    std::fs::create_dir_all(&dir).unwrap();
    for f in ["p02.poly", "p15.poly", "xy.poly"] {
        std::fs::copy(
            Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(f),
            dir.join(f),
        )
        .unwrap();
    }
    let o = ineq(&["corpus", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "id,verdict,rounds,splits,time_ms");
    assert!(lines[1].starts_with("p02,proved,"));
    assert!(lines[2].starts_with("p15,unknown_saturated,"));
    assert!(lines[3].starts_with("xy,proved,"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("3 problems, 3 annotated, 3 as expected"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn empty_corpus() {
    let dir = temp("empty");
    std::fs::create_dir_all(&dir).unwrap();
    let o = ineq(&["corpus", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "id,verdict,rounds,splits,time_ms\n");
    std::fs::remove_dir_all(dir).unwrap();
}
