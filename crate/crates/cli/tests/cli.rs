use std::process::{Command, Output};

fn oscspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oscspec"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn classify_reports_branch_and_threshold() {
    let o = oscspec(&[
        "classify", "--lambda", "1.2", "--alpha", "2", "--beta", "0", "--dim", "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("verdict = Finite"), "{s}");
    assert!(s.contains("critical coupling = 1.414213562373"), "{s}");
}

#[test]
fn count_hydrogen() {
    let o = oscspec(&[
        "count",
        "--coulomb",
        "1",
        "--lambda",
        "0",
        "--energy",
        "0.01",
        "--method",
        "both",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(s.matches("       30       30       30").count(), 2, "{s}");
}

#[test]
fn config_file_with_flag_override_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let csv = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        "lambda = 0\nbeta = -1\nenergies = 1e-4:1e-2:3\nmethod = oracle\n",
    )
    .unwrap();
    let o = oscspec(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--lambda",
        "5",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "E,abs_ln_E,l,Lambda,multiplicity,count,count_lo,count_hi,method,seconds"
    );
    let first = lines.next().unwrap();
    assert!(
        first.starts_with("1e-2,") && first.contains(",-1,") && first.ends_with(",oracle,0e0"),
        "{first}"
    );
    assert!(stdout(&o).contains("V(r) = 5 r^-1"));
}

#[test]
fn compare_random_suite() {
    let o = oscspec(&[
        "compare",
        "--instances",
        "5",
        "--seed",
        "3",
        "--energy",
        "1e-3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("agreement: 5/5 exact"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn eigs_and_hardy_run() {
    let o = oscspec(&[
        "eigs", "--lambda", "5", "--beta", "-1", "--k", "12", "--k-min", "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("decay fit over k = 3..12"));
    let o = oscspec(&["hardy", "--lambda", "1", "--alpha", "1", "--beta", "-1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("kats-krein constant = 4.0"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn exit_codes() {
    assert_eq!(
        oscspec(&["count", "--lambda", "abc"]).status.code(),
        Some(1)
    );
    assert_eq!(oscspec(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        oscspec(&["count", "--config", "/nonexistent/cfg"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(oscspec(&["--help"]).status.code(), Some(0));
    let o = oscspec(&[
        "sweep", "--lambda", "1", "--beta", "0.5", "--energy", "1e-3",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
