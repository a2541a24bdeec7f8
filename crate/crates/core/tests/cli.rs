use std::process::Command;

fn casekin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_casekin"));
    c.env("CASEKIN_THREADS", "1");
    c
}

#[test]
fn simulate_writes_requested_counts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sim.csv");
    let out = casekin()
        .args(["simulate", "--n1", "500", "--ratio", "1", "--relatives", "1", "--seed", "7", "--output"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ds = casekin::io::parse_csv(&csv).unwrap();
    assert_eq!((ds.len(), ds.n_relatives()), (1000, 1000));
    let truth = std::fs::read_to_string(dir.path().join("sim_truth.tsv")).unwrap();
    assert!(truth.contains("# fingerprint:") && truth.contains("t\tS_true"));
}

#[test]
fn estimate_on_empty_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "").unwrap();
    let out = casekin().args(["estimate", "--bandwidth", "0.5", "--input"]).arg(&csv).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("n1=0, n0=0"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn oracle_check_passes_at_default_grids() {
    let out = casekin().arg("oracle-check").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stderr);
    let err: f64 = text.split("= ").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!(err < 1e-3);
}

#[test]
fn estimate_table_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    assert!(casekin()
        .args(["simulate", "--n1", "200", "--seed", "3", "--output"])
        .arg(&csv)
        .status()
        .unwrap()
        .success());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let st = casekin()
            .args(["estimate", "--bandwidth", "auto", "--b-inner", "20", "--seed", "5", "--input"])
            .arg(&csv)
            .arg("--output")
            .arg(&out)
            .status()
            .unwrap();
        assert!(st.success());
        std::fs::read(out).unwrap()
    };
    let a = run("a.tsv");
    assert_eq!(a, run("b.tsv"));
    let text = String::from_utf8(a).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "t\tLambda_hat\tS_hat\tS_tilde\tnaive_km");
}

#[test]
fn unknown_frailty_is_rejected() {
    let out = casekin().args(["simulate", "--frailty", "lognormal"]).output().unwrap();
    assert!(!out.status.success());
}
