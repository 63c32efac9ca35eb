use mixvol_cli::ReportFile;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mixvol"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SQUARE: &str = r#"{"dim": 2, "vertices": [["0","0"],["1","0"],["0","1"],["1","1"]]}"#;
const CUBE: &str = r#"{"dim": 3, "vertices": [["0","0","0"],["1","0","0"],["0","1","0"],["0","0","1"],["1","1","0"],["1","0","1"],["0","1","1"],["1","1","1"],["1/2","1/2","1/2"]]}"#;

fn report(out: &Path) -> ReportFile {
    serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap()
}

#[test]
fn compute_planar_squares() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", SQUARE);
    let b = write(dir.path(), "b.json", r#"{"dim": 2, "vertices": [["0","0"],["1","0"]]}"#);
    let out = dir.path().join("r.json");
    let st = bin().args(["compute", "--bodies"]).arg(&a).arg(&b).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.command, "compute");
    assert_eq!(r.exact["mixed_volume"], "1/2");
    assert_eq!(r.results["mixed_volume"], "1/2");
    assert!((r.decimal["mixed_volume"] - 0.5).abs() < 1e-12);
}

#[test]
fn tilde_cubes_is_one_fifteenth() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t.json", &format!("[{CUBE}, {CUBE}]"));
    let out = dir.path().join("r.json");
    let st = bin().args(["tilde", "--partition", "1,1,1", "--tuples"]).args([&t, &t, &t]).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert_eq!(report(&out).exact["tilde_mixed_volume"], "1/15");
}

#[test]
fn tilde_accepts_single_body_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", SQUARE);
    let out = dir.path().join("r.json");
    let st = bin().args(["tilde", "--partition", "1,1", "--tuples"]).args([&a, &a]).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert_eq!(report(&out).exact["tilde_mixed_volume"], "1");
}

#[test]
fn projbody_of_cubes() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "c.json", CUBE);
    let out = dir.path().join("r.json");
    let st = bin().args(["projbody", "--bodies"]).args([&c, &c]).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert_eq!(report(&out).exact["volume"], "8");
}

#[test]
fn val_operations() {
    let dir = tempfile::tempdir().unwrap();
    let g = format!(r#"{{"terms":[{{"coeff":"1","degree":2,"bodies":[{CUBE}]}}]}}"#);
    let spec = write(dir.path(), "s.json", &format!(r#"{{"operands":[{g},{g}],"evaluate_at":{CUBE}}}"#));
    let out = dir.path().join("r.json");
    let st = bin().args(["val", "--op", "convolve", "--spec"]).arg(&spec).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.exact["value.re"], "2/3");
    assert_eq!(r.results["valuation"]["terms"][0]["degree"], 1);

    let h = format!(r#"{{"terms":[{{"coeff":"1","degree":1,"bodies":[{CUBE},{CUBE}]}}]}}"#);
    let spec = write(dir.path(), "p.json", &format!(r#"{{"operands":[{h},{h},{h}]}}"#));
    let st = bin().args(["val", "--op", "product", "--spec"]).arg(&spec).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert_eq!(report(&out).exact["volume_coefficient.re"], "2/9");

    let spec = write(dir.path(), "g.json", &format!(r#"{{"operands":[{h}],"evaluate_at":{CUBE}}}"#));
    let st = bin().args(["val", "--op", "sigma", "--spec"]).arg(&spec).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert_eq!(report(&out).exact["value.re"], "-1");
}

#[test]
fn verify_daf_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let st = bin().args(["verify", "daf", "--seed", "7", "--count", "10", "--m", "2", "--out"]).arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.results["violations"], 0);
    assert_eq!(r.seed, Some(7));
}

#[test]
fn verify_reports_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o1 = dir.path().join("1.json");
    let o2 = dir.path().join("2.json");
    assert_eq!(bin().args(["verify", "af", "--seed", "3", "--count", "20", "--threads", "1", "--out"]).arg(&o1).status().unwrap().code(), Some(0));
    assert_eq!(
        bin().env("MIXVOL_THREADS", "2").args(["verify", "af", "--seed", "3", "--count", "20", "--out"]).arg(&o2).status().unwrap().code(),
        Some(0)
    );
    let mut r1 = report(&o1);
    let mut r2 = report(&o2);
    for r in [&mut r1, &mut r2] {
        r.runtime_ms = 0;
        r.results.as_object_mut().unwrap().remove("runtime_ms");
    }
    assert_eq!(r1, r2);
}

#[test]
fn sphere_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    for check in ["kernel", "hr", "selfadjoint", "diagram"] {
        let st = bin().args(["sphere", "--check", check, "--L", "6", "--count", "3", "--out"]).arg(&out).status().unwrap();
        assert_eq!(st.code(), Some(0), "{check}");
        assert_eq!(report(&out).results["passed"], true);
    }
}

#[test]
fn errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let simplex = write(dir.path(), "s.json", r#"{"dim": 2, "symmetric": true, "vertices": [["0","0"],["1","0"],["0","1"]]}"#);
    let bad = write(dir.path(), "b.json", r#"{"dim": 2, "vertices": [["0.5","0"]]}"#);
    let sq = write(dir.path(), "q.json", SQUARE);
    assert_eq!(bin().args(["compute", "--bodies"]).arg(&simplex).arg(&sq).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["compute", "--bodies"]).arg(&bad).arg(&sq).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["compute", "--bodies"]).arg(&sq).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["compute", "--frobnicate"]).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().arg("nonsense").output().unwrap().status.code(), Some(1));
    let help = bin().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("verify"));
}

#[test]
fn stdout_report_without_out() {
    let dir = tempfile::tempdir().unwrap();
    let sq = write(dir.path(), "q.json", SQUARE);
    let o = bin().args(["compute", "--bodies"]).arg(&sq).arg(&sq).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let r: ReportFile = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.exact["mixed_volume"], "1");
}
