use std::path::Path;
use std::process::{Command, Output};

const KDV: &str = r#"{
  "model": { "kind": "kdv" },
  "grid": { "n": [64] },
  "initial": "kdv_one_soliton",
  "schemes": ["lm-gauss2", "sav-cn"],
  "dt": 0.004,
  "t_final": 0.04,
  "ladder_depth": 2
}"#;

fn hamlag(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hamlag"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("HAMLAG_THREADS", t);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("cfg.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_owned()
}

#[test]
fn run_writes_one_series_per_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), KDV);
    let out = dir.path().join("out");
    let res = hamlag(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet"], None);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(res.stdout.is_empty());
    assert_eq!(header(&out.join("lm-gauss2.csv")), "step,t,energy,drift,lambda,iters,wall_ns");
    assert!(header(&out.join("sav-cn.csv")).contains("modified_drift"));
    let rows = std::fs::read_to_string(out.join("lm-gauss2.csv")).unwrap().lines().count();
    assert_eq!(rows, 11);
}

#[test]
fn scheme_flag_selects_one_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), KDV);
    let out = dir.path().join("out");
    let res = hamlag(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--scheme", "lm-gauss3"], None);
    assert!(res.status.success());
    let files: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files, ["lm-gauss3.csv"]);
    assert!(String::from_utf8_lossy(&res.stdout).contains("lm-gauss3"));
}

#[test]
fn converge_and_compare_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), KDV);
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    for sub in ["converge", "compare"] {
        let res = hamlag(&[sub, "--config", &cfg, "--out", out, "--quiet"], Some("1"));
        assert!(res.status.success(), "{sub}: {}", String::from_utf8_lossy(&res.stderr));
    }
    let conv = std::fs::read_to_string(Path::new(out).join("convergence.csv")).unwrap();
    assert_eq!(conv.lines().count(), 1 + 2 * 3);
    assert!(conv.starts_with("scheme,dt,error,order"));
    let cmp = std::fs::read_to_string(Path::new(out).join("comparison.csv")).unwrap();
    assert_eq!(cmp.lines().count(), 3);
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &KDV.replace("\"dt\"", "\"dtt\": 1, \"dt\""));
    let res = hamlag(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()], None);
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.starts_with("hamlag: error:") && err.contains("dtt"), "{err}");
}

#[test]
fn failed_step_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let text = KDV.replace(r#"["lm-gauss2", "sav-cn"]"#, r#"[{ "id": "gauss-fp3", "fp_max_sweeps": 1 }]"#);
    let cfg = write_config(dir.path(), &text);
    let res = hamlag(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("step 0"));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), KDV);
    let res = hamlag(&["converge", "--config", &cfg, "--out", dir.path().to_str().unwrap()], Some("zero"));
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("HAMLAG_THREADS"));
}

#[test]
fn selftest_passes_quietly() {
    let res = hamlag(&["selftest", "--quiet"], None);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stdout));
    assert!(res.stdout.is_empty());
}
