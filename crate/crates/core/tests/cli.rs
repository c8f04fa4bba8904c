use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"{
  "trials": 3,
  "bmo": { "sizes": [2, 4], "trials": 3 },
  "lipschitz": { "sizes": [2, 4] },
  "logn": { "sizes": [4, 8], "trials": 2 }
}"#;

fn ncbmo(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ncbmo"));
    cmd.args(args).env_remove("NCBMO_OUT");
    if let Some(dir) = out_env {
        cmd.env("NCBMO_OUT", dir);
    }
    cmd.output().unwrap()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.json");
    std::fs::write(&path, SMALL).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn bench_writes_reports_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("out");
    let res = ncbmo(&["--config", &cfg, "--out", out.to_str().unwrap(), "bench", "lipschitz"], None);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.starts_with("experiment,n,p,trial,ratio,normalized_constant,bound,pass"));
    assert!(csv.contains("lipschitz_difference"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], serde_json::Value::Bool(true));
}

#[test]
fn zero_cap_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("out");
    let res = ncbmo(
        &["--config", &cfg, "--out", out.to_str().unwrap(), "--cap-bmo", "0", "bench", "bmo"],
        None,
    );
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("bmo"));
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ \"trials\": ").unwrap();
    let res = ncbmo(&["--config", path.to_str().unwrap(), "show-config"], None);
    assert_eq!(res.status.code(), Some(2));

    std::fs::write(&path, "{ \"no_such_key\": 1 }").unwrap();
    let res = ncbmo(&["--config", path.to_str().unwrap(), "show-config"], None);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_exits_two() {
    let res = ncbmo(&["frobnicate"], None);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn environment_sets_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let env_out = dir.path().join("from-env");
    let res = ncbmo(&["--config", &cfg, "bench", "logn"], Some(&env_out));
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(env_out.join("report.csv").exists());

    let flag_out = dir.path().join("from-flag");
    let res = ncbmo(
        &["--config", &cfg, "--out", flag_out.to_str().unwrap(), "bench", "logn"],
        Some(&env_out.join("unused")),
    );
    assert_eq!(res.status.code(), Some(0));
    assert!(flag_out.join("report.csv").exists());
    assert!(!env_out.join("unused").exists());
}

#[test]
fn show_config_reflects_overrides() {
    let res = ncbmo(&["--seed", "7", "--cap-logn", "3.5", "show-config"], None);
    assert_eq!(res.status.code(), Some(0));
    let cfg: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(cfg["seed"], 7);
    assert_eq!(cfg["caps"]["logn"], 3.5);
    assert_eq!(cfg["p_grid"].as_array().unwrap().last().unwrap(), "inf");
}
