use std::path::Path;
use std::process::Command;

fn levyx() -> Command {
    Command::new(env!("CARGO_BIN_EXE_levyx"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const DUALITY: &str = r#"
experiment_name = "duality"
n_paths = 400
grid_step = 0.01
seed = 11
t = 1.0

[triplet]
drift = 0.0
gaussian = 0.5
"#;

#[test]
fn list_prints_the_registry() {
    let out = levyx().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 9);
    for name in ["duality", "wiener_hopf", "kesten", "williams1", "bismut"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn missing_config_exits_1() {
    let out = levyx().args(["run", "duality", "--config", "/nonexistent.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn malformed_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "experiment_name = \"duality\"\nn_paths = \"many\"\n");
    let out = levyx().args(["run", "duality", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_writes_report_and_samples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.toml", DUALITY);
    let out_dir = dir.path().join("out");
    let out = levyx()
        .args(["run", "duality", "--seed", "12", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    let code = out.status.code().unwrap();
    assert!(code == 0 || code == 2, "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(out_dir.join("report_duality_12.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["experiment_name"], "duality");
    assert_eq!(v["seeds"][0], 12);
    let want = match v["verdict"].as_str().unwrap() {
        "pass" => 0,
        "fail" => 1,
        _ => 2,
    };
    assert_eq!(code, want);
    assert!(out_dir.join("samples_reversed.csv").exists());
}

#[test]
fn name_must_match_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.toml", DUALITY);
    let out = levyx().args(["run", "kesten", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_dumps_paths_and_excursions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.toml",
        &DUALITY.replace("\"duality\"", "\"simulate\"").replace("n_paths = 400", "n_paths = 100"),
    );
    let out_dir = dir.path().join("dump");
    let out = levyx().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut paths = csv::Reader::from_path(out_dir.join("paths.csv")).unwrap();
    assert_eq!(paths.headers().unwrap(), vec!["path_id", "time", "value", "jump"]);
    assert_eq!(paths.records().count(), 100 * 101);
    let mut exc = csv::Reader::from_path(out_dir.join("excursions.csv")).unwrap();
    assert!(exc.records().count() > 100);
}
