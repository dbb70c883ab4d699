use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypermis"))
}

fn run(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = bin().args(args).current_dir(dir).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn gen_run_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (code, _, err) = run(&["gen", "--family", "random", "--n", "12", "--m", "15", "--dmax", "4", "--seed", "3", "-o", "h.hgr"], d);
    assert_eq!(code, 0, "{err}");
    let (code, out, err) = run(
        &["run", "--algo", "kuw-sqrt", "--repr", "vc", "--regime", "congest", "--input", "h.hgr", "--seed", "1", "--trials", "3", "--out", "r.json", "--csv", "r.csv"],
        d,
    );
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("3 runs, 3 passed"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    let entries = json.as_array().unwrap();
    assert_eq!(entries.len(), 3);
    assert_eq!(entries[0]["verdict"], true);
    assert_eq!(entries[0]["representation"], "vc");
    let set: Vec<String> = entries[0]["output"].as_array().unwrap().iter().map(|v| v.to_string()).collect();
    assert!(!set.is_empty());
    std::fs::write(d.join("cand.txt"), set.join(" ")).unwrap();
    let (code, out, _) = run(&["verify", "--input", "h.hgr", "--candidate", "cand.txt", "--check", "mis"], d);
    assert_eq!(code, 0);
    assert!(out.contains("\"pass\":true"));
    assert_eq!(std::fs::read_to_string(d.join("r.csv")).unwrap().lines().count(), 4);
}

#[test]
fn verify_rejects_bad_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("fig1.hgr"), "4 3\n3 1 2 3\n2 2 4\n2 3 4\n").unwrap();
    std::fs::write(d.join("bad.txt"), "1\n").unwrap();
    let (code, out, _) = run(&["verify", "--input", "fig1.hgr", "--candidate", "bad.txt", "--check", "mis"], d);
    assert_eq!(code, 1);
    assert!(out.contains("extendable"));
    std::fs::write(d.join("good.txt"), "1 2 3\n").unwrap();
    let (code, _, _) = run(&["verify", "--input", "fig1.hgr", "--candidate", "good.txt", "--check", "clique"], d);
    assert_eq!(code, 0);
}

#[test]
fn sweep_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("sweep.toml"),
        r#"algorithms = ["kuw-sqrt", "mcds", "coloring"]
representations = ["sc"]
regimes = ["congest", "local"]
trials = 2
json = "out.json"
csv = "out.csv"

[[generate]]
family = "connected"
n = 15
m = 20
seed = 4
"#,
    )
    .unwrap();
    let (code, out, err) = run(&["sweep", "--config", "sweep.toml"], d);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("12 runs, 12 passed"));
    let csv = std::fs::read_to_string(d.join("out.csv")).unwrap();
    assert!(csv.starts_with("fingerprint,instance,algorithm,"));
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&["gen", "--family", "random", "--n", "3", "--m", "2", "--dmax", "5", "-o", "x"], dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("infeasible"));
    let (code, _, _) = run(&["run", "--algo", "nope", "--input", "x"], dir.path());
    assert_ne!(code, 0);
}

#[test]
fn plain_graph_files_load() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("path.gr"), "4 3\n1 2\n2 3\n3 4\n").unwrap();
    let (code, out, err) = run(&["run", "--algo", "mcds", "--input", "path.gr", "--out", "r.json"], d);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("1 runs, 1 passed"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(json[0]["output"], serde_json::json!([2, 3]));
}
