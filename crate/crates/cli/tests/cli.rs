use serde_json::Value;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const TREE: &str = "seed = 7\n\n[graph]\nfamily = \"tree\"\ndegree = 3\nradius = 8\n";

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn acgraph(args: &[&str], out: &Path, workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_acgraph"));
    cmd.args(args).arg("--out").arg(out).env_remove("ACGRAPH_OUTPUT_DIR").env_remove("ACGRAPH_WORKERS");
    if let Some(w) = workers {
        cmd.env("ACGRAPH_WORKERS", w);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn invalid_value_exits_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{TREE}\n[potential]\nc0 = 1.0\nc1 = -1.0\n"));
    let o = acgraph(&["solve", cfg.to_str().unwrap()], &dir.path().join("out"), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("run.toml:10:"), "{}", stderr(&o));
}

#[test]
fn empty_n_list_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{TREE}\n[pipeline]\nn_list = []\n"));
    let o = acgraph(&["solve", cfg.to_str().unwrap()], &dir.path().join("out"), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(":9:") && stderr(&o).contains("n_list is empty"), "{}", stderr(&o));
}

#[test]
fn unknown_key_exits_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{TREE}\n[solver]\nresidual_tol = 1e-10\nsweeps = 3\n"));
    let o = acgraph(&["solve", cfg.to_str().unwrap()], &dir.path().join("out"), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 10"), "{}", stderr(&o));
}

#[test]
fn generate_writes_graph_and_embedding() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TREE);
    let out = dir.path().join("out");
    let o = acgraph(&["generate", cfg.to_str().unwrap()], &out, None);
    assert!(o.status.success(), "{}", stderr(&o));
    let graph: Value = serde_json::from_str(&std::fs::read_to_string(out.join("generate/graph.json")).unwrap()).unwrap();
    // 1 + 3 (2^8 - 1) vertices
    assert_eq!(graph["vertex_count"], 766);
    assert_eq!(graph["edge_count"], 765);
    assert_eq!(graph["S"], 3);
    assert_eq!(graph["R_max"], 8);
    let edges = std::fs::read_to_string(out.join("generate/edges.csv")).unwrap();
    assert_eq!(edges.lines().count(), 766);
    assert!(edges.starts_with("u,v\n"));
    let embedding = std::fs::read_to_string(out.join("generate/embedding.csv")).unwrap();
    assert_eq!(embedding.lines().count(), 767);
}

#[test]
fn manifest_hash_matches_config_copy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TREE);
    let out = dir.path().join("out");
    assert!(acgraph(&["geometry", cfg.to_str().unwrap()], &out, None).status.success());
    let copy = std::fs::read(out.join("geometry/config.json")).unwrap();
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("geometry/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"], hex::encode(Sha256::digest(&copy)));
    assert_eq!(manifest["command"], "geometry");
    assert_eq!(manifest["seed"], 7);
    let files: Vec<&str> = manifest["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert_eq!(files, ["config.json", "geometry.json", "horizon.csv"]);
}

#[test]
fn solve_is_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TREE);
    let runs: Vec<PathBuf> = [("a", "1"), ("b", "4"), ("c", "4")]
        .iter()
        .map(|(name, w)| {
            let out = dir.path().join(name);
            let o = acgraph(&["solve", cfg.to_str().unwrap()], &out, Some(w));
            assert!(o.status.success(), "{}", stderr(&o));
            out.join("solve")
        })
        .collect();
    for file in ["exhaustion.csv", "deltas.csv", "field.csv", "probes.csv", "monitor.csv", "solve.json"] {
        let first = std::fs::read(runs[0].join(file)).unwrap();
        for r in &runs[1..] {
            assert_eq!(first, std::fs::read(r.join(file)).unwrap(), "{file} differs");
        }
    }
}

#[test]
fn verify_passes_on_default_tree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TREE);
    let out = dir.path().join("out");
    let o = acgraph(&["verify", cfg.to_str().unwrap()], &out, None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify/verify.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["passed"] == true), "{checks:?}");
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], true);
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TREE);
    let target = dir.path().join("env_out");
    let o = Command::new(env!("CARGO_BIN_EXE_acgraph"))
        .args(["generate", cfg.to_str().unwrap()])
        .env("ACGRAPH_OUTPUT_DIR", &target)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(target.join("generate/manifest.json").exists());
}

#[test]
fn formats_restrict_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{TREE}\n[output]\nformats = [\"csv\"]\n"));
    let out = dir.path().join("out");
    assert!(acgraph(&["generate", cfg.to_str().unwrap()], &out, None).status.success());
    assert!(out.join("generate/edges.csv").exists());
    assert!(!out.join("generate/graph.json").exists());
}
