use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn efem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_efem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.ini");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const LAPLACE: &str = "\
[run]
mode = solve
output = out

[mesh]
geometry = rectangle
nx = 8
ny = 8

[materials]
conductor_beta = 0
conductor_vx = 0
";

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/summary.json")).unwrap()).unwrap()
}

#[test]
fn laplace_solve_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LAPLACE);
    let out = efem(&["run", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s = summary(dir.path());
    assert_eq!(s["mode"], "solve");
    assert_eq!(s["dofs"], 162);
    assert!(s["newton"]["final_norm"].as_f64().unwrap() <= 1e-10);
    for f in ["solution.csv", "solution.vtk", "convergence.csv"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
    let vtk = fs::read_to_string(dir.path().join("out/solution.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile"));
}

#[test]
fn missing_mode_section_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[run]\nmode = uq\n");
    let out = efem(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[uq]"), "{err}");
}

#[test]
fn unknown_parameter_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[run]\nmode = continuation\n[continuation]\nparameter = Gamma\n",
    );
    let out = efem(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Gamma"));
}

#[test]
fn solver_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[run]\noutput = out\n[mesh]\nny = 4\nnx_conductor = 4\nnx_pad = 1\nnx_slider = 3\n",
    );
    let out = efem(&["run", &cfg, "solver.max_iters=1"]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical failure"));
    // the summary still records what happened
    assert!(summary(dir.path())["failure"].is_string());
}

#[test]
fn identical_runs_give_identical_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LAPLACE);
    let mut seen = Vec::new();
    for _ in 0..2 {
        assert_eq!(
            efem(&["run", &cfg, "materials.conductor_beta=0.3"])
                .status
                .code(),
            Some(0)
        );
        seen.push(fs::read(dir.path().join("out/summary.json")).unwrap());
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn overrides_take_effect() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LAPLACE);
    assert_eq!(
        efem(&["run", &cfg, "mesh.nx=4", "mesh.ny=4"]).status.code(),
        Some(0)
    );
    assert_eq!(summary(dir.path())["dofs"], 50);
    assert_eq!(efem(&["run", &cfg, "mesh.bogus=1"]).status.code(), Some(2));
}

#[test]
fn dump_graph_writes_every_type() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LAPLACE);
    assert_eq!(efem(&["run", &cfg, "--dump-graph"]).status.code(), Some(0));
    let names: Vec<String> = fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("graph_"))
        .collect();
    assert_eq!(names.len(), 12, "{names:?}");
    let dot = fs::read_to_string(dir.path().join("out/graph_Jacobian.dot")).unwrap();
    assert!(dot.starts_with("digraph"));
}

#[test]
fn help_lists_keys_and_version_prints() {
    let out = efem(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for key in [
        "abs_tol",
        "sweep_points",
        "nisp_order",
        "conductor_sigma0",
        "mms_sizes",
    ] {
        assert!(text.contains(key), "{key}");
    }
    let out = efem(&["--version"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
}
