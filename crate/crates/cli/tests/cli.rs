use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use worldsheet::diagnostics::{summarize, time_slice_preimage, DEFAULT_TOL_CAUSAL};
use worldsheet::export::read_json;
use worldsheet::metric::MetricSelection;

const CIRCLE: &str = r#"
[metric]
kind = "minkowski"

[curve]
kind = "circle"
nodes = 128

[solver]
target_time = 2.0
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_worldsheet"));
    c.env_remove("WORLDSHEET_OUTPUT_DIR");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn minkowski_circle_passes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "run.toml", CIRCLE);
    let out = tmp.path().join("out");
    let o = run(&["run", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["surface.json", "surface.csv", "report.json", "diagnostics.json", "timing.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let report = json(&out.join("report.json"));
    assert_eq!(report["outcome"], "pass");
    assert_eq!(report["exit_code"], 0);
    let diag = json(&out.join("diagnostics.json"));
    assert_eq!(diag["summary"]["causal_violations"], 0);
    assert!(diag["summary"]["final_time"].as_f64().unwrap() >= 2.0);
    assert!(diag["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn relative_output_dir_follows_the_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "run.toml", &format!("{CIRCLE}\n[output]\ndir = \"res\"\nformats = [\"json\"]\n"));
    let o = run(&["run", cfg.to_str().unwrap(), "--target-time", "0.5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(tmp.path().join("res/surface.json").exists());
    assert!(!tmp.path().join("res/surface.csv").exists());
}

fn non_orthogonal_node_file(dir: &Path) -> PathBuf {
    let n = 16;
    let mut text = String::from("# x t y z vt vy vz\n");
    for j in 0..n {
        let x = std::f64::consts::TAU * j as f64 / n as f64;
        // velocity with a tangential part 0.3·k₀′
        text.push_str(&format!("{x} 0 {} {} 1 {} {}\n", x.sin(), x.cos(), 0.3 * x.cos(), -0.3 * x.sin()));
    }
    write(dir, "nodes.txt", &text);
    write(dir, "file.toml", "[metric]\nkind = \"minkowski\"\n\n[curve]\nfile = \"nodes.txt\"\n")
}

#[test]
fn non_orthogonal_data_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = non_orthogonal_node_file(tmp.path());
    let out = tmp.path().join("out");
    let o = run(&["run", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("not orthogonal"), "{}", stderr(&o));
    let report = json(&out.join("report.json"));
    assert_eq!(report["outcome"], "invariant-violation");
    assert!(!report["data_violations"].as_array().unwrap().is_empty());
    assert!(!out.join("surface.json").exists());

    let v = run(&["validate-only", cfg.to_str().unwrap()]);
    assert_eq!(code(&v), 2);
    assert!(String::from_utf8_lossy(&v.stdout).contains("violation"));

    // projecting the velocity repairs the data
    let v = run(&["validate-only", cfg.to_str().unwrap(), "--project-velocity"]);
    assert_eq!(code(&v), 0, "{}", String::from_utf8_lossy(&v.stdout));
}

#[test]
fn backward_run_reaches_the_past_slice() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "back.toml", CIRCLE);
    let out = tmp.path().join("out");
    let o = run(&[
        "run",
        cfg.to_str().unwrap(),
        "--mode",
        "backward",
        "--target-time",
        "-1.0",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = read_json(fs::File::open(out.join("surface.json")).unwrap()).unwrap();
    assert!(s.t(0) <= -1.0);
    assert_eq!(s.t(s.n_rows() - 1), 0.0);
    let g = time_slice_preimage(&s, -1.0).unwrap();
    assert!(g.lipschitz_defect <= 2.0 * s.h);
}

#[test]
fn config_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "bad.toml", &CIRCLE.replace("[metric]", "[metricc]"));
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("metricc"));

    let cfg = write(tmp.path(), "n100.toml", &CIRCLE.replace("nodes = 128", "nodes = 100"));
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("power of two"));

    assert_eq!(code(&run(&["run", "/nonexistent/run.toml"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn runs_are_byte_reproducible() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "flrw.toml", "[metric]\nkind = \"flrw\"\nscale_factor = \"exponential\"\nparameter = 0.1\n\n[curve]\nkind = \"circle\"\nnodes = 128\n\n[solver]\ntarget_time = 0.5\n");
    let dirs = ["a", "b"].map(|d| tmp.path().join(d));
    for d in &dirs {
        let o = run(&["run", cfg.to_str().unwrap(), "--output-dir", d.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for f in ["surface.json", "surface.csv", "diagnostics.json"] {
        assert_eq!(fs::read(dirs[0].join(f)).unwrap(), fs::read(dirs[1].join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn exported_surface_reproduces_diagnostics() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "flrw.toml", "[metric]\nkind = \"flrw\"\nscale_factor = \"exponential\"\nparameter = 0.1\n\n[curve]\nkind = \"circle\"\nnodes = 128\n\n[solver]\ntarget_time = 0.5\n");
    let out = tmp.path().join("out");
    let o = run(&["run", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = read_json(fs::File::open(out.join("surface.json")).unwrap()).unwrap();
    let m = MetricSelection::flrw(3, "exponential", 0.1).build().unwrap();
    let again = serde_json::to_value(summarize(m.as_ref(), &s, DEFAULT_TOL_CAUSAL).unwrap()).unwrap();
    assert_eq!(json(&out.join("diagnostics.json"))["summary"], again);
}

#[test]
fn convergence_study_shows_second_order() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "conv.toml",
        &format!(
            "{}\n[study]\nmode = \"convergence\"\nlevels = 3\noracle = \"minkowski-circle\"\n",
            CIRCLE.replace("nodes = 128", "nodes = 64").replace("2.0", "1.0")
        ),
    );
    let out = tmp.path().join("out");
    let o = run(&["study", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = fs::read_to_string(out.join("convergence.tsv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("nodes\th\terror\terror_order"));
    for line in &lines[2..] {
        let order: f64 = line.split('\t').nth(3).unwrap().parse().unwrap();
        assert!(order > 1.8, "{line}");
    }
    assert_eq!(json(&out.join("study.json"))["monotone"], true);

    // a study config is not a single run
    assert_eq!(code(&run(&["run", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap()])), 1);
}

#[test]
fn stability_study_scales_with_amplitude() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "stab.toml",
        "[metric]\nkind = \"flrw\"\nscale_factor = \"exponential\"\nparameter = 0.1\n\n[curve]\nkind = \"circle\"\nnodes = 64\n\n[solver]\ntarget_time = 0.5\n\n[study]\nmode = \"stability\"\nepsilons = [1e-3, 5e-4]\n",
    );
    let out = tmp.path().join("out");
    let o = run(&["study", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let study = json(&out.join("study.json"));
    let r = study["initial_energy_scaling"][0].as_f64().unwrap();
    assert!((r - 1.0).abs() < 0.1, "{r}");
}

#[test]
fn starvation_exits_three_with_partial_surface() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "starve.toml",
        "[metric]\nkind = \"flrw\"\nscale_factor = \"exponential\"\nparameter = 2.0\n\n[curve]\nkind = \"circle\"\nnodes = 16\n\n[solver]\ndelta = { kind = \"fixed\", delta = 1e-3 }\nstarvation_patience = 0\n",
    );
    let out = tmp.path().join("out");
    let o = run(&["run", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("starvation"));
    let report = json(&out.join("report.json"));
    assert_eq!(report["outcome"], "solver-failure");
    assert!(out.join("surface.json").exists());
}

#[test]
fn output_dir_env_overrides_the_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "run.toml", &format!("{CIRCLE}\n[output]\ndir = \"from-file\"\n"));
    let env_dir = tmp.path().join("from-env");
    let o = bin()
        .args(["run", cfg.to_str().unwrap(), "--target-time", "0.3"])
        .env("WORLDSHEET_OUTPUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(env_dir.join("report.json").exists());
    assert!(!tmp.path().join("from-file").exists());

    // the flag wins over the environment
    let flag_dir = tmp.path().join("from-flag");
    let o = bin()
        .args(["run", cfg.to_str().unwrap(), "--target-time", "0.3", "--output-dir", flag_dir.to_str().unwrap()])
        .env("WORLDSHEET_OUTPUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(flag_dir.join("report.json").exists());
}

#[test]
fn oracle_verb_writes_surfaces() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("o.json");
    let o = run(&[
        "oracle",
        "minkowski-circle",
        "--nodes",
        "32",
        "--rows",
        "4",
        "--param",
        "radius=2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = read_json(fs::File::open(&path).unwrap()).unwrap();
    assert_eq!((s.n_nodes, s.n_rows()), (32, 4));
    assert!((s.y(0, 0)[2] - 2.0).abs() < 1e-15);

    let o = run(&["oracle", "flat-travelling-wave", "--param", "profile=harmonic2", "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("x,t,y0"));

    assert_eq!(code(&run(&["oracle", "nope"])), 1);
    assert_eq!(code(&run(&["oracle", "minkowski-circle", "--param", "radius"])), 1);
}
