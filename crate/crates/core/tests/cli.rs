use std::path::Path;
use std::process::Command;

use hilbert_dynamics::cli_io::{run_args, EXIT_CONFIG, EXIT_NUMERIC};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn hdlab(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["hdlab"];
    argv.extend_from_slice(args);
    let code = run_args(argv, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn dist_on_interval_prints_log3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"body": {"type": "interval", "lo": -1, "hi": 1}}"#);
    let r = hdlab(&["--config", &cfg, "dist", "0", "0.5"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.lines().nth(1).unwrap(), "1.0986122886681098,0");

    let r = hdlab(&["--config", &cfg, "--format", "json", "dist", "0", "-0.5"]);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["distance"].as_f64().unwrap(), 3f64.ln());
    assert_eq!(v["config_digest"].as_str().unwrap().len(), 64);

    let square = write_config(dir.path(), "sq.json", r#"{"body": {"type": "cube", "dimension": 2}}"#);
    let a = hdlab(&["dist", "-0.5,0.1", "0.2,-0.3", "--config", &square]);
    let b = hdlab(&["dist", "0.2,-0.3", "-0.5,0.1", "--config", &square]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn identity_orbit_rows_are_constant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"metric": "hilbert-cone", "body": {"type": "simplex", "dimension": 2},
            "map": {"type": "identity"}, "seeds": {"points": [[0.2, 0.3, 0.5]]},
            "params": {"dynamics": {"n_steps": 50}}}"#,
    );
    let r = hdlab(&["--config", &cfg, "orbit"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next().unwrap(), "seed,step,time,x1,x2,x3,d_to_start,step_d");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 51);
    for row in &rows {
        assert_eq!(&row[3..7], &rows[0][3..7]);
        assert_eq!(row[6], "0.0000000000000000");
    }
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let a = hdlab(&["verify", "condition-C", "--seed", "42"]);
    let b = hdlab(&["verify", "condition-C", "--seed", "42"]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    let c = hdlab(&["verify", "condition-C", "--seed", "43"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn out_dir_receives_the_same_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"metric": "hilbert-cone", "body": {"type": "simplex", "dimension": 1},
            "map": {"type": "projective-linear", "matrix": [[2, 1], [1, 2]]},
            "seeds": {"count": 4, "rng_seed": 3}}"#,
    );
    let out = dir.path().join("artifacts");
    let r = hdlab(&["--config", &cfg, "--out", out.to_str().unwrap(), "attractor"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(std::fs::read_to_string(out.join("attractor.json")).unwrap(), r.stdout);
    let csv = std::fs::read_to_string(out.join("attractor.csv")).unwrap();
    assert!(csv.starts_with("cluster,x1,x2,multiplicity,n_sources,location\n"));
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["boundedness"], "bounded");
    let fp = &v["fixed_point"]["point"];
    assert!((fp[0].as_f64().unwrap() - 0.5).abs() < 1e-10);

    // The output location is not part of the digest.
    let again = hdlab(&["--config", &cfg, "attractor"]);
    assert_eq!(again.stdout, r.stdout);
}

#[test]
fn horoball_grid_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"body": {"type": "cube", "dimension": 2}, "horoball": {"center": [1, 0], "grid": 4}}"#,
    );
    let r = hdlab(&["--config", &cfg, "horoball"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines[0], "x1,x2,horofunction_lo,horofunction_hi,member");
    assert_eq!(lines.len(), 17);
    // Points nearer the right facet than the pole are members at radius 0.
    assert!(lines[1..].iter().all(|l| l.ends_with(",0") || l.ends_with(",1")));
    assert!(lines.iter().any(|l| l.starts_with("0.75000000000000000,-0.25000000000000000") && l.ends_with(",1")));
}

#[test]
fn malformed_configs_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write_config(dir.path(), "broken.json", "{not json");
    assert_eq!(hdlab(&["--config", &broken, "verify", "axiom5"]).code, EXIT_CONFIG);
    let unknown = write_config(dir.path(), "unknown.json", r#"{"tolerance": 1}"#);
    assert_eq!(hdlab(&["--config", &unknown, "verify", "axiom5"]).code, EXIT_CONFIG);
    assert_eq!(hdlab(&["--config", "/nonexistent/c.json", "verify", "axiom5"]).code, EXIT_CONFIG);
    assert_eq!(hdlab(&["verify", "no-such-suite"]).code, EXIT_CONFIG);
    assert_eq!(hdlab(&["dist", "0", "0.5"]).code, EXIT_CONFIG);
    assert_eq!(hdlab(&["frobnicate"]).code, EXIT_CONFIG);
}

#[test]
fn escaping_orbit_exits_70() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"body": {"type": "interval", "lo": -1, "hi": 1},
            "map": {"type": "affine-contraction", "matrix": [[3]], "offset": [0]},
            "seeds": {"points": [[0.5]]}}"#,
    );
    let r = hdlab(&["--config", &cfg, "orbit"]);
    assert_eq!(r.code, EXIT_NUMERIC);
    assert!(r.stderr.contains("numeric failure"));
}

#[test]
fn verdict_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // A negative tolerance demands a margin no sample has.
    let strict = write_config(dir.path(), "strict.json", r#"{"params": {"n_condition_c": 2000, "condc_tol": -1.0}}"#);
    assert_eq!(hdlab(&["--config", &strict, "verify", "condition-C"]).code, 1);
    // A Perron map has a fixed point, so the Wolff-Denjoy check cannot apply.
    let perron = write_config(
        dir.path(),
        "perron.json",
        r#"{"metric": "hilbert-cone", "body": {"type": "simplex", "dimension": 1},
            "map": {"type": "projective-linear", "matrix": [[2, 1], [1, 2]]},
            "seeds": {"count": 5}, "params": {"n_seeds": 10}}"#,
    );
    let r = hdlab(&["--config", &perron, "verify", "wolff-denjoy"]);
    assert_eq!(r.code, 2, "{}", r.stdout);
}

#[test]
fn binary_reports_exit_status() {
    let exe = env!("CARGO_BIN_EXE_hdlab");
    let status = Command::new(exe).args(["verify", "kobayashi", "--seed", "1"]).output().unwrap();
    assert_eq!(status.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&status.stdout).unwrap();
    assert_eq!(v["verdict"], "pass");
    let status = Command::new(exe).args(["verify", "bogus"]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_CONFIG));
    let help = Command::new(exe).args(["orbit", "--help"]).output().unwrap();
    assert!(String::from_utf8_lossy(&help.stdout).contains("d_to_start"));
}
