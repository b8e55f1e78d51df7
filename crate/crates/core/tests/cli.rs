use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ermakov(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ermakov")).args(args).env("ERMAKOV_OUT", out).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn free_particle_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "free.cfg", "problem.kind = free_particle\nproblem.k0 = 1\n");
    let run = ermakov(&["run", &cfg], &out);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));

    let report = fs::read_to_string(out.join("report.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(json["verdict"], "pass");
    let sector = &json["sectors"][0];
    assert!(sector["residuals"]["invariant_drift"].as_f64().unwrap() <= 1e-10);
    for key in ["wronskian_drift", "constraint_residual", "continuity_residual", "ode_residual", "energy_residual"] {
        assert!(sector["residuals"][key].is_number(), "{key}");
    }

    let fields = fs::read_to_string(out.join("fields_x.csv")).unwrap();
    let mut lines = fields.lines();
    assert_eq!(lines.next().unwrap(), "q,omega2,y1,y2,wronskian,rho,R,p,Q,invariant");
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((cols[5] - 1.0).abs() <= 1e-12 && (cols[7] - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn harmonic_ground_state_is_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "ground.cfg",
        "problem.kind = harmonic_oscillator\nproblem.omega = 1\nproblem.E = 0.5\nsector.x.C = 0\nsector.x.A = 1\nsector.x.B = 0\nsector.x.D = 0\noutput.format = jsonl\n",
    );
    let run = ermakov(&["run", &cfg], &out);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let fields = fs::read_to_string(out.join("fields_x.jsonl")).unwrap();
    for line in fields.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        let x = row["q"].as_f64().unwrap();
        assert!((row["rho"].as_f64().unwrap() - (-0.5 * x * x).exp()).abs() < 1e-8);
        assert_eq!(row["p"].as_f64().unwrap(), 0.0);
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["sectors"][0]["nodes"].as_array().unwrap().len(), 0);
}

#[test]
fn constraint_violation_exits_1_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "bad.cfg",
        "problem.kind = free_particle\nproblem.k0 = 1\nsector.x.A = 1\nsector.x.B = 1\nsector.x.D = 0.5\n",
    );
    let run = ermakov(&["run", &cfg], &out);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("residual"));
    assert!(!out.exists());
    assert_eq!(ermakov(&["check", &cfg], &out).status.code(), Some(1));
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "typo.cfg", "problem.kind = free_particle\nproblem.k0 = 1\nsector.x.c = 1\n");
    let run = ermakov(&["check", &cfg], &out);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("line 3"));
    let missing = dir.path().join("nope.cfg");
    assert_eq!(ermakov(&["run", &missing.to_string_lossy()], &out).status.code(), Some(1));
}

#[test]
fn tolerance_breach_exits_2_and_names_the_sector() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "strict.cfg",
        "problem.kind = harmonic_oscillator\nproblem.omega = 1\nproblem.E = 1\ntolerance.invariant = 1e-30\n",
    );
    let run = ermakov(&["run", &cfg], &out);
    assert_eq!(run.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "fail");
    assert_eq!(report["sectors"][0]["label"], "x");
    assert_eq!(report["sectors"][0]["failures"][0], "invariant_drift");
}

#[test]
fn singular_grid_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "origin.cfg",
        "problem.kind = coulomb_halfline\nproblem.alpha = 1\nproblem.E = -0.125\nsector.x.lo = 0\n",
    );
    assert_eq!(ermakov(&["run", &cfg], &out).status.code(), Some(3));
}

#[test]
fn check_and_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "tc.cfg",
        "problem.kind = two_center_elliptic\nproblem.a = 1\nproblem.k2 = 2\nproblem.Gamma = -1\n",
    );
    let check = ermakov(&["check", &cfg], &out);
    assert_eq!(check.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&check.stdout).contains("mu, nu"));
    assert!(!out.exists());

    let catalog = ermakov(&["catalog"], &out);
    assert_eq!(catalog.status.code(), Some(0));
    let text = String::from_utf8_lossy(&catalog.stdout);
    for system in ["cartesian", "cylindrical", "spherical", "elliptic_cylinder", "confocal_quadric"] {
        assert!(text.contains(system), "{system}");
    }
    assert!(text.contains("s = sin(theta)"));
}
