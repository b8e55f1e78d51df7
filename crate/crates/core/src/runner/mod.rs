//! Configuration-driven runs: build the sectors, run them concurrently,
//! certify the results and emit data files plus `report.json`.

pub mod config;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use crate::bohm::{flux_constraint_check, FluxCheck, FluxLedger};
use crate::error::{Error, Result};
use crate::pipeline::{resolve_coefficients, run_sector, SectorRun};
use crate::problems::{build_problem, SectorSetup};

pub use config::{OutputFormat, RunConfig, OUTPUT_ENV};
pub use report::{field_table, trajectory_table, Real, Report, Verdict};

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub runs: Vec<SectorRun>,
    pub flux: FluxCheck,
    pub report: Report,
}

/// Process exit code for an error: 1 for input and I/O problems, 3 for
/// singular points met by the computation, 2 for other numerical failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Singularity { .. } | Error::NodeSingularity { .. } | Error::NodeApproach { .. } => 3,
        Error::Config(_)
        | Error::Io(_)
        | Error::UnknownSystem { .. }
        | Error::UnknownSector { .. }
        | Error::UnboundParameter(_)
        | Error::InvalidParameter(_)
        | Error::IncompleteSpec { .. }
        | Error::ConstraintViolation { .. }
        | Error::OutOfDomain { .. } => 1,
        _ => 2,
    }
}

/// Validates a config without computing fields: builds every sector, its
/// pair and its Pinney coefficients.
pub fn check(config: &RunConfig) -> Result<Vec<SectorSetup>> {
    let setups = build_problem(&config.problem)?;
    for setup in &setups {
        let pair = setup.pair(&config.settings)?;
        let over = config.pinney.get(&setup.label).copied().unwrap_or_default();
        resolve_coefficients(&over, setup.k(), pair.wronskian())?;
    }
    Ok(setups)
}

/// Runs every sector (concurrently) and assembles the report.
pub fn execute(config: &RunConfig) -> Result<RunOutcome> {
    let setups = build_problem(&config.problem)?;
    let results: Vec<Result<SectorRun>> = std::thread::scope(|scope| {
        let handles: Vec<_> = setups
            .iter()
            .map(|setup| {
                let over = config.pinney.get(&setup.label).copied().unwrap_or_default();
                let traj = config.trajectories.get(&setup.label).copied();
                scope.spawn(move || run_sector(setup, &over, &config.settings, traj.as_ref()))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p))).collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut ledger = FluxLedger::default();
    for run in &runs {
        ledger.push(run.label.clone(), run.c);
    }
    let mut flux = flux_constraint_check(&ledger, config.enforce_flux)?;
    if config.enforce_flux {
        flux.pass = flux.residual <= config.tolerances.flux;
    }
    let report = Report::new(&config.problem, &runs, &flux, &config.tolerances);
    Ok(RunOutcome { runs, flux, report })
}

/// Every output file as `(name, bytes)`, in a fixed order.
pub fn render(outcome: &RunOutcome, format: OutputFormat) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    for run in &outcome.runs {
        files.push((format!("fields_{}.{}", run.label, format.extension()), field_table(run, format)?));
        if let Some(traj) = &run.trajectory {
            files.push((format!("trajectory_{}.{}", run.label, format.extension()), trajectory_table(traj, format)?));
        }
    }
    files.push((REPORT_FILE.to_string(), outcome.report.to_json()?.into_bytes()));
    Ok(files)
}

/// Writes each file to a temporary name and renames it into place once all
/// temporaries are written.
pub fn write_files(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<Vec<PathBuf>> {
    let io = |what: &str, path: &Path, e: std::io::Error| Error::Io(format!("{what} {}: {e}", path.display()));
    fs::create_dir_all(dir).map_err(|e| io("cannot create", dir, e))?;
    let mut staged = Vec::new();
    let cleanup = |staged: &[(PathBuf, PathBuf)]| {
        for (tmp, _) in staged {
            let _ = fs::remove_file(tmp);
        }
    };
    for (name, bytes) in files {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp"));
        if let Err(e) = fs::write(&tmp, bytes) {
            cleanup(&staged);
            let _ = fs::remove_file(&tmp);
            return Err(io("cannot write", &tmp, e));
        }
        staged.push((tmp, target));
    }
    for (tmp, target) in &staged {
        if let Err(e) = fs::rename(tmp, target) {
            cleanup(&staged);
            return Err(io("cannot rename into", target, e));
        }
    }
    Ok(staged.into_iter().map(|(_, t)| t).collect())
}

/// Full run: compute, certify, then write everything into the output
/// directory. Nothing is written if the computation fails.
pub fn run_config(config: &RunConfig) -> Result<(RunOutcome, Vec<PathBuf>)> {
    let outcome = execute(config)?;
    let files = render(&outcome, config.format)?;
    let written = write_files(&config.resolved_output_dir(), &files)?;
    Ok((outcome, written))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str, dir: &Path) -> RunConfig {
        let mut c: RunConfig = text.parse().unwrap();
        c.output_dir = dir.to_path_buf();
        c
    }

    #[test]
    fn free_particle_run_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let c = config("problem.kind = free_particle\nproblem.k0 = 1\ntrajectory.x.x0 = 0\ntrajectory.x.t_end = 2", dir.path());
        let outcome = execute(&c).unwrap();
        assert!(outcome.report.passed(), "{:?}", outcome.report.offenders());
        let written = write_files(dir.path(), &render(&outcome, c.format).unwrap()).unwrap();
        let names: Vec<_> = written.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["fields_x.csv", "trajectory_x.csv", "report.json"]);
        let fields = fs::read_to_string(dir.path().join("fields_x.csv")).unwrap();
        assert_eq!(fields.lines().next().unwrap(), "q,omega2,y1,y2,wronskian,rho,R,p,Q,invariant");
        assert_eq!(fields.lines().count(), 2002);
        let leftovers = fs::read_dir(dir.path()).unwrap().filter(|e| {
            e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".tmp")
        });
        assert_eq!(leftovers.count(), 0);
    }

    #[test]
    fn flux_enforcement_fails_open_sector() {
        let dir = tempfile::tempdir().unwrap();
        let c = config("problem.kind = free_particle\nproblem.k0 = 1\nflux.enforce = true", dir.path());
        let outcome = execute(&c).unwrap();
        assert!(!outcome.report.passed());
        assert_eq!(outcome.report.offenders(), ["flux"]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 1);
        assert_eq!(exit_code(&Error::ConstraintViolation { residual: 1.0 }), 1);
        assert_eq!(exit_code(&Error::NodeApproach { q: 0.0 }), 3);
        assert_eq!(exit_code(&Error::Singularity { q: 0.0 }), 3);
        assert_eq!(exit_code(&Error::PathExit { t: 1.0 }), 2);
        assert_eq!(exit_code(&Error::GridMismatch), 2);
    }

    #[test]
    fn check_rejects_bad_constraint() {
        let c: RunConfig =
            "problem.kind = free_particle\nproblem.k0 = 1\nsector.x.A = 1\nsector.x.B = 1\nsector.x.D = 0.5".parse().unwrap();
        assert!(matches!(check(&c), Err(Error::ConstraintViolation { .. })));
    }
}
