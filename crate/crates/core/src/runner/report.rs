//! Certification report and data tables.
//!
//! Reals are written as `{:.16e}` (17 significant digits) and every record
//! has a fixed key order, so identical runs serialize to identical bytes.

use std::collections::BTreeMap;

use serde::ser::{Error as _, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::bohm::FluxCheck;
use crate::error::{Error, Result};
use crate::pipeline::{CertTolerances, SectorRun, TrajectoryRun};
use crate::problems::ProblemSpec;

use super::config::OutputFormat;

/// A real serialized with 17 significant digits; non-finite values become
/// `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            RawValue::from_string(format_real(self.0)).map_err(S::Error::custom)?.serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn of(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub problem: String,
    pub verdict: Verdict,
    pub mass: Real,
    pub hbar: Real,
    pub parameters: BTreeMap<String, Real>,
    pub tolerances: ToleranceReport,
    pub sectors: Vec<SectorReport>,
    pub flux: FluxReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToleranceReport {
    pub invariant: Real,
    pub wronskian: Real,
    pub constraint: Real,
    pub continuity: Real,
    pub ode: Real,
    pub energy: Real,
    pub flux: Real,
    pub reversal: Real,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorReport {
    pub label: String,
    pub verdict: Verdict,
    pub pair: String,
    pub points: usize,
    pub lo: Real,
    pub hi: Real,
    pub energy: Real,
    #[serde(rename = "C")]
    pub c: Real,
    pub k: Real,
    #[serde(rename = "A")]
    pub a: Real,
    #[serde(rename = "B")]
    pub b: Real,
    #[serde(rename = "D")]
    pub d: Real,
    pub wronskian: Real,
    pub nodes: Vec<Real>,
    pub invariant_column: String,
    pub invariant_reference: Real,
    pub residuals: ResidualReport,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub invariant_drift: Real,
    pub invariant_drift_at: Real,
    pub wronskian_drift: Real,
    pub constraint_residual: Real,
    pub continuity_residual: Real,
    pub ode_residual: Real,
    pub energy_residual: Real,
    pub trajectory_reversal: Option<Real>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxReport {
    pub verdict: Verdict,
    pub residual: Real,
    pub enforced: bool,
    pub sectors: Vec<FluxEntry>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxEntry {
    pub label: String,
    #[serde(rename = "C")]
    pub c: Real,
}

impl ToleranceReport {
    fn from(t: &CertTolerances) -> Self {
        ToleranceReport {
            invariant: Real(t.invariant),
            wronskian: Real(t.wronskian),
            constraint: Real(t.constraint),
            continuity: Real(t.continuity),
            ode: Real(t.ode),
            energy: Real(t.energy),
            flux: Real(t.flux),
            reversal: Real(t.reversal),
        }
    }
}

impl SectorReport {
    pub fn from_run(run: &SectorRun, tol: &CertTolerances) -> Self {
        let failures: Vec<String> = run.failures(tol).into_iter().map(String::from).collect();
        let grid = run.grid();
        let r = &run.residuals;
        SectorReport {
            label: run.label.clone(),
            verdict: Verdict::of(failures.is_empty()),
            pair: run.pair_origin.clone(),
            points: grid.len(),
            lo: Real(grid[0]),
            hi: Real(grid[grid.len() - 1]),
            energy: Real(run.energy),
            c: Real(run.c),
            k: Real(run.k),
            a: Real(run.coefficients.a),
            b: Real(run.coefficients.b),
            d: Real(run.coefficients.d),
            wronskian: Real(run.pair.wronskian()),
            nodes: run.amplitude.nodes.iter().map(|&z| Real(z)).collect(),
            invariant_column: run.invariant_column.to_string(),
            invariant_reference: Real(r.invariant.reference),
            residuals: ResidualReport {
                invariant_drift: Real(r.invariant.max_relative),
                invariant_drift_at: Real(r.invariant.at),
                wronskian_drift: Real(r.wronskian),
                constraint_residual: Real(r.constraint),
                continuity_residual: Real(r.continuity),
                ode_residual: Real(r.ode),
                energy_residual: Real(r.energy),
                trajectory_reversal: run.trajectory.as_ref().and_then(|t| t.reversal).map(Real),
            },
            failures,
        }
    }
}

impl Report {
    pub fn new(problem: &ProblemSpec, runs: &[SectorRun], flux: &FluxCheck, tol: &CertTolerances) -> Self {
        let sectors: Vec<SectorReport> = runs.iter().map(|r| SectorReport::from_run(r, tol)).collect();
        let pass = flux.pass && sectors.iter().all(|s| s.verdict == Verdict::Pass);
        Report {
            problem: problem.kind.key().to_string(),
            verdict: Verdict::of(pass),
            mass: Real(problem.mass),
            hbar: Real(problem.hbar),
            parameters: problem.params.iter().map(|(k, v)| (k.clone(), Real(*v))).collect(),
            tolerances: ToleranceReport::from(tol),
            sectors,
            flux: FluxReport {
                verdict: Verdict::of(flux.pass),
                residual: Real(flux.residual),
                enforced: flux.enforced,
                sectors: runs.iter().map(|r| FluxEntry { label: r.label.clone(), c: Real(r.c) }).collect(),
                note: flux.note.clone(),
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Labels of failing sectors, with `flux` if the ledger failed.
    pub fn offenders(&self) -> Vec<String> {
        let mut out: Vec<String> =
            self.sectors.iter().filter(|s| s.verdict == Verdict::Fail).map(|s| s.label.clone()).collect();
        if self.flux.verdict == Verdict::Fail {
            out.push("flux".to_string());
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }
}

#[derive(Serialize)]
struct FieldRow {
    q: Real,
    omega2: Real,
    y1: Real,
    y2: Real,
    wronskian: Real,
    rho: Real,
    #[serde(rename = "R")]
    r: Real,
    p: Real,
    #[serde(rename = "Q")]
    q_pot: Real,
    invariant: Real,
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: Real,
    x: Real,
}

pub const FIELD_COLUMNS: [&str; 10] = ["q", "omega2", "y1", "y2", "wronskian", "rho", "R", "p", "Q", "invariant"];
pub const TRAJECTORY_COLUMNS: [&str; 2] = ["t", "x"];

fn field_rows(run: &SectorRun) -> Vec<FieldRow> {
    let pair = &run.pair;
    (0..pair.len())
        .map(|i| FieldRow {
            q: Real(pair.grid()[i]),
            omega2: Real(run.omega2[i]),
            y1: Real(pair.y1()[i]),
            y2: Real(pair.y2()[i]),
            wronskian: Real(pair.wronskian_at(i)),
            rho: Real(run.amplitude.rho[i]),
            r: Real(run.r[i]),
            p: Real(run.p[i]),
            q_pot: Real(run.q[i]),
            invariant: Real(run.invariant[i]),
        })
        .collect()
}

fn csv_table(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| format_real(v))).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

fn jsonl_table<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for row in rows {
        serde_json::to_writer(&mut out, row).map_err(|e| Error::Io(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}

/// Per-sample field table of a sector.
pub fn field_table(run: &SectorRun, format: OutputFormat) -> Result<Vec<u8>> {
    let rows = field_rows(run);
    match format {
        OutputFormat::Csv => csv_table(
            &FIELD_COLUMNS,
            rows.iter().map(|r| vec![r.q.0, r.omega2.0, r.y1.0, r.y2.0, r.wronskian.0, r.rho.0, r.r.0, r.p.0, r.q_pot.0, r.invariant.0]),
        ),
        OutputFormat::Jsonl => jsonl_table(&rows),
    }
}

pub fn trajectory_table(traj: &TrajectoryRun, format: OutputFormat) -> Result<Vec<u8>> {
    match format {
        OutputFormat::Csv => csv_table(&TRAJECTORY_COLUMNS, traj.t.iter().zip(&traj.x).map(|(&t, &x)| vec![t, x])),
        OutputFormat::Jsonl => {
            let rows: Vec<TrajectoryRow> =
                traj.t.iter().zip(&traj.x).map(|(&t, &x)| TrajectoryRow { t: Real(t), x: Real(x) }).collect();
            jsonl_table(&rows)
        }
    }
}
