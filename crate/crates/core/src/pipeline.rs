//! One sector end to end: pair, Pinney amplitude, invariant, guiding field,
//! optional trajectory, and the residuals that certify them.

use crate::bohm::{
    amplitude_quantum_potential, continuity_residual, energy_residual, momentum_field, physical_amplitude,
    BohmSector, GuidingField,
};
use crate::ermakov::{el_invariant, ep_deviation, invariant_drift, pinney_amplitude, Drift, ErmakovAmplitude, PinneyCoefficients};
use crate::error::{Error, Result};
use crate::linear::{uniform_grid, wronskian_check, FrequencyField, FundamentalPair, IntegrationSettings};
use crate::problems::SectorSetup;

/// User-supplied Pinney coefficients; any subset of `A`, `B`, `D`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PinneyOverride {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub d: Option<f64>,
}

/// Acceptance thresholds of the certification report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertTolerances {
    pub invariant: f64,
    pub wronskian: f64,
    pub constraint: f64,
    pub continuity: f64,
    pub ode: f64,
    pub energy: f64,
    pub flux: f64,
    pub reversal: f64,
}

impl Default for CertTolerances {
    fn default() -> Self {
        CertTolerances {
            invariant: 1e-8,
            wronskian: 1e-9,
            constraint: 1e-10,
            continuity: 1e-10,
            ode: 1e-8,
            energy: 1e-6,
            flux: 1e-12,
            reversal: 1e-8,
        }
    }
}

impl CertTolerances {
    pub const KEYS: [&'static str; 8] =
        ["invariant", "wronskian", "constraint", "continuity", "ode", "energy", "flux", "reversal"];

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "invariant" => self.invariant,
            "wronskian" => self.wronskian,
            "constraint" => self.constraint,
            "continuity" => self.continuity,
            "ode" => self.ode,
            "energy" => self.energy,
            "flux" => self.flux,
            "reversal" => self.reversal,
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Config(format!("tolerance.{key} must be positive, got {value}")));
        }
        let slot = match key {
            "invariant" => &mut self.invariant,
            "wronskian" => &mut self.wronskian,
            "constraint" => &mut self.constraint,
            "continuity" => &mut self.continuity,
            "ode" => &mut self.ode,
            "energy" => &mut self.energy,
            "flux" => &mut self.flux,
            "reversal" => &mut self.reversal,
            other => return Err(Error::Config(format!("unknown tolerance `{other}`"))),
        };
        *slot = value;
        Ok(())
    }
}

/// Release point and time span of a guiding-field trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRequest {
    pub x0: f64,
    pub t_end: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRun {
    pub request: TrajectoryRequest,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    /// forward-then-backward closure error; `None` for static (`C = 0`) paths
    pub reversal: Option<f64>,
}

/// Residuals of one sector, all relative unless flagged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorResiduals {
    pub invariant: Drift,
    /// `max |W(q) - W| / |W|`
    pub wronskian: f64,
    /// `|AB - D² - k/W²| / max(1, k/W²)`
    pub constraint: f64,
    /// `max |pR² - C| / |C|`
    pub continuity: f64,
    /// relative deviation from an independent direct EP solve
    pub ode: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorRun {
    pub label: String,
    pub pair_origin: String,
    pub c: f64,
    pub k: f64,
    pub coefficients: PinneyCoefficients,
    pub energy: f64,
    pub omega2: Vec<f64>,
    pub pair: FundamentalPair,
    pub amplitude: ErmakovAmplitude,
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// which pair column the invariant is evaluated on
    pub invariant_column: &'static str,
    pub invariant: Vec<f64>,
    pub residuals: SectorResiduals,
    pub trajectory: Option<TrajectoryRun>,
}

impl SectorRun {
    pub fn grid(&self) -> &[f64] {
        self.pair.grid()
    }

    /// Guiding-field bundle of the sector.
    pub fn bohm(&self) -> BohmSector {
        BohmSector {
            c: self.c,
            grid: self.grid().to_vec(),
            r: self.r.clone(),
            p: self.p.clone(),
            q: self.q.clone(),
            energy: self.energy,
            invariant: self.invariant.clone(),
        }
    }

    /// Names of residuals above their tolerance.
    pub fn failures(&self, tol: &CertTolerances) -> Vec<&'static str> {
        let r = &self.residuals;
        let mut out = Vec::new();
        let checks = [
            ("invariant_drift", r.invariant.max_relative, tol.invariant),
            ("wronskian_drift", r.wronskian, tol.wronskian),
            ("constraint_residual", r.constraint, tol.constraint),
            ("continuity_residual", r.continuity, tol.continuity),
            ("ode_residual", r.ode, tol.ode),
            ("energy_residual", r.energy, tol.energy),
        ];
        for (name, value, limit) in checks {
            if !(value <= limit) {
                out.push(name);
            }
        }
        if let Some(rev) = self.trajectory.as_ref().and_then(|t| t.reversal) {
            if !(rev <= tol.reversal) {
                out.push("trajectory_reversal");
            }
        }
        out
    }
}

/// Resolves user coefficients against the pair's Wronskian; without input the
/// symmetric choice `A = B = √k/|W|` (or `A = 1` at `k = 0`) is used.
pub fn resolve_coefficients(over: &PinneyOverride, k: f64, w: f64) -> Result<PinneyCoefficients> {
    match (over.a, over.b, over.d) {
        (None, None, None) => PinneyCoefficients::symmetric(k, w),
        (Some(a), Some(b), None) => PinneyCoefficients::from_ab(a, b, k, w, false),
        (Some(a), Some(b), Some(d)) => {
            let c = PinneyCoefficients::new(a, b, d, k)?;
            c.validate(w)?;
            Ok(c)
        }
        _ => Err(Error::Config("Pinney coefficients need A and B (D optional)".into())),
    }
}

/// Runs one sector through the full pipeline.
pub fn run_sector(
    setup: &SectorSetup,
    over: &PinneyOverride,
    settings: &IntegrationSettings,
    trajectory: Option<&TrajectoryRequest>,
) -> Result<SectorRun> {
    let (pair, pair_origin) = setup.pair_with_origin(settings)?;
    let k = setup.k();
    let w = pair.wronskian();
    let coefficients = resolve_coefficients(over, k, w)?;
    let amplitude = pinney_amplitude(&coefficients, &pair)?;
    let field = &setup.profile;
    let grid = pair.grid().to_vec();
    let omega2: Vec<f64> = grid.iter().map(|&q| field.omega2(q)).collect();

    // the column with the larger analytic invariant: I(y1) = ½BW², I(y2) = ½AW²
    let (invariant_column, y, dy) = if coefficients.a >= coefficients.b {
        ("y2", pair.y2(), pair.dy2())
    } else {
        ("y1", pair.y1(), pair.dy1())
    };
    let invariant = el_invariant(&amplitude, y, dy)?;

    let r = physical_amplitude(&amplitude, &setup.sector)?;
    let p = momentum_field(setup.c, &grid, &r)?;
    let (mass, hbar) = (field.mass(), field.hbar());
    let q = amplitude_quantum_potential(&amplitude, &pair, field, mass, hbar)?;

    let residuals = SectorResiduals {
        invariant: invariant_drift(&grid, &invariant)?,
        wronskian: wronskian_check(&pair) / w.abs(),
        constraint: coefficients.constraint_residual(w).abs() / (k / (w * w)).max(1.0),
        continuity: continuity_residual(setup.c, &r, &p),
        ode: ep_deviation(&amplitude, field, settings)?,
        energy: energy_residual(&amplitude, &q, field, setup.c, mass, hbar, field.energy()),
    };

    let trajectory = match trajectory {
        Some(req) => Some(run_trajectory(setup.c, &grid, &r, mass, req, settings)?),
        None => None,
    };

    Ok(SectorRun {
        label: setup.label.clone(),
        pair_origin,
        c: setup.c,
        k,
        coefficients,
        energy: field.energy(),
        omega2,
        pair,
        amplitude,
        r,
        p,
        q,
        invariant_column,
        invariant,
        residuals,
        trajectory,
    })
}

fn run_trajectory(
    c: f64,
    grid: &[f64],
    r: &[f64],
    mass: f64,
    req: &TrajectoryRequest,
    settings: &IntegrationSettings,
) -> Result<TrajectoryRun> {
    if !(req.t_end > 0.0 && req.t_end.is_finite()) || req.samples < 2 {
        return Err(Error::Config("trajectory needs t_end > 0 and at least 2 samples".into()));
    }
    let field = GuidingField::new(c, grid, r, mass)?;
    let t = uniform_grid(0.0, req.t_end, req.samples);
    let x = field.trajectory(req.x0, &t, settings)?;
    let reversal = if c != 0.0 { Some(field.reversal_error(req.x0, &t, settings)?) } else { None };
    Ok(TrajectoryRun { request: *req, t, x, reversal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{build_problem, ProblemKind, ProblemSpec};

    fn run(spec: &ProblemSpec, over: PinneyOverride) -> Vec<SectorRun> {
        build_problem(spec)
            .unwrap()
            .iter()
            .map(|s| run_sector(s, &over, &IntegrationSettings::default(), None).unwrap())
            .collect()
    }

    #[test]
    fn free_particle_closed_form() {
        let spec = ProblemSpec::new(ProblemKind::FreeParticle).with_param("k0", 1.0);
        let run = &run(&spec, PinneyOverride::default())[0];
        assert!(run.amplitude.rho.iter().all(|r| (r - 1.0).abs() <= 1e-12));
        assert!(run.p.iter().all(|p| (p - 1.0).abs() <= 1e-12));
        assert!(run.invariant.iter().all(|i| (i - 0.5).abs() <= 1e-12));
        assert!(run.q.iter().all(|q| q.abs() <= 1e-12));
        assert!(run.failures(&CertTolerances::default()).is_empty());
    }

    #[test]
    fn harmonic_ground_state_is_gaussian() {
        let spec = ProblemSpec::new(ProblemKind::HarmonicOscillator).with_param("omega", 1.0).with_param("E", 0.5);
        let over = PinneyOverride { a: Some(1.0), b: Some(0.0), d: Some(0.0) };
        let run = &run(&spec, over)[0];
        for (x, rho) in run.grid().iter().zip(&run.amplitude.rho) {
            assert!((rho - (-0.5 * x * x).exp()).abs() < 1e-8);
        }
        assert!(run.amplitude.nodes.is_empty());
        assert!(run.p.iter().all(|&p| p == 0.0));
        assert!(run.failures(&CertTolerances::default()).is_empty(), "{:?}", run.residuals);
    }

    #[test]
    fn bohm_bundle_carries_flux() {
        let spec = ProblemSpec::new(ProblemKind::HarmonicOscillator)
            .with_param("omega", 1.0)
            .with_param("E", 1.3)
            .with_flux("x", -0.7);
        let bohm = run(&spec, PinneyOverride::default())[0].bohm();
        assert_eq!(bohm.c, -0.7);
        assert_eq!(bohm.grid.len(), bohm.r.len());
        for (p, r) in bohm.p.iter().zip(&bohm.r) {
            assert!((p * r * r + 0.7).abs() <= 1e-10 * 0.7);
            assert!(*p < 0.0);
        }
    }

    #[test]
    fn bad_constraint_is_rejected() {
        let spec = ProblemSpec::new(ProblemKind::FreeParticle).with_param("k0", 1.0);
        let setup = &build_problem(&spec).unwrap()[0];
        let over = PinneyOverride { a: Some(1.0), b: Some(1.0), d: Some(0.5) };
        let err = run_sector(setup, &over, &IntegrationSettings::default(), None).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolation { .. }));
    }

    #[test]
    fn partial_override_is_a_config_error() {
        assert!(matches!(
            resolve_coefficients(&PinneyOverride { a: Some(1.0), ..Default::default() }, 1.0, 1.0),
            Err(Error::Config(_))
        ));
    }
}
