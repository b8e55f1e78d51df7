//! Worked problem presets: free particle, harmonic oscillator, Coulomb
//! half-line and the two-center elliptic problem.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::catalog::{FrequencyProfile, Potential, SectorSpec, Term, Weight};
use crate::error::{Error, Result};
use crate::linear::{
    companion_solution, fundamental_pair_on_grid, midpoint_index, uniform_grid, FundamentalPair, IntegrationSettings,
};
use crate::special::{mathieu_char_value, parabolic_cylinder, BasisKind, Parity};

/// Number of samples in every default grid.
pub const DEFAULT_POINTS: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemKind {
    FreeParticle,
    HarmonicOscillator,
    CoulombHalfline,
    TwoCenterElliptic,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [
        ProblemKind::FreeParticle,
        ProblemKind::HarmonicOscillator,
        ProblemKind::CoulombHalfline,
        ProblemKind::TwoCenterElliptic,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            ProblemKind::FreeParticle => "free_particle",
            ProblemKind::HarmonicOscillator => "harmonic_oscillator",
            ProblemKind::CoulombHalfline => "coulomb_halfline",
            ProblemKind::TwoCenterElliptic => "two_center_elliptic",
        }
    }

    /// Physical parameter keys accepted by the preset.
    pub fn param_keys(&self) -> &'static [&'static str] {
        match self {
            ProblemKind::FreeParticle => &["k0"],
            ProblemKind::HarmonicOscillator => &["omega", "E"],
            ProblemKind::CoulombHalfline => &["alpha", "E"],
            ProblemKind::TwoCenterElliptic => &["a", "E", "k2", "Gamma", "mathieu_order", "Z", "e2"],
        }
    }

    /// Sector labels in evaluation order.
    pub fn labels(&self) -> &'static [&'static str] {
        match self {
            ProblemKind::TwoCenterElliptic => &["mu", "nu"],
            _ => &["x"],
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.key() == s)
            .ok_or_else(|| Error::Config(format!("unknown problem kind `{s}`")))
    }
}

/// Optional overrides of a sector's sample grid.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GridRequest {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub points: Option<usize>,
}

/// A worked problem with its physical parameters.
///
/// Parameter keys: `k0` (free particle); `omega`, `E` (harmonic oscillator);
/// `alpha`, `E` (Coulomb, `E < 0`); `a`, `E` or `k2`, `Gamma` and/or
/// `mathieu_order`, optional `Z` and `e2` (two-center).
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub mass: f64,
    pub hbar: f64,
    pub params: BTreeMap<String, f64>,
    /// parity of the angular Mathieu solution (two-center only)
    pub parity: Parity,
    /// flux constant `C` per sector label
    pub flux: BTreeMap<String, f64>,
    pub grids: BTreeMap<String, GridRequest>,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind) -> Self {
        ProblemSpec {
            kind,
            mass: 1.0,
            hbar: 1.0,
            params: BTreeMap::new(),
            parity: Parity::Even,
            flux: BTreeMap::new(),
            grids: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_flux(mut self, label: &str, c: f64) -> Self {
        self.flux.insert(label.to_string(), c);
        self
    }

    pub fn with_grid(mut self, label: &str, grid: GridRequest) -> Self {
        self.grids.insert(label.to_string(), grid);
        self
    }

    fn get(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }
}

/// How a sector's fundamental pair is produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairSource {
    /// named basis in the variable `scale·q`
    Basis { kind: BasisKind, scale: f64 },
    /// identity initial data at the grid midpoint
    Numerical,
}

/// One assembled sector, ready for the amplitude pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorSetup {
    pub label: String,
    pub sector: SectorSpec,
    pub profile: FrequencyProfile,
    pub source: PairSource,
    pub grid: Vec<f64>,
    /// flux constant `C`
    pub c: f64,
}

impl SectorSetup {
    /// `k = C²/ħ²`.
    pub fn k(&self) -> f64 {
        (self.c / self.profile.hbar()).powi(2)
    }

    /// Samples the fundamental pair on the sector grid. Degenerate closed-form
    /// pairs keep their first column and take a unit-Wronskian companion.
    pub fn pair(&self, settings: &IntegrationSettings) -> Result<FundamentalPair> {
        self.pair_with_origin(settings).map(|(p, _)| p)
    }

    /// [`SectorSetup::pair`] plus a short description of how it was built.
    pub fn pair_with_origin(&self, settings: &IntegrationSettings) -> Result<(FundamentalPair, String)> {
        match self.source {
            PairSource::Numerical => {
                let anchor = self.grid[midpoint_index(&self.grid)];
                let pair = fundamental_pair_on_grid(&self.profile, &self.grid, anchor, settings)?;
                Ok((pair, "numerical".into()))
            }
            PairSource::Basis { kind, scale } => {
                let basis_grid: Vec<f64> = self.grid.iter().map(|q| scale * q).collect();
                match kind.pair(&basis_grid, settings) {
                    Ok(p) => Ok((rescale(&self.grid, &p, scale)?, kind.name().into())),
                    Err(Error::DegeneratePair { .. }) => {
                        let pair = self.companion_pair(kind, &basis_grid, scale, settings)?;
                        Ok((pair, format!("{}+companion", kind.name())))
                    }
                    Err(e) => Err(e),
                }
            }
        }
    }

    fn companion_pair(
        &self,
        kind: BasisKind,
        basis_grid: &[f64],
        scale: f64,
        settings: &IntegrationSettings,
    ) -> Result<FundamentalPair> {
        let (y, dy) = match kind {
            BasisKind::Weber { nu } => parabolic_cylinder(nu, basis_grid, settings)?,
            BasisKind::Whittaker { kappa, lambda } => crate::special::whittaker::whittaker_m_column(kappa, basis_grid, lambda)?,
            other => return Err(Error::DegeneratePair { basis: other.name().into() }),
        };
        let dy: Vec<f64> = dy.iter().map(|d| d * scale).collect();
        let i = midpoint_index(&self.grid);
        let (y2, dy2) = companion_solution(&self.profile, &self.grid, self.grid[i], (y[i], dy[i]), settings)?;
        FundamentalPair::new(self.grid.clone(), y, dy, y2, dy2, 1.0)
    }
}

fn rescale(grid: &[f64], pair: &FundamentalPair, scale: f64) -> Result<FundamentalPair> {
    let sc = |v: &[f64]| v.iter().map(|d| d * scale).collect::<Vec<_>>();
    FundamentalPair::new(
        grid.to_vec(),
        pair.y1().to_vec(),
        sc(pair.dy1()),
        pair.y2().to_vec(),
        sc(pair.dy2()),
        pair.wronskian() * scale,
    )
}

/// Two-center frequencies in prolate elliptic coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoCenterFrequencies {
    /// `a²k²`
    pub a2k2: f64,
    /// `γZ`
    pub gamma_z: f64,
    /// separation constant `Γ`
    pub big_gamma: f64,
}

impl TwoCenterFrequencies {
    /// `Ω_μ² = a²k² cosh²μ + 2γZ cosh μ + Γ`
    pub fn omega_mu2(&self, mu: f64) -> f64 {
        self.a2k2 * mu.cosh().powi(2) + 2.0 * self.gamma_z * mu.cosh() + self.big_gamma
    }

    /// `Ω_ν² = -a²k² cos²ν - Γ`
    pub fn omega_nu2(&self, nu: f64) -> f64 {
        -self.a2k2 * nu.cos().powi(2) - self.big_gamma
    }

    /// `a_M = -(Γ + a²k²/2)`
    pub fn mathieu_a(&self) -> f64 {
        -(self.big_gamma + 0.5 * self.a2k2)
    }

    /// `q_M = a²k²/4`
    pub fn mathieu_q(&self) -> f64 {
        0.25 * self.a2k2
    }
}

pub fn two_center_frequencies(a: f64, k2: f64, gamma: f64, z: f64, big_gamma: f64) -> Result<TwoCenterFrequencies> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("focal half-distance a = {a} must be positive")));
    }
    if ![k2, gamma, z, big_gamma].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidParameter("two-center parameters must be finite".into()));
    }
    Ok(TwoCenterFrequencies { a2k2: a * a * k2, gamma_z: gamma * z, big_gamma })
}

fn require(spec: &ProblemSpec, keys: &[&str]) -> Result<Vec<f64>> {
    let missing: Vec<String> = keys.iter().filter(|k| spec.get(k).is_none()).map(|k| k.to_string()).collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteSpec { missing });
    }
    let values: Vec<f64> = keys.iter().map(|k| spec.get(k).unwrap()).collect();
    if let Some((k, v)) = keys.iter().zip(&values).find(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{k} = {v} must be finite")));
    }
    Ok(values)
}

fn grid_for(spec: &ProblemSpec, label: &str, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let req = spec.grids.get(label).copied().unwrap_or_default();
    let (lo, hi) = (req.lo.unwrap_or(lo), req.hi.unwrap_or(hi));
    let n = req.points.unwrap_or(DEFAULT_POINTS);
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() || n < 2 {
        return Err(Error::InvalidParameter(format!("grid for sector `{label}` must have lo < hi and at least 2 points")));
    }
    Ok(uniform_grid(lo, hi, n))
}

fn flux(spec: &ProblemSpec, label: &str, default: f64) -> Result<f64> {
    let c = spec.flux.get(label).copied().unwrap_or(default);
    if !c.is_finite() {
        return Err(Error::InvalidParameter(format!("flux constant for `{label}` must be finite")));
    }
    Ok(c)
}

fn unit_sector(label: &str, grid: &[f64]) -> Result<SectorSpec> {
    SectorSpec::new(label, grid[0], grid[grid.len() - 1], Weight::Unit)
}

fn check_units(spec: &ProblemSpec) -> Result<()> {
    if !(spec.mass > 0.0 && spec.mass.is_finite()) || !(spec.hbar > 0.0 && spec.hbar.is_finite()) {
        return Err(Error::InvalidParameter("mass and hbar must be positive and finite".into()));
    }
    Ok(())
}

/// Assembles every sector of a problem.
pub fn build_problem(spec: &ProblemSpec) -> Result<Vec<SectorSetup>> {
    check_units(spec)?;
    let (m, hbar) = (spec.mass, spec.hbar);
    match spec.kind {
        ProblemKind::FreeParticle => {
            let [k0] = require(spec, &["k0"])?[..] else { unreachable!() };
            let grid = grid_for(spec, "x", -10.0, 10.0)?;
            let sector = unit_sector("x", &grid)?;
            let energy = hbar * hbar * k0 * k0 / (2.0 * m);
            let profile = FrequencyProfile::new(sector.clone(), m, hbar, energy, Potential::zero(), 0.0)?;
            let c = flux(spec, "x", hbar * k0)?;
            let source = PairSource::Basis { kind: BasisKind::Trig { k0 }, scale: 1.0 };
            Ok(vec![SectorSetup { label: "x".into(), sector, profile, source, grid, c }])
        }
        ProblemKind::HarmonicOscillator => {
            let [omega, energy] = require(spec, &["omega", "E"])?[..] else { unreachable!() };
            if !(omega > 0.0) {
                return Err(Error::InvalidParameter(format!("omega = {omega} must be positive")));
            }
            let nu = energy / (hbar * omega) - 0.5;
            // ξ = √(2mω/ħ) x
            let scale = (2.0 * m * omega / hbar).sqrt();
            let grid = grid_for(spec, "x", -6.0 / scale, 6.0 / scale)?;
            let sector = unit_sector("x", &grid)?;
            let potential = Potential::zero().with(Term::Power { coeff: 0.5 * m * omega * omega, power: 2 });
            let profile = FrequencyProfile::new(sector.clone(), m, hbar, energy, potential, 0.0)?;
            let c = flux(spec, "x", 0.0)?;
            let source = PairSource::Basis { kind: BasisKind::Weber { nu }, scale };
            Ok(vec![SectorSetup { label: "x".into(), sector, profile, source, grid, c }])
        }
        ProblemKind::CoulombHalfline => {
            let [alpha, energy] = require(spec, &["alpha", "E"])?[..] else { unreachable!() };
            if !(energy < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "Coulomb preset needs a bound energy E < 0, got {energy}"
                )));
            }
            let lambda = (-2.0 * m * energy).sqrt() / hbar;
            let kappa = m * alpha / (hbar * hbar * lambda);
            let grid = grid_for(spec, "x", 0.05 / (2.0 * lambda), 30.0 / (2.0 * lambda))?;
            if grid[0] == 0.0 {
                return Err(Error::Singularity { q: 0.0 });
            }
            if !(grid[0] > 0.0) {
                return Err(Error::InvalidParameter("Coulomb grid must lie in x > 0".into()));
            }
            let sector = unit_sector("x", &grid)?;
            let potential = Potential::zero().with(Term::Power { coeff: -alpha, power: -1 });
            let profile = FrequencyProfile::new(sector.clone(), m, hbar, energy, potential, 0.0)?;
            let c = flux(spec, "x", 0.0)?;
            let source = PairSource::Basis { kind: BasisKind::Whittaker { kappa, lambda }, scale: 1.0 };
            Ok(vec![SectorSetup { label: "x".into(), sector, profile, source, grid, c }])
        }
        ProblemKind::TwoCenterElliptic => build_two_center(spec),
    }
}

fn build_two_center(spec: &ProblemSpec) -> Result<Vec<SectorSetup>> {
    let (m, hbar) = (spec.mass, spec.hbar);
    let mut missing = Vec::new();
    if spec.get("a").is_none() {
        missing.push("a".to_string());
    }
    if spec.get("E").is_none() && spec.get("k2").is_none() {
        missing.push("E (or k2)".to_string());
    }
    if spec.get("Gamma").is_none() && spec.get("mathieu_order").is_none() {
        missing.push("Gamma (or mathieu_order)".to_string());
    }
    if !missing.is_empty() {
        return Err(Error::IncompleteSpec { missing });
    }
    let a = spec.get("a").unwrap();
    let scale = 2.0 * m / (hbar * hbar);
    let k2 = match (spec.get("k2"), spec.get("E")) {
        (Some(k2), Some(e)) if (k2 - scale * e).abs() > 1e-12 * k2.abs().max(1.0) => {
            return Err(Error::InvalidParameter(format!("k2 = {k2} is inconsistent with E = {e}")));
        }
        (Some(k2), _) => k2,
        (None, Some(e)) => scale * e,
        (None, None) => unreachable!(),
    };
    let z = spec.get("Z").unwrap_or(1.0);
    let e2 = spec.get("e2").unwrap_or(1.0);
    let gamma = 2.0 * m * e2 * a / (hbar * hbar);
    let q_m = 0.25 * a * a * k2;

    let order = match spec.get("mathieu_order") {
        Some(l) if l >= 0.0 && l == l.floor() && l < 1e6 => Some(l as usize),
        Some(l) => return Err(Error::InvalidParameter(format!("mathieu_order = {l} must be a nonnegative integer"))),
        None => None,
    };
    let big_gamma = match (order, spec.get("Gamma")) {
        (Some(l), given) => {
            let from_order = -mathieu_char_value(l, spec.parity, q_m)? - 2.0 * q_m;
            if let Some(g) = given {
                if (g - from_order).abs() > 1e-8 * g.abs().max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Gamma = {g} is inconsistent with Mathieu order {l} (expected {from_order})"
                    )));
                }
            }
            from_order
        }
        (None, Some(g)) => g,
        (None, None) => unreachable!(),
    };
    let freq = two_center_frequencies(a, k2, gamma, z, big_gamma)?;

    let mu_grid = grid_for(spec, "mu", 0.0, 3.0)?;
    if mu_grid[0] < 0.0 {
        return Err(Error::InvalidParameter("mu grid must lie in mu >= 0".into()));
    }
    let mu_sector = unit_sector("mu", &mu_grid)?;
    // Ω_μ² = (2m/ħ²)(E_μ - V_μ) with E_μ = Γ/scale
    let mu_potential = Potential::zero()
        .with(Term::CoshSq { coeff: -freq.a2k2 / scale })
        .with(Term::Cosh { coeff: -2.0 * freq.gamma_z / scale });
    let mu_profile = FrequencyProfile::new(mu_sector.clone(), m, hbar, big_gamma / scale, mu_potential, 0.0)?
        .with_separation("Gamma", big_gamma);
    let mu_source = match order {
        Some(order) if freq.gamma_z == 0.0 => PairSource::Basis {
            kind: BasisKind::MathieuModified { order, parity: spec.parity, q: q_m },
            scale: 1.0,
        },
        _ => PairSource::Numerical,
    };

    let nu_grid = grid_for(spec, "nu", 0.0, 2.0 * std::f64::consts::PI)?;
    let nu_sector = unit_sector("nu", &nu_grid)?;
    let nu_potential = Potential::zero().with(Term::CosSq { coeff: freq.a2k2 / scale });
    let nu_profile = FrequencyProfile::new(nu_sector.clone(), m, hbar, -big_gamma / scale, nu_potential, 0.0)?
        .with_separation("Gamma", big_gamma);
    let nu_source = match order {
        Some(order) => PairSource::Basis { kind: BasisKind::Mathieu { order, parity: spec.parity, q: q_m }, scale: 1.0 },
        None => PairSource::Numerical,
    };

    Ok(vec![
        SectorSetup {
            label: "mu".into(),
            sector: mu_sector,
            profile: mu_profile,
            source: mu_source,
            grid: mu_grid,
            c: flux(spec, "mu", 0.0)?,
        },
        SectorSetup {
            label: "nu".into(),
            sector: nu_sector,
            profile: nu_profile,
            source: nu_source,
            grid: nu_grid,
            c: flux(spec, "nu", 0.0)?,
        },
    ])
}
