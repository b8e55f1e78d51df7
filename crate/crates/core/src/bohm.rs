//! Bohmian guiding fields built from Liouville-normalised amplitudes.

use crate::catalog::SectorSpec;
use crate::error::{Error, Result};
use crate::ermakov::ErmakovAmplitude;
use crate::interp::Pchip;
use crate::linear::{FrequencyField, FundamentalPair, IntegrationSettings};
use crate::ode;

/// Amplitudes below this count as nodes of the guiding field.
pub const NODE_FLOOR: f64 = 1e-10;
/// Tolerance on `|Σ C|` when the stationary flux constraint is enforced.
pub const FLUX_TOL: f64 = 1e-12;
/// Trajectory tolerances relative to the field settings.
pub const TRAJECTORY_TOL_FACTOR: f64 = 1e-4;

/// Per-sector Bohmian fields.
#[derive(Debug, Clone, PartialEq)]
pub struct BohmSector {
    pub c: f64,
    pub grid: Vec<f64>,
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub energy: f64,
    pub invariant: Vec<f64>,
}

/// `R = ρ/√s`.
pub fn physical_amplitude(amp: &ErmakovAmplitude, sector: &SectorSpec) -> Result<Vec<f64>> {
    amp.grid
        .iter()
        .zip(&amp.rho)
        .map(|(&q, &rho)| {
            sector.check_point(q)?;
            let s = sector.weight().value(q);
            if !(s > 0.0) {
                return Err(Error::Singularity { q });
            }
            Ok(rho / s.sqrt())
        })
        .collect()
}

/// `p = C/R²`; identically zero when `C = 0`.
pub fn momentum_field(c: f64, grid: &[f64], r: &[f64]) -> Result<Vec<f64>> {
    if grid.len() != r.len() {
        return Err(Error::GridMismatch);
    }
    if c == 0.0 {
        return Ok(vec![0.0; r.len()]);
    }
    let nodes: Vec<f64> = grid.iter().zip(r).filter(|(_, &v)| !(v.abs() > NODE_FLOOR)).map(|(&q, _)| q).collect();
    if !nodes.is_empty() {
        return Err(Error::NodeSingularity { nodes });
    }
    Ok(r.iter().map(|v| c / (v * v)).collect())
}

/// `Q = -(ħ²/2m) ψ''/ψ`.
pub fn quantum_potential(grid: &[f64], psi: &[f64], d2psi: &[f64], mass: f64, hbar: f64) -> Result<Vec<f64>> {
    if grid.len() != psi.len() || psi.len() != d2psi.len() {
        return Err(Error::GridMismatch);
    }
    let nodes: Vec<f64> = grid.iter().zip(psi).filter(|(_, &v)| v == 0.0).map(|(&q, _)| q).collect();
    if !nodes.is_empty() {
        return Err(Error::NodeSingularity { nodes });
    }
    let f = hbar * hbar / (2.0 * mass);
    Ok(psi.iter().zip(d2psi).map(|(p, d2)| -f * d2 / p).collect())
}

/// `ρ''` of a superposed amplitude from the pair and the linear equation,
/// `ρ'' = (P - ρ'²)/ρ - Ω²ρ` with `P = A y1'² + B y2'² + 2D y1'y2'`.
///
/// In the `k = 0` limit `ρ = |y|` and `ρ'' = -Ω²ρ` is used directly.
pub fn amplitude_second_derivative<F: FrequencyField + ?Sized>(
    amp: &ErmakovAmplitude,
    pair: &FundamentalPair,
    field: &F,
) -> Result<Vec<f64>> {
    let c = amp.coefficients.ok_or_else(|| Error::InvalidParameter("amplitude has no Pinney coefficients".into()))?;
    if pair.len() != amp.grid.len() {
        return Err(Error::GridMismatch);
    }
    let (dy1, dy2) = (pair.dy1(), pair.dy2());
    Ok((0..amp.grid.len())
        .map(|i| {
            let (r, dr) = (amp.rho[i], amp.drho[i]);
            let w2 = field.omega2(amp.grid[i]);
            if c.k == 0.0 {
                -w2 * r
            } else {
                let p = c.a * dy1[i] * dy1[i] + c.b * dy2[i] * dy2[i] + 2.0 * c.d * dy1[i] * dy2[i];
                (p - dr * dr) / r - w2 * r
            }
        })
        .collect())
}

/// Quantum potential of the amplitude, `-(ħ²/2m) ρ''/ρ`; at exact nodes
/// (`k = 0` only) the ratio is continued by `Ω²`.
pub fn amplitude_quantum_potential<F: FrequencyField + ?Sized>(
    amp: &ErmakovAmplitude,
    pair: &FundamentalPair,
    field: &F,
    mass: f64,
    hbar: f64,
) -> Result<Vec<f64>> {
    let d2 = amplitude_second_derivative(amp, pair, field)?;
    let f = hbar * hbar / (2.0 * mass);
    Ok(amp
        .grid
        .iter()
        .zip(amp.rho.iter().zip(&d2))
        .map(|(&q, (&r, &d))| if r == 0.0 { f * field.omega2(q) } else { -f * d / r })
        .collect())
}

/// Largest `|p_L²/2m + Q - (ħ²/2m)Ω²|` with `p_L = C/ρ²`, relative to
/// `max(|E|, max (ħ²/2m)|Ω²|)`.
///
/// For cartesian sectors with no separation shift this is the residual of
/// `p²/2m + V + Q = E`.
pub fn energy_residual<F: FrequencyField + ?Sized>(
    amp: &ErmakovAmplitude,
    q_pot: &[f64],
    field: &F,
    c: f64,
    mass: f64,
    hbar: f64,
    energy: f64,
) -> f64 {
    let f = hbar * hbar / (2.0 * mass);
    let mut scale = energy.abs();
    let mut worst: f64 = 0.0;
    for (i, &q) in amp.grid.iter().enumerate() {
        let target = f * field.omega2(q);
        scale = scale.max(target.abs());
        let r = amp.rho[i];
        let kinetic = if c == 0.0 || r == 0.0 { 0.0 } else { (c / (r * r)).powi(2) / (2.0 * mass) };
        worst = worst.max((kinetic + q_pot[i] - target).abs());
    }
    worst / scale.max(f64::MIN_POSITIVE)
}

/// Largest `|p R² - C| / |C|`; zero when `C = 0`.
pub fn continuity_residual(c: f64, r: &[f64], p: &[f64]) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    r.iter().zip(p).map(|(r, p)| (p * r * r - c).abs() / c.abs()).fold(0.0, f64::max)
}

/// Guiding-field quadrature `ẋ = C/(m R²(x))` with monotone cubic `R`.
#[derive(Debug, Clone)]
pub struct GuidingField {
    r: Pchip,
    c: f64,
    mass: f64,
}

impl GuidingField {
    pub fn new(c: f64, grid: &[f64], r: &[f64], mass: f64) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::InvalidParameter(format!("mass = {mass} must be positive")));
        }
        Ok(GuidingField { r: Pchip::new(grid, r)?, c, mass })
    }

    pub fn velocity(&self, x: f64) -> f64 {
        let r = self.r.eval(x);
        self.c / (self.mass * r * r)
    }

    /// Positions at `t_grid` (monotone, starting at the release time) for a
    /// release at `x0`.
    pub fn trajectory(&self, x0: f64, t_grid: &[f64], settings: &IntegrationSettings) -> Result<Vec<f64>> {
        let (lo, hi) = self.r.span();
        if !(x0 >= lo && x0 <= hi) {
            return Err(Error::InvalidParameter(format!("x0 = {x0} outside the field grid [{lo}, {hi}]")));
        }
        let Some(&t0) = t_grid.first() else {
            return Ok(Vec::new());
        };
        if self.c == 0.0 {
            return Ok(vec![x0; t_grid.len()]);
        }
        settings.validate()?;
        let slack = 1e-9 * (hi - lo);
        let rhs = |_t: f64, s: &[f64; 1]| [self.velocity(s[0])];
        let mut last = (t0, x0);
        let halt = move |t: f64, s: &[f64; 1]| {
            let x = s[0];
            let prev = std::mem::replace(&mut last, (t, x));
            if x < lo - slack || x > hi + slack {
                // linear estimate of the crossing time within the last step
                let edge = if x < lo { lo } else { hi };
                let frac = if x != prev.1 { ((edge - prev.1) / (x - prev.1)).clamp(0.0, 1.0) } else { 1.0 };
                Some(Error::PathExit { t: prev.0 + frac * (t - prev.0) })
            } else if self.r.eval(x).abs() <= NODE_FLOOR {
                Some(Error::NodeApproach { q: x })
            } else {
                None
            }
        };
        if self.r.eval(x0).abs() <= NODE_FLOOR {
            return Err(Error::NodeApproach { q: x0 });
        }
        let tol = settings.scaled(TRAJECTORY_TOL_FACTOR).tolerances();
        let out = ode::integrate(&rhs, t0, [x0], t_grid, tol, halt)?;
        Ok(out.into_iter().map(|s| s[0]).collect())
    }

    /// Integrates forward over `t_grid` and back again; returns the closure
    /// error `|x_back(t0) - x0|`.
    pub fn reversal_error(&self, x0: f64, t_grid: &[f64], settings: &IntegrationSettings) -> Result<f64> {
        let forward = self.trajectory(x0, t_grid, settings)?;
        let Some(&x_end) = forward.last() else {
            return Ok(0.0);
        };
        let back_times: Vec<f64> = t_grid.iter().rev().copied().collect();
        let back = self.trajectory(x_end, &back_times, settings)?;
        Ok((back[back.len() - 1] - x0).abs())
    }
}

/// Trajectory through a sampled guiding field.
pub fn trajectory(
    c: f64,
    grid: &[f64],
    r: &[f64],
    mass: f64,
    x0: f64,
    t_grid: &[f64],
    settings: &IntegrationSettings,
) -> Result<Vec<f64>> {
    GuidingField::new(c, grid, r, mass)?.trajectory(x0, t_grid, settings)
}

/// Flux constants per sector.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FluxLedger {
    pub entries: Vec<(String, f64)>,
}

impl FluxLedger {
    pub fn push(&mut self, label: impl Into<String>, c: f64) {
        self.entries.push((label.into(), c));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxCheck {
    pub residual: f64,
    pub pass: bool,
    pub enforced: bool,
    pub note: Option<String>,
}

/// `|Σ C|`, passing when enforcement is off or the sum vanishes to `1e-12`.
pub fn flux_constraint_check(ledger: &FluxLedger, enforce: bool) -> Result<FluxCheck> {
    if ledger.entries.is_empty() {
        return Err(Error::InvalidParameter("flux ledger is empty".into()));
    }
    let residual = ledger.entries.iter().map(|(_, c)| c).sum::<f64>().abs();
    let within = residual <= FLUX_TOL;
    let note = (!enforce && !within).then(|| "net flux is nonzero; constraint not enforced (open sectors)".to_string());
    Ok(FluxCheck { residual, pass: within || !enforce, enforced: enforce, note })
}
