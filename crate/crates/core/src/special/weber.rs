//! Parabolic-cylinder functions `D_ν` from gamma-function seeds at the origin.

use std::f64::consts::PI;

use super::gamma::recip_gamma;
use crate::error::{Error, Result};
use crate::linear::{integrate_on_grid, FundamentalPair, IntegrationSettings};

/// Frequency of the Weber equation `y'' + (ν + 1/2 - ξ²/4) y = 0`.
pub fn weber_frequency(nu: f64) -> impl Fn(f64) -> f64 + Sync {
    move |xi: f64| nu + 0.5 - 0.25 * xi * xi
}

/// `(D_ν(0), D_ν'(0))`.
pub fn weber_seed(nu: f64) -> (f64, f64) {
    let d0 = PI.sqrt() * 2f64.powf(0.5 * nu) * recip_gamma(0.5 * (1.0 - nu));
    let d1 = -PI.sqrt() * 2f64.powf(0.5 * (nu + 1.0)) * recip_gamma(-0.5 * nu);
    (d0, d1)
}

/// Analytic Wronskian `W{D_ν(ξ), D_ν(-ξ)} = √(2π)/Γ(-ν)`.
pub fn weber_wronskian(nu: f64) -> f64 {
    (2.0 * PI).sqrt() * recip_gamma(-nu)
}

fn validate_seed(nu: f64, seed: (f64, f64)) -> Result<()> {
    // the seeds must reproduce the pair Wronskian at ξ = 0
    let from_seed = -2.0 * seed.0 * seed.1;
    let exact = weber_wronskian(nu);
    let scale = exact.abs().max(seed.0.abs() * seed.1.abs()).max(f64::MIN_POSITIVE);
    if (from_seed - exact).abs() > 1e-10 * scale {
        return Err(Error::InvalidParameter(format!(
            "parabolic-cylinder seeds for nu = {nu} are inconsistent ({from_seed:e} vs {exact:e})"
        )));
    }
    Ok(())
}

/// `D_ν` and its derivative on an increasing grid.
pub fn parabolic_cylinder(nu: f64, xi: &[f64], settings: &IntegrationSettings) -> Result<(Vec<f64>, Vec<f64>)> {
    if !nu.is_finite() {
        return Err(Error::InvalidParameter(format!("order nu = {nu} must be finite")));
    }
    let seed = weber_seed(nu);
    validate_seed(nu, seed)?;
    integrate_on_grid(&weber_frequency(nu), 0.0, seed, xi, settings)
}

/// Pair `y1 = D_ν(ξ)`, `y2 = D_ν(-ξ)` on `xi_grid`.
pub fn weber_pair(nu: f64, xi_grid: &[f64], settings: &IntegrationSettings) -> Result<FundamentalPair> {
    let w = weber_wronskian(nu);
    if !nu.is_finite() || w.abs() <= 1e-10 {
        return Err(Error::DegeneratePair { basis: format!("Weber (nu = {nu})") });
    }
    let (y1, dy1) = parabolic_cylinder(nu, xi_grid, settings)?;
    let mirrored: Vec<f64> = xi_grid.iter().rev().map(|x| -x).collect();
    let (m, dm) = parabolic_cylinder(nu, &mirrored, settings)?;
    let y2: Vec<f64> = m.into_iter().rev().collect();
    let dy2: Vec<f64> = dm.into_iter().rev().map(|d| -d).collect();
    FundamentalPair::new(xi_grid.to_vec(), y1, dy1, y2, dy2, w)
}
