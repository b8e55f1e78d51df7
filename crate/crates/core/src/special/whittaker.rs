//! Whittaker functions with `μ = 1/2` for the Coulomb half-line.

use super::gamma::recip_gamma;
use crate::error::{Error, Result};
use crate::linear::{integrate_on_grid, midpoint_index, FundamentalPair, IntegrationSettings};

const SERIES_TOL: f64 = 1e-15;
const SERIES_CAP: usize = 20_000;
/// Smallest anchor for the decaying column, in `z`.
pub const ANCHOR_MIN_Z: f64 = 30.0;

/// `(M_{κ,1/2}(z), dM/dz)` from the regular series `z e^{-z/2} ₁F₁(1-κ; 2; z)`.
pub fn whittaker_m(kappa: f64, z: f64) -> Result<(f64, f64)> {
    if !(z >= 0.0 && z.is_finite() && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("whittaker_m needs finite kappa and z >= 0, got ({kappa}, {z})")));
    }
    let a = 1.0 - kappa;
    let b = 2.0;
    // F = Σ t_n, G = Σ n t_n = z F'
    let (mut f, mut g) = (1.0, 0.0);
    let mut t = 1.0;
    let mut n = 0usize;
    loop {
        let nf = n as f64;
        let ratio = (a + nf) * z / ((b + nf) * (nf + 1.0));
        t *= ratio;
        n += 1;
        f += t;
        g += n as f64 * t;
        if t == 0.0 {
            break;
        }
        // once the ratio is below one and shrinking, the tail is geometric-bounded
        let nf = n as f64;
        let next = ((a + nf) * z / ((b + nf) * (nf + 1.0))).abs();
        if next < 1.0 && nf > (a.abs() + z) {
            let tail_f = (t * next).abs() / (1.0 - next);
            let tail_g = (nf + 1.0) * tail_f / (1.0 - next);
            if tail_f <= SERIES_TOL * f.abs() && tail_g <= SERIES_TOL * g.abs().max(f.abs()) {
                break;
            }
        }
        if n >= SERIES_CAP {
            return Err(Error::SeriesNonConvergence {
                what: format!("M_(kappa = {kappa}, 1/2)({z})"),
                terms: n,
                tail: t.abs(),
            });
        }
    }
    let e = (-0.5 * z).exp();
    Ok((z * e * f, e * ((1.0 - 0.5 * z) * f + g)))
}

/// Frequency of the Whittaker equation in `x`, with `z = 2λx`.
pub fn whittaker_frequency(kappa: f64, lambda: f64) -> impl Fn(f64) -> f64 + Sync {
    move |x: f64| -lambda * lambda + 2.0 * lambda * kappa / x
}

fn check_inputs(kappa: f64, x_grid: &[f64], lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
    }
    if !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!("kappa = {kappa} must be finite")));
    }
    if x_grid.first().map_or(true, |&x| !(x > 0.0)) {
        return Err(Error::InvalidParameter("Whittaker grid must lie in x > 0".into()));
    }
    Ok(())
}

/// Regular column `M_{κ,1/2}(2λx)` and its `x`-derivative.
pub fn whittaker_m_column(kappa: f64, x_grid: &[f64], lambda: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_inputs(kappa, x_grid, lambda)?;
    let mut y = Vec::with_capacity(x_grid.len());
    let mut dy = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let (m, dm) = whittaker_m(kappa, 2.0 * lambda * x)?;
        y.push(m);
        dy.push(2.0 * lambda * dm);
    }
    Ok((y, dy))
}

/// Decaying column, seeded with `z^κ e^{-z/2}` at `z = max(30, 2 z_max)` and
/// integrated inward.
pub fn whittaker_w_column(
    kappa: f64,
    x_grid: &[f64],
    lambda: f64,
    settings: &IntegrationSettings,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_inputs(kappa, x_grid, lambda)?;
    let z_max = 2.0 * lambda * x_grid[x_grid.len() - 1];
    let z_a = ANCHOR_MIN_Z.max(2.0 * z_max);
    let x_a = z_a / (2.0 * lambda);
    // integrate the seed without its exponential factor, then restore it
    let lead = z_a.powf(kappa);
    let seed = (lead, 2.0 * lambda * (kappa / z_a - 0.5) * lead);
    let field = whittaker_frequency(kappa, lambda);
    let (y, dy) = integrate_on_grid(&field, x_a, seed, x_grid, settings)?;
    let e = (-0.5 * z_a).exp();
    Ok((y.iter().map(|v| v * e).collect(), dy.iter().map(|v| v * e).collect()))
}

/// Pair `(M_{κ,1/2}(2λx), W_{κ,1/2}(2λx))`; degenerate at `κ = 1, 2, 3, …`.
pub fn whittaker_pair(
    kappa: f64,
    x_grid: &[f64],
    lambda: f64,
    settings: &IntegrationSettings,
) -> Result<FundamentalPair> {
    check_inputs(kappa, x_grid, lambda)?;
    // W{M, W} = -1/Γ(1-κ) in z
    if recip_gamma(1.0 - kappa).abs() <= 1e-10 {
        return Err(Error::DegeneratePair { basis: format!("Whittaker (kappa = {kappa})") });
    }
    let (y1, dy1) = whittaker_m_column(kappa, x_grid, lambda)?;
    let (y2, dy2) = whittaker_w_column(kappa, x_grid, lambda, settings)?;
    let anchor = midpoint_index(x_grid);
    FundamentalPair::from_columns(x_grid.to_vec(), y1, dy1, y2, dy2, anchor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{uniform_grid, wronskian_check};

    #[test]
    fn ground_state_value() {
        let (m, _) = whittaker_m(1.0, 1.0).unwrap();
        assert!((m - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn first_laguerre_root() {
        let ratio = |z: f64| whittaker_m(2.0, z).unwrap().0 / (z * (-0.5 * z).exp());
        assert!(ratio(2.0).abs() < 1e-14);
        assert!(ratio(1.0) > 0.0 && ratio(3.0) < 0.0);
    }

    #[test]
    fn matches_reference_values() {
        let cases = [
            (1.3, 0.5, 0.358_362_384_524_860_5, 0.471_524_424_689_063_35),
            (1.3, 5.0, -0.399_492_357_180_828_9, -0.288_629_794_485_202_2),
            (0.4, 12.0, 105.831_157_010_403_6, 48.818_330_308_254_32),
            (-0.8, 2.0, 4.664_332_938_329_263, 4.391_124_502_990_375),
        ];
        for (k, z, m, dm) in cases {
            let (v, dv) = whittaker_m(k, z).unwrap();
            assert!(((v - m) / m).abs() < 1e-12, "kappa={k} z={z}: {v} vs {m}");
            assert!(((dv - dm) / dm).abs() < 1e-12, "kappa={k} z={z}: {dv} vs {dm}");
        }
    }

    #[test]
    fn decaying_column_is_proportional_to_w() {
        // W_{κ,1/2}(z) reference values at z = 0.5 and 5 for κ = 1.3
        let lambda = 0.5;
        let grid = [0.5, 5.0];
        let (w, _) = whittaker_w_column(1.3, &grid, lambda, &IntegrationSettings::default()).unwrap();
        let ratio = w[1] / w[0];
        let exact = 0.612_257_933_285_452_0 / 0.034_288_430_950_449_54;
        assert!(((ratio - exact) / exact).abs() < 1e-8);
    }

    #[test]
    fn pair_wronskian_constant() {
        let grid = uniform_grid(0.05, 30.0, 2001);
        let pair = whittaker_pair(1.3, &grid, 0.5, &IntegrationSettings::default()).unwrap();
        let w = pair.wronskian();
        assert!(w.abs() > 1e-10);
        assert!(wronskian_check(&pair) / w.abs() <= 1e-8);
    }

    #[test]
    fn quantized_kappa_is_degenerate() {
        let grid = uniform_grid(0.1, 10.0, 11);
        for k in [1.0, 2.0, 4.0] {
            assert!(matches!(
                whittaker_pair(k, &grid, 0.5, &IntegrationSettings::default()),
                Err(Error::DegeneratePair { .. })
            ));
        }
    }

    #[test]
    fn rejects_nonpositive_grid() {
        let grid = [0.0, 1.0];
        assert!(whittaker_pair(1.3, &grid, 1.0, &IntegrationSettings::default()).is_err());
    }
}
