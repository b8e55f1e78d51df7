//! Ermakov–Pinney amplitudes: quadratic superposition over a linear pair,
//! direct nonlinear integration, and the Ermakov–Lewis invariant.

use crate::error::{Error, Result};
use crate::linear::{integrate_on_grid, midpoint_index, FrequencyField, FundamentalPair, IntegrationSettings};
use crate::ode;

/// Smallest amplitude tolerated by the direct integrator.
pub const NODE_THRESHOLD: f64 = 1e-8;
const CONSTRAINT_TOL: f64 = 1e-10;

/// Coefficients of `ρ² = A y1² + B y2² + 2D y1 y2` and the source strength `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinneyCoefficients {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub k: f64,
}

impl PinneyCoefficients {
    pub fn new(a: f64, b: f64, d: f64, k: f64) -> Result<Self> {
        if ![a, b, d, k].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("Pinney coefficients must be finite".into()));
        }
        if k < 0.0 {
            return Err(Error::InvalidParameter(format!("k = {k} must be nonnegative")));
        }
        Ok(PinneyCoefficients { a, b, d, k })
    }

    /// `AB - D² - k/W²`.
    pub fn constraint_residual(&self, w: f64) -> f64 {
        self.a * self.b - self.d * self.d - self.k / (w * w)
    }

    pub fn validate(&self, w: f64) -> Result<()> {
        let residual = self.constraint_residual(w);
        if residual.abs() > CONSTRAINT_TOL * (self.k / (w * w)).max(1.0) || !residual.is_finite() {
            return Err(Error::ConstraintViolation { residual });
        }
        if self.a < 0.0 || self.b < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "A = {} and B = {} must be nonnegative",
                self.a, self.b
            )));
        }
        Ok(())
    }

    /// Completes `(A, B, k)` with `D = sign·√(AB - k/W²)`.
    pub fn from_ab(a: f64, b: f64, k: f64, w: f64, negative: bool) -> Result<Self> {
        let target = k / (w * w);
        let radicand = a * b - target;
        let d = if radicand >= 0.0 {
            radicand.sqrt()
        } else if -radicand <= CONSTRAINT_TOL * target.max(1.0) {
            0.0
        } else {
            return Err(Error::ConstraintViolation { residual: radicand });
        };
        let c = PinneyCoefficients::new(a, b, if negative { -d } else { d }, k)?;
        c.validate(w)?;
        Ok(c)
    }

    /// `A = B = √k/|W|, D = 0` for `k > 0`; `A = 1, B = D = 0` for `k = 0`.
    pub fn symmetric(k: f64, w: f64) -> Result<Self> {
        if k > 0.0 {
            let a = k.sqrt() / w.abs();
            PinneyCoefficients::new(a, a, 0.0, k)
        } else {
            PinneyCoefficients::new(1.0, 0.0, 0.0, k)
        }
    }
}

/// Sampled EP amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ErmakovAmplitude {
    pub grid: Vec<f64>,
    pub rho: Vec<f64>,
    pub drho: Vec<f64>,
    pub k: f64,
    /// set when built by superposition
    pub coefficients: Option<PinneyCoefficients>,
    /// zero crossings of the underlying linear combination (`k = 0` only)
    pub nodes: Vec<f64>,
}

/// `ρ = √(A y1² + B y2² + 2D y1 y2)` with its chain-rule derivative.
///
/// With `k = 0` the form is a perfect square and `ρ = |√A y1 ± √B y2|`; its
/// zero crossings are reported in `nodes`.
pub fn pinney_amplitude(coeffs: &PinneyCoefficients, pair: &FundamentalPair) -> Result<ErmakovAmplitude> {
    coeffs.validate(pair.wronskian())?;
    let PinneyCoefficients { a, b, d, k } = *coeffs;
    let grid = pair.grid();
    let (y1, dy1, y2, dy2) = (pair.y1(), pair.dy1(), pair.y2(), pair.dy2());
    let n = grid.len();
    let (mut rho, mut drho) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let mut nodes = Vec::new();
    if k > 0.0 {
        for i in 0..n {
            let form = a * y1[i] * y1[i] + b * y2[i] * y2[i] + 2.0 * d * y1[i] * y2[i];
            if !(form > 0.0) {
                return Err(Error::NonPositiveForm { q: grid[i] });
            }
            let r = form.sqrt();
            rho.push(r);
            drho.push((a * y1[i] * dy1[i] + b * y2[i] * dy2[i] + d * (dy1[i] * y2[i] + y1[i] * dy2[i])) / r);
        }
    } else {
        if a == 0.0 && b == 0.0 {
            return Err(Error::NonPositiveForm { q: grid[0] });
        }
        let s = if d < 0.0 { -1.0 } else { 1.0 };
        let (ca, cb) = (a.sqrt(), s * b.sqrt());
        let mut prev: Option<f64> = None;
        for i in 0..n {
            let u = ca * y1[i] + cb * y2[i];
            let du = ca * dy1[i] + cb * dy2[i];
            if u == 0.0 {
                nodes.push(grid[i]);
            } else if let Some(p) = prev {
                if p != 0.0 && p.signum() != u.signum() {
                    let t = p / (p - u);
                    nodes.push(grid[i - 1] + t * (grid[i] - grid[i - 1]));
                }
            }
            prev = Some(u);
            rho.push(u.abs());
            drho.push(if u < 0.0 { -du } else { du });
        }
    }
    Ok(ErmakovAmplitude { grid: grid.to_vec(), rho, drho, k, coefficients: Some(*coeffs), nodes })
}

/// Deviation of a sampled amplitude from an independent adaptive solve of
/// `ρ'' + Ω²ρ = k/ρ³` started from its own state at the grid midpoint.
///
/// For `k > 0` this is `max |ρ_direct - ρ| / ρ`. For `k = 0` the linear
/// equation is integrated instead and `max ||u| - ρ| / max ρ` is returned,
/// since `ρ = |u|` has nodes.
pub fn ep_deviation<F: FrequencyField + ?Sized>(
    amp: &ErmakovAmplitude,
    field: &F,
    settings: &IntegrationSettings,
) -> Result<f64> {
    let grid = &amp.grid;
    let i0 = midpoint_index(grid);
    let ic = (amp.rho[i0], amp.drho[i0]);
    if amp.k > 0.0 {
        let direct = solve_ep_direct(field, amp.k, ic, grid[i0], grid, settings)?;
        Ok(direct.rho.iter().zip(&amp.rho).fold(0.0, |m, (d, r)| m.max((d - r).abs() / r)))
    } else {
        let (u, _) = integrate_on_grid(field, grid[i0], ic, grid, settings)?;
        let peak = amp.rho.iter().fold(0.0_f64, |m, r| m.max(*r));
        let worst = u.iter().zip(&amp.rho).fold(0.0_f64, |m, (u, r)| m.max((u.abs() - r).abs()));
        Ok(if peak > 0.0 { worst / peak } else { worst })
    }
}

/// Integrates `ρ'' + Ω²ρ = k/ρ³` from `ic` at `anchor` to every grid point.
///
/// Stops with [`Error::NodeApproach`] if `ρ` falls below [`NODE_THRESHOLD`].
pub fn solve_ep_direct<F: FrequencyField + ?Sized>(
    field: &F,
    k: f64,
    ic: (f64, f64),
    anchor: f64,
    grid: &[f64],
    settings: &IntegrationSettings,
) -> Result<ErmakovAmplitude> {
    if !(ic.0 > 0.0) || !ic.1.is_finite() {
        return Err(Error::InvalidParameter(format!("initial amplitude {} must be positive", ic.0)));
    }
    if !(k >= 0.0) {
        return Err(Error::InvalidParameter(format!("k = {k} must be nonnegative")));
    }
    settings.validate()?;
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
    }
    field.check_interval(grid[0].min(anchor), grid[grid.len() - 1].max(anchor))?;
    let rhs = |q: f64, s: &[f64; 2]| [s[1], -field.omega2(q) * s[0] + k / (s[0] * s[0] * s[0])];
    let halt = |q: f64, s: &[f64; 2]| (s[0] < NODE_THRESHOLD).then_some(Error::NodeApproach { q });
    let split = grid.partition_point(|&q| q < anchor);
    let tol = settings.tolerances();
    let left_targets: Vec<f64> = grid[..split].iter().rev().copied().collect();
    let left = ode::integrate(&rhs, anchor, [ic.0, ic.1], &left_targets, tol, halt)?;
    let right = ode::integrate(&rhs, anchor, [ic.0, ic.1], &grid[split..], tol, halt)?;
    let (rho, drho) = left.into_iter().rev().chain(right).map(|s| (s[0], s[1])).unzip();
    Ok(ErmakovAmplitude { grid: grid.to_vec(), rho, drho, k, coefficients: None, nodes: Vec::new() })
}

/// `I = ½[(ρy' - ρ'y)² + k y²/ρ²]` at every grid point.
pub fn el_invariant(amp: &ErmakovAmplitude, y: &[f64], dy: &[f64]) -> Result<Vec<f64>> {
    let n = amp.grid.len();
    if y.len() != n || dy.len() != n {
        return Err(Error::GridMismatch);
    }
    Ok((0..n)
        .map(|i| {
            let (r, dr) = (amp.rho[i], amp.drho[i]);
            let cross = r * dy[i] - dr * y[i];
            let source = if amp.k > 0.0 { amp.k * y[i] * y[i] / (r * r) } else { 0.0 };
            0.5 * (cross * cross + source)
        })
        .collect())
}

/// Spread of invariant samples around the value at the grid midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    /// `max |I - I_ref| / max(|I_ref|, 1e-14)`
    pub max_relative: f64,
    /// where the maximum is attained
    pub at: f64,
    pub reference: f64,
    /// the reference value is below `1e-14`, so `max_relative` is effectively absolute
    pub absolute: bool,
}

pub fn invariant_drift(grid: &[f64], samples: &[f64]) -> Result<Drift> {
    if grid.len() != samples.len() {
        return Err(Error::GridMismatch);
    }
    if samples.len() < 2 {
        return Err(Error::InvalidParameter("drift needs at least two samples".into()));
    }
    let reference = samples[midpoint_index(grid)];
    let absolute = reference.abs() <= 1e-14;
    let scale = reference.abs().max(1e-14);
    let (mut max_relative, mut at) = (0.0, grid[0]);
    for (&q, &s) in grid.iter().zip(samples) {
        let dev = (s - reference).abs() / scale;
        if dev > max_relative || dev.is_nan() {
            max_relative = dev;
            at = q;
        }
    }
    Ok(Drift { max_relative, at, reference, absolute })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::uniform_grid;
    use crate::special::{trig_pair, weber_pair};
    use proptest::prelude::*;

    fn settings() -> IntegrationSettings {
        IntegrationSettings::default()
    }

    fn max_rel(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| ((x - y) / y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn free_particle_amplitude_is_flat() {
        let grid = uniform_grid(-10.0, 10.0, 2001);
        let pair = trig_pair(1.0, &grid).unwrap();
        let c = PinneyCoefficients::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let amp = pinney_amplitude(&c, &pair).unwrap();
        assert!(amp.rho.iter().all(|r| (r - 1.0).abs() <= 1e-12));
        assert!(amp.drho.iter().all(|r| r.abs() <= 1e-12));
        let inv = el_invariant(&amp, pair.y1(), pair.dy1()).unwrap();
        assert!(inv.iter().all(|i| (i - 0.5).abs() <= 1e-12));
    }

    #[test]
    fn linear_limit_is_abs_y1() {
        let grid = uniform_grid(-5.0, 5.0, 101);
        let pair = trig_pair(1.0, &grid).unwrap();
        let c = PinneyCoefficients::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let amp = pinney_amplitude(&c, &pair).unwrap();
        for (r, y) in amp.rho.iter().zip(pair.y1()) {
            assert_eq!(*r, y.abs());
        }
        // cos has zeros at ±π/2 and ±3π/2 within [-5, 5]
        assert_eq!(amp.nodes.len(), 4);
        assert!(amp.nodes.iter().any(|z| (z - std::f64::consts::FRAC_PI_2).abs() < 1e-3));
        let inv = el_invariant(&amp, pair.y1(), pair.dy1()).unwrap();
        assert!(inv.iter().all(|i| i.abs() < 1e-28));
    }

    #[test]
    fn constraint_is_enforced() {
        let grid = uniform_grid(0.0, 1.0, 11);
        let pair = trig_pair(1.0, &grid).unwrap();
        let c = PinneyCoefficients::new(1.0, 1.0, 0.1, 1.0).unwrap();
        assert!(matches!(pinney_amplitude(&c, &pair), Err(Error::ConstraintViolation { .. })));
        let c = PinneyCoefficients::from_ab(2.0, 1.0, 1.0, 1.0, true).unwrap();
        assert_eq!(c.d, -1.0);
        assert!(PinneyCoefficients::from_ab(0.5, 1.0, 1.0, 1.0, false).is_err());
    }

    #[test]
    fn fixed_points_of_direct_solver() {
        let grid = uniform_grid(0.0, 10.0, 201);
        for (omega2, k) in [(1.0, 1.0), (4.0, 4.0)] {
            let f = move |_q: f64| omega2;
            let amp = solve_ep_direct(&f, k, (1.0, 0.0), 0.0, &grid, &settings()).unwrap();
            assert!(amp.rho.iter().all(|r| (r - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn direct_solver_reports_nodes() {
        let grid = uniform_grid(0.0, 4.0, 41);
        let f = |_q: f64| 1.0;
        let err = solve_ep_direct(&f, 0.0, (1.0, 0.0), 0.0, &grid, &settings()).unwrap_err();
        match err {
            Error::NodeApproach { q } => assert!((q - std::f64::consts::FRAC_PI_2).abs() < 0.05),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn weber_superposition_matches_direct() {
        let grid = uniform_grid(-4.0, 4.0, 801);
        let pair = weber_pair(0.5, &grid, &settings()).unwrap();
        let c = PinneyCoefficients::from_ab(2.0, 1.0, 1.0, pair.wronskian(), false).unwrap();
        let amp = pinney_amplitude(&c, &pair).unwrap();
        let i0 = midpoint_index(&grid);
        let f = |xi: f64| 1.0 - 0.25 * xi * xi;
        assert!(ep_deviation(&amp, &f, &settings()).unwrap() <= 1e-6);
        let direct = solve_ep_direct(&f, 1.0, (amp.rho[i0], amp.drho[i0]), grid[i0], &grid, &settings()).unwrap();
        assert!(max_rel(&direct.rho, &amp.rho) <= 1e-6);
    }

    #[test]
    fn invariant_constant_for_weber_amplitude() {
        let grid = uniform_grid(-6.0, 6.0, 2001);
        let pair = weber_pair(0.5, &grid, &settings()).unwrap();
        let c = PinneyCoefficients::symmetric(1.0, pair.wronskian()).unwrap();
        let amp = pinney_amplitude(&c, &pair).unwrap();
        for (y, dy) in [(pair.y1(), pair.dy1()), (pair.y2(), pair.dy2())] {
            let inv = el_invariant(&amp, y, dy).unwrap();
            assert!(invariant_drift(&grid, &inv).unwrap().max_relative <= 1e-8);
        }
        // I(y1) = ½ B W², I(y2) = ½ A W²
        let inv = el_invariant(&amp, pair.y1(), pair.dy1()).unwrap();
        let w2 = pair.wronskian().powi(2);
        assert!((inv[0] - 0.5 * c.b * w2).abs() < 1e-9);
    }

    #[test]
    fn drift_examples() {
        let grid = uniform_grid(0.0, 1.0, 11);
        let flat = vec![0.7; 11];
        assert_eq!(invariant_drift(&grid, &flat).unwrap().max_relative, 0.0);
        let mut bumped = flat.clone();
        bumped[2] *= 1.0 + 1e-5;
        let d = invariant_drift(&grid, &bumped).unwrap();
        assert!(d.max_relative >= 0.9e-5);
        assert_eq!(d.at, grid[2]);
        let tiny = vec![0.0; 11];
        assert!(invariant_drift(&grid, &tiny).unwrap().absolute);
    }

    proptest! {
        #[test]
        fn scaling_covariance(c in 0.2f64..5.0, a in 0.1f64..4.0, k in 0.01f64..3.0, k0 in 0.3f64..3.0) {
            let grid = uniform_grid(-3.0, 3.0, 61);
            let pair = trig_pair(k0, &grid).unwrap();
            let base = PinneyCoefficients::from_ab(a, (k / (k0 * k0) + 0.5) / a, k, k0, false).unwrap();
            let rho = pinney_amplitude(&base, &pair).unwrap().rho;
            let scaled_pair = pair.scaled(c, 1.0 / c);
            let scaled = PinneyCoefficients::new(base.a / (c * c), base.b * c * c, base.d, k).unwrap();
            let rho2 = pinney_amplitude(&scaled, &scaled_pair).unwrap().rho;
            prop_assert!(max_rel(&rho2, &rho) <= 1e-12);
        }

        #[test]
        fn superposition_solves_ep(a in 0.2f64..3.0, extra in 0.0f64..2.0, k in 0.05f64..2.0, neg in any::<bool>()) {
            let grid = uniform_grid(-3.0, 3.0, 301);
            let pair = trig_pair(1.3, &grid).unwrap();
            let w = pair.wronskian();
            let b = (k / (w * w) + extra) / a;
            let c = PinneyCoefficients::from_ab(a, b, k, w, neg).unwrap();
            let amp = pinney_amplitude(&c, &pair).unwrap();
            let f = |_q: f64| 1.3 * 1.3;
            prop_assert!(ep_deviation(&amp, &f, &IntegrationSettings::default()).unwrap() <= 1e-6);
        }
    }
}
