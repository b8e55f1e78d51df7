//! Closed-form-anchored bases: trigonometric, Weber, Whittaker and Mathieu.

pub mod gamma;
pub mod mathieu;
pub mod weber;
pub mod whittaker;

pub use gamma::{gamma, recip_gamma};
pub use mathieu::{mathieu_char_value, mathieu_char_value_truncated, mathieu_coefficients, mathieu_pair, Parity};
pub use weber::{parabolic_cylinder, weber_pair};
pub use whittaker::{whittaker_m, whittaker_pair};

use crate::error::{Error, Result};
use crate::linear::{FundamentalPair, IntegrationSettings};

/// A named basis with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisKind {
    /// `cos(k0 q)`, `sin(k0 q)`; `(1, q)` when `k0 = 0`
    Trig { k0: f64 },
    Weber { nu: f64 },
    /// `M, W` with `μ = 1/2`, sampled at `z = 2λx`
    Whittaker { kappa: f64, lambda: f64 },
    Mathieu { order: usize, parity: Parity, q: f64 },
    MathieuModified { order: usize, parity: Parity, q: f64 },
}

impl BasisKind {
    pub fn name(&self) -> &'static str {
        match self {
            BasisKind::Trig { .. } => "trig",
            BasisKind::Weber { .. } => "weber",
            BasisKind::Whittaker { .. } => "whittaker",
            BasisKind::Mathieu { .. } => "mathieu",
            BasisKind::MathieuModified { .. } => "mathieu_modified",
        }
    }

    fn check(&self) -> Result<()> {
        let finite = match *self {
            BasisKind::Trig { k0 } => k0.is_finite(),
            BasisKind::Weber { nu } => nu.is_finite(),
            BasisKind::Whittaker { kappa, lambda } => kappa.is_finite() && lambda.is_finite(),
            BasisKind::Mathieu { q, .. } | BasisKind::MathieuModified { q, .. } => q.is_finite(),
        };
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{} basis parameters must be finite", self.name())))
        }
    }

    /// Samples the pair on `grid`, given in the basis' own variable
    /// (`ξ` for Weber, `x` for Whittaker).
    pub fn pair(&self, grid: &[f64], settings: &IntegrationSettings) -> Result<FundamentalPair> {
        self.check()?;
        match *self {
            BasisKind::Trig { k0 } => trig_pair(k0, grid),
            BasisKind::Weber { nu } => weber_pair(nu, grid, settings),
            BasisKind::Whittaker { kappa, lambda } => whittaker_pair(kappa, grid, lambda, settings),
            BasisKind::Mathieu { order, parity, q } => mathieu_pair(order, parity, q, grid, false, settings),
            BasisKind::MathieuModified { order, parity, q } => mathieu_pair(order, parity, q, grid, true, settings),
        }
    }
}

/// `(cos k0 q, sin k0 q)` with `W = k0`, or `(1, q)` with `W = 1` at `k0 = 0`.
pub fn trig_pair(k0: f64, grid: &[f64]) -> Result<FundamentalPair> {
    let g = grid.to_vec();
    if k0 == 0.0 {
        let n = grid.len();
        return FundamentalPair::new(g, vec![1.0; n], vec![0.0; n], grid.to_vec(), vec![1.0; n], 1.0);
    }
    let (mut y1, mut dy1, mut y2, mut dy2) = (vec![], vec![], vec![], vec![]);
    for &x in grid {
        let (s, c) = (k0 * x).sin_cos();
        y1.push(c);
        dy1.push(-k0 * s);
        y2.push(s);
        dy2.push(k0 * c);
    }
    FundamentalPair::new(g, y1, dy1, y2, dy2, k0)
}
