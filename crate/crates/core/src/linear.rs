//! Linear partner equation `y'' + Ω²(q) y = 0`.
//!
//! The equation has no first-derivative term, so the Wronskian of any two
//! solutions is constant; [`wronskian_check`] measures how far a sampled pair
//! departs from that.

use crate::catalog::{FrequencyProfile, SectorSpec};
use crate::error::{Error, Result};
use crate::ode::{self, Tolerances};

/// Anything that can evaluate `Ω²(q)`.
pub trait FrequencyField: Sync {
    fn omega2(&self, q: f64) -> f64;

    /// Rejects intervals the field cannot be integrated over.
    fn check_interval(&self, _lo: f64, _hi: f64) -> Result<()> {
        Ok(())
    }
}

impl FrequencyField for FrequencyProfile {
    fn omega2(&self, q: f64) -> f64 {
        self.omega2_unchecked(q)
    }

    fn check_interval(&self, lo: f64, hi: f64) -> Result<()> {
        let sector = self.sector();
        for q in [lo, hi] {
            sector.check_point(q)?;
        }
        Ok(())
    }
}

impl<F> FrequencyField for F
where
    F: Fn(f64) -> f64 + Sync,
{
    fn omega2(&self, q: f64) -> f64 {
        self(q)
    }
}

/// Integrator settings shared by every solver in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Number of uniform output samples for interval integrations.
    pub dense_output: usize,
    /// Offset from a singular endpoint, as a fraction of the domain length.
    pub endpoint_clip: f64,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        IntegrationSettings {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            dense_output: 2001,
            endpoint_clip: 1e-3,
        }
    }
}

impl IntegrationSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidParameter("max_step must be positive".into()));
        }
        if self.dense_output < 2 {
            return Err(Error::InvalidParameter("dense_output must be at least 2".into()));
        }
        if !(self.endpoint_clip >= 0.0 && self.endpoint_clip < 0.5) {
            return Err(Error::InvalidParameter("endpoint_clip must lie in [0, 0.5)".into()));
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances { rel: self.rel_tol, abs: self.abs_tol, max_step: self.max_step }
    }

    /// Same settings with both tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        IntegrationSettings { rel_tol: self.rel_tol * factor, abs_tol: self.abs_tol * factor, ..*self }
    }
}

/// Sector domain with singular endpoints pulled in by `endpoint_clip`.
pub fn clipped_interval(sector: &SectorSpec, settings: &IntegrationSettings) -> (f64, f64) {
    let (lo, hi) = sector.domain();
    let offset = settings.endpoint_clip * (hi - lo);
    let sing = sector.singular_endpoints();
    let lo = if sing.contains(&lo) { lo + offset } else { lo };
    let hi = if sing.contains(&hi) { hi - offset } else { hi };
    (lo, hi)
}

/// `n` uniformly spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + h * i as f64 }).collect()
}

/// Samples of a single solution.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormSolution {
    pub grid: Vec<f64>,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidParameter("grid needs at least two points".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|q| !q.is_finite()) {
        return Err(Error::InvalidParameter("grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Integrates `y'' = -Ω² y` from `(anchor, ic)` to every grid point, going
/// left and right of the anchor separately.
pub fn integrate_on_grid<F: FrequencyField + ?Sized>(
    field: &F,
    anchor: f64,
    ic: (f64, f64),
    grid: &[f64],
    settings: &IntegrationSettings,
) -> Result<(Vec<f64>, Vec<f64>)> {
    settings.validate()?;
    check_grid(grid)?;
    let lo = grid[0].min(anchor);
    let hi = grid[grid.len() - 1].max(anchor);
    field.check_interval(lo, hi)?;
    let rhs = |q: f64, s: &[f64; 2]| [s[1], -field.omega2(q) * s[0]];
    let split = grid.partition_point(|&q| q < anchor);
    let tol = settings.tolerances();
    let left_targets: Vec<f64> = grid[..split].iter().rev().copied().collect();
    let left = ode::integrate(&rhs, anchor, [ic.0, ic.1], &left_targets, tol, ode::no_halt)?;
    let right = ode::integrate(&rhs, anchor, [ic.0, ic.1], &grid[split..], tol, ode::no_halt)?;
    let states = left.into_iter().rev().chain(right);
    let (mut y, mut dy) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    for s in states {
        y.push(s[0]);
        dy.push(s[1]);
    }
    Ok((y, dy))
}

/// Solves the linear partner equation on `interval` with `ic = (y, y')` at the
/// left end, sampled at `settings.dense_output` uniform points.
pub fn integrate_normal_form<F: FrequencyField + ?Sized>(
    field: &F,
    interval: (f64, f64),
    ic: (f64, f64),
    settings: &IntegrationSettings,
) -> Result<NormalFormSolution> {
    if ic == (0.0, 0.0) {
        return Err(Error::InvalidParameter("initial data (0, 0) gives the trivial solution".into()));
    }
    if !(interval.1 > interval.0) {
        return Err(Error::InvalidParameter("interval must satisfy lo < hi".into()));
    }
    settings.validate()?;
    let grid = uniform_grid(interval.0, interval.1, settings.dense_output);
    let (y, dy) = integrate_on_grid(field, interval.0, ic, &grid, settings)?;
    Ok(NormalFormSolution { grid, y, dy })
}

/// Continuous solution over `interval` (dense output of every step).
pub fn integrate_dense<F: FrequencyField + ?Sized>(
    field: &F,
    interval: (f64, f64),
    ic: (f64, f64),
    settings: &IntegrationSettings,
) -> Result<ode::DenseSolution<2>> {
    settings.validate()?;
    field.check_interval(interval.0.min(interval.1), interval.0.max(interval.1))?;
    let rhs = |q: f64, s: &[f64; 2]| [s[1], -field.omega2(q) * s[0]];
    ode::integrate_dense(&rhs, interval.0, [ic.0, ic.1], interval.1, settings.tolerances())
}

/// Two independent solutions sampled on a common grid, with their Wronskian.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalPair {
    grid: Vec<f64>,
    y1: Vec<f64>,
    dy1: Vec<f64>,
    y2: Vec<f64>,
    dy2: Vec<f64>,
    wronskian: f64,
}

impl FundamentalPair {
    /// Builds a pair and checks shapes; `wronskian` is the reference value.
    pub fn new(
        grid: Vec<f64>,
        y1: Vec<f64>,
        dy1: Vec<f64>,
        y2: Vec<f64>,
        dy2: Vec<f64>,
        wronskian: f64,
    ) -> Result<Self> {
        check_grid(&grid)?;
        let n = grid.len();
        if [y1.len(), dy1.len(), y2.len(), dy2.len()].iter().any(|&l| l != n) {
            return Err(Error::GridMismatch);
        }
        if !(wronskian.is_finite() && wronskian != 0.0) {
            return Err(Error::DegeneratePair { basis: "sampled".into() });
        }
        Ok(FundamentalPair { grid, y1, dy1, y2, dy2, wronskian })
    }

    /// Builds a pair taking the Wronskian at grid index `anchor`.
    pub fn from_columns(
        grid: Vec<f64>,
        y1: Vec<f64>,
        dy1: Vec<f64>,
        y2: Vec<f64>,
        dy2: Vec<f64>,
        anchor: usize,
    ) -> Result<Self> {
        if anchor >= grid.len() || [y1.len(), dy1.len(), y2.len(), dy2.len()].iter().any(|&l| l != grid.len()) {
            return Err(Error::GridMismatch);
        }
        let w = y1[anchor] * dy2[anchor] - dy1[anchor] * y2[anchor];
        FundamentalPair::new(grid, y1, dy1, y2, dy2, w)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
    pub fn y1(&self) -> &[f64] {
        &self.y1
    }
    pub fn dy1(&self) -> &[f64] {
        &self.dy1
    }
    pub fn y2(&self) -> &[f64] {
        &self.y2
    }
    pub fn dy2(&self) -> &[f64] {
        &self.dy2
    }
    pub fn wronskian(&self) -> f64 {
        self.wronskian
    }
    pub fn len(&self) -> usize {
        self.grid.len()
    }
    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `y1 y2' - y1' y2` at grid index `i`.
    pub fn wronskian_at(&self, i: usize) -> f64 {
        self.y1[i] * self.dy2[i] - self.dy1[i] * self.y2[i]
    }

    /// Keeps only the listed grid indices (sorted, distinct).
    pub fn subsample(&self, indices: &[usize]) -> Result<Self> {
        let pick = |v: &[f64]| indices.iter().map(|&i| v[i]).collect::<Vec<_>>();
        if indices.iter().any(|&i| i >= self.grid.len()) {
            return Err(Error::GridMismatch);
        }
        FundamentalPair::new(
            pick(&self.grid),
            pick(&self.y1),
            pick(&self.dy1),
            pick(&self.y2),
            pick(&self.dy2),
            self.wronskian,
        )
    }

    /// Swaps the two columns (the Wronskian changes sign).
    pub fn swapped(&self) -> Self {
        FundamentalPair {
            grid: self.grid.clone(),
            y1: self.y2.clone(),
            dy1: self.dy2.clone(),
            y2: self.y1.clone(),
            dy2: self.dy1.clone(),
            wronskian: -self.wronskian,
        }
    }

    /// Rescales `y1 -> c1 y1` and `y2 -> c2 y2`.
    pub fn scaled(&self, c1: f64, c2: f64) -> Self {
        let sc = |v: &[f64], c: f64| v.iter().map(|x| c * x).collect::<Vec<_>>();
        FundamentalPair {
            grid: self.grid.clone(),
            y1: sc(&self.y1, c1),
            dy1: sc(&self.dy1, c1),
            y2: sc(&self.y2, c2),
            dy2: sc(&self.dy2, c2),
            wronskian: self.wronskian * c1 * c2,
        }
    }
}

/// Index of the grid point nearest to the midpoint of the grid's span.
pub fn midpoint_index(grid: &[f64]) -> usize {
    let mid = 0.5 * (grid[0] + grid[grid.len() - 1]);
    nearest_index(grid, mid)
}

pub fn nearest_index(grid: &[f64], q: f64) -> usize {
    let i = grid.partition_point(|&g| g < q);
    if i == 0 {
        0
    } else if i == grid.len() {
        grid.len() - 1
    } else if (grid[i] - q).abs() < (q - grid[i - 1]).abs() {
        i
    } else {
        i - 1
    }
}

/// Fundamental pair with identity data at `anchor`: `y1 = (1, 0)`,
/// `y2 = (0, 1)`, so `W = 1`.
pub fn fundamental_pair_on_grid<F: FrequencyField + ?Sized>(
    field: &F,
    grid: &[f64],
    anchor: f64,
    settings: &IntegrationSettings,
) -> Result<FundamentalPair> {
    if !(anchor >= grid[0] && anchor <= grid[grid.len() - 1]) {
        return Err(Error::InvalidParameter(format!("anchor {anchor} outside the grid span")));
    }
    let (y1, dy1) = integrate_on_grid(field, anchor, (1.0, 0.0), grid, settings)?;
    let (y2, dy2) = integrate_on_grid(field, anchor, (0.0, 1.0), grid, settings)?;
    FundamentalPair::new(grid.to_vec(), y1, dy1, y2, dy2, 1.0)
}

/// [`fundamental_pair_on_grid`] on a uniform grid of `settings.dense_output`
/// points over `interval`.
pub fn fundamental_pair<F: FrequencyField + ?Sized>(
    field: &F,
    interval: (f64, f64),
    anchor: f64,
    settings: &IntegrationSettings,
) -> Result<FundamentalPair> {
    settings.validate()?;
    if !(interval.1 > interval.0) {
        return Err(Error::InvalidParameter("interval must satisfy lo < hi".into()));
    }
    let grid = uniform_grid(interval.0, interval.1, settings.dense_output);
    fundamental_pair_on_grid(field, &grid, anchor, settings)
}

/// Second solution with unit Wronskian against a known solution whose value
/// and slope at `anchor` are `first`.
pub fn companion_solution<F: FrequencyField + ?Sized>(
    field: &F,
    grid: &[f64],
    anchor: f64,
    first: (f64, f64),
    settings: &IntegrationSettings,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (y, dy) = first;
    let ic = if y.abs() >= dy.abs() {
        if y == 0.0 {
            return Err(Error::InvalidParameter("first solution vanishes identically at the anchor".into()));
        }
        (0.0, 1.0 / y)
    } else {
        (-1.0 / dy, 0.0)
    };
    integrate_on_grid(field, anchor, ic, grid, settings)
}

/// Largest `|y1 y2' - y1' y2 - W|` over the grid.
pub fn wronskian_check(pair: &FundamentalPair) -> f64 {
    (0..pair.len())
        .map(|i| (pair.wronskian_at(i) - pair.wronskian).abs())
        .fold(0.0, f64::max)
}

/// Largest `|Δ²y/h² + Ω² y|` over interior points of a uniform grid.
pub fn discrete_residual<F: FrequencyField + ?Sized>(field: &F, grid: &[f64], y: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 1..grid.len().saturating_sub(1) {
        let h = grid[i + 1] - grid[i];
        let d2 = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
        worst = worst.max((d2 + field.omega2(grid[i]) * y[i]).abs());
    }
    worst
}
