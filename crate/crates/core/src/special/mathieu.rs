//! Mathieu characteristic values and periodic solutions from the truncated
//! tridiagonal Fourier-coefficient problem.

use crate::error::{Error, Result};
use crate::linear::{companion_solution, FundamentalPair, IntegrationSettings};

/// Cap on the truncation size reached by doubling.
pub const TRUNCATION_CAP: usize = 4096;
const DOUBLING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl std::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            other => Err(Error::InvalidParameter(format!("parity must be `even` or `odd`, got `{other}`"))),
        }
    }
}

/// One of the four coefficient families: `cos` or `sin` with even or odd orders.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Family {
    parity: Parity,
    /// first Fourier order in the family (0, 1 or 2)
    first: usize,
}

impl Family {
    fn of(order: usize, parity: Parity) -> Result<(Family, usize)> {
        match (parity, order % 2) {
            (Parity::Even, 0) => Ok((Family { parity, first: 0 }, order / 2)),
            (Parity::Even, _) => Ok((Family { parity, first: 1 }, (order - 1) / 2)),
            (Parity::Odd, _) if order == 0 => {
                Err(Error::InvalidParameter("odd Mathieu functions start at order 1".into()))
            }
            (Parity::Odd, 1) => Ok((Family { parity, first: 1 }, (order - 1) / 2)),
            (Parity::Odd, _) => Ok((Family { parity, first: 2 }, order / 2 - 1)),
        }
    }

    fn order_at(&self, i: usize) -> usize {
        self.first + 2 * i
    }

    /// Diagonal and off-diagonal of the symmetrised matrix.
    fn matrix(&self, q: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut d: Vec<f64> = (0..n).map(|i| (self.order_at(i) as f64).powi(2)).collect();
        let mut e = vec![q; n.saturating_sub(1)];
        match (self.parity, self.first) {
            (Parity::Even, 0) => {
                if let Some(e0) = e.first_mut() {
                    *e0 = std::f64::consts::SQRT_2 * q;
                }
            }
            (Parity::Even, 1) => d[0] += q,
            (Parity::Odd, 1) => d[0] -= q,
            _ => {}
        }
        (d, e)
    }
}

/// Number of eigenvalues of the tridiagonal matrix below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut p = d[0] - x;
    if p < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let denom = if p == 0.0 { f64::EPSILON * (e[i - 1].abs() + f64::MIN_POSITIVE) } else { p };
        p = d[i] - x - e[i - 1] * e[i - 1] / denom;
        if p < 0.0 {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenvalue by bisection on the Sturm count.
fn tridiagonal_eigenvalue(d: &[f64], e: &[f64], k: usize) -> f64 {
    let n = d.len();
    let radius = |i: usize| {
        let left = if i > 0 { e[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { e[i].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..n).map(|i| d[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..n).map(|i| d[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Characteristic value of the order-`order` solution at truncation size `n`.
pub fn mathieu_char_value_truncated(order: usize, parity: Parity, q: f64, n: usize) -> Result<f64> {
    if !q.is_finite() {
        return Err(Error::InvalidParameter(format!("q = {q} must be finite")));
    }
    let (family, k) = Family::of(order, parity)?;
    if n <= k {
        return Err(Error::InvalidParameter(format!("truncation {n} too small for order {order}")));
    }
    let (d, e) = family.matrix(q, n);
    if q == 0.0 {
        return Ok(d[k]);
    }
    Ok(tridiagonal_eigenvalue(&d, &e, k))
}

fn default_truncation(order: usize) -> usize {
    (4 * order + 20).max(32)
}

fn converged(order: usize, parity: Parity, q: f64) -> Result<(f64, usize)> {
    let mut n = default_truncation(order);
    let mut a = mathieu_char_value_truncated(order, parity, q, n)?;
    while 2 * n <= TRUNCATION_CAP {
        let next = mathieu_char_value_truncated(order, parity, q, 2 * n)?;
        if (next - a).abs() <= DOUBLING_TOL * a.abs().max(1.0) {
            return Ok((next, 2 * n));
        }
        a = next;
        n *= 2;
    }
    Err(Error::CharValueNonConvergence { order, q, cap: TRUNCATION_CAP })
}

/// Characteristic value `a_ℓ(q)` (even) or `b_ℓ(q)` (odd), converged under
/// doubling of the truncation size.
pub fn mathieu_char_value(order: usize, parity: Parity, q: f64) -> Result<f64> {
    converged(order, parity, q).map(|(a, _)| a)
}

/// Fourier coefficients of a periodic Mathieu solution.
#[derive(Debug, Clone, PartialEq)]
pub struct MathieuCoefficients {
    pub order: usize,
    pub parity: Parity,
    pub q: f64,
    pub char_value: f64,
    /// Fourier orders `m` of the coefficients
    pub orders: Vec<usize>,
    pub coeffs: Vec<f64>,
}

fn row_residual(d: &[f64], e: &[f64], a: f64, v: &[f64]) -> f64 {
    let n = d.len();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let mut r = (d[i] - a) * v[i];
        if i > 0 {
            r += e[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            r += e[i] * v[i + 1];
        }
        worst = worst.max(r.abs());
    }
    worst / (norm * (a.abs() + d[n - 1].abs() + 1.0))
}

/// Minimal solution of the three-term recurrence, run downward from the tail.
fn downward_vector(d: &[f64], e: &[f64], a: f64) -> Vec<f64> {
    let n = d.len();
    let mut v = vec![0.0; n];
    v[n - 1] = 1.0;
    for i in (1..n).rev() {
        let above = if i + 1 < n { e[i] * v[i + 1] } else { 0.0 };
        v[i - 1] = ((a - d[i]) * v[i] - above) / e[i - 1];
        if v[i - 1].abs() > 1e150 {
            for x in v[i - 1..].iter_mut() {
                *x *= 1e-150;
            }
        }
    }
    v
}

/// Solves `(T - a) x = b` for symmetric tridiagonal `T` (Thomas algorithm with
/// a small diagonal shift guard).
fn shifted_solve(d: &[f64], e: &[f64], a: f64, b: &[f64]) -> Vec<f64> {
    let n = d.len();
    let guard = f64::EPSILON * (a.abs() + 1.0);
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut piv = d[0] - a;
    if piv.abs() < guard {
        piv = guard;
    }
    x[0] = b[0] / piv;
    for i in 1..n {
        c[i - 1] = e[i - 1] / piv;
        piv = d[i] - a - e[i - 1] * c[i - 1];
        if piv.abs() < guard {
            piv = guard;
        }
        x[i] = (b[i] - e[i - 1] * x[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

fn inverse_iteration(d: &[f64], e: &[f64], a: f64) -> Vec<f64> {
    let n = d.len();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..8 {
        let w = shifted_solve(d, e, a, &v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = w.iter().map(|x| x / norm).collect();
    }
    v
}

/// Coefficients normalised to unit Euclidean norm of the symmetrised
/// eigenvector, with the order-`ℓ` coefficient positive.
pub fn mathieu_coefficients(order: usize, parity: Parity, q: f64) -> Result<MathieuCoefficients> {
    let (a, n) = converged(order, parity, q)?;
    let (family, k) = Family::of(order, parity)?;
    let (d, e) = family.matrix(q, n);
    let mut v = if q == 0.0 {
        let mut u = vec![0.0; n];
        u[k] = 1.0;
        u
    } else {
        let v = downward_vector(&d, &e, a);
        if row_residual(&d, &e, a, &v) <= 1e-12 {
            v
        } else {
            inverse_iteration(&d, &e, a)
        }
    };
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sign = if v[k] < 0.0 { -1.0 } else { 1.0 };
    for x in v.iter_mut() {
        *x *= sign / norm;
    }
    if family.first == 0 && family.parity == Parity::Even {
        v[0] /= std::f64::consts::SQRT_2;
    }
    // drop the negligible tail
    let keep = v.iter().rposition(|x| x.abs() > 1e-300).map_or(1, |i| i + 1);
    v.truncate(keep);
    let orders = (0..v.len()).map(|i| family.order_at(i)).collect();
    Ok(MathieuCoefficients { order, parity, q, char_value: a, orders, coeffs: v })
}

impl MathieuCoefficients {
    /// Value and derivative of `ce_ℓ(ν)` or `se_ℓ(ν)`.
    pub fn eval(&self, nu: f64) -> (f64, f64) {
        let (mut y, mut dy) = (0.0, 0.0);
        for (&m, &c) in self.orders.iter().zip(&self.coeffs) {
            let m = m as f64;
            let (s, co) = (m * nu).sin_cos();
            match self.parity {
                Parity::Even => {
                    y += c * co;
                    dy -= c * m * s;
                }
                Parity::Odd => {
                    y += c * s;
                    dy += c * m * co;
                }
            }
        }
        (y, dy)
    }

    /// Value and derivative of the radial continuation: `Σ A cosh(mμ)` or
    /// `Σ B sinh(mμ)`.
    pub fn eval_modified(&self, mu: f64) -> (f64, f64) {
        let (mut y, mut dy) = (0.0, 0.0);
        for (&m, &c) in self.orders.iter().zip(&self.coeffs) {
            let m = m as f64;
            let (sh, ch) = ((m * mu).sinh(), (m * mu).cosh());
            match self.parity {
                Parity::Even => {
                    y += c * ch;
                    dy += c * m * sh;
                }
                Parity::Odd => {
                    y += c * sh;
                    dy += c * m * ch;
                }
            }
        }
        (y, dy)
    }
}

/// Angular frequency `a - 2q cos 2ν`.
pub fn mathieu_frequency(a: f64, q: f64) -> impl Fn(f64) -> f64 + Sync {
    move |nu: f64| a - 2.0 * q * (2.0 * nu).cos()
}

/// Radial frequency `2q cosh 2μ - a`.
pub fn modified_mathieu_frequency(a: f64, q: f64) -> impl Fn(f64) -> f64 + Sync {
    move |mu: f64| 2.0 * q * (2.0 * mu).cosh() - a
}

/// Even-then-odd pair built around the order-`ℓ` periodic solution.
///
/// The periodic solution comes from its coefficient sums; the partner of the
/// other parity is integrated from the origin with unit Wronskian.
pub fn mathieu_pair(
    order: usize,
    parity: Parity,
    q: f64,
    grid: &[f64],
    modified: bool,
    settings: &IntegrationSettings,
) -> Result<FundamentalPair> {
    if modified && grid.first().map_or(false, |&m| m < 0.0) {
        return Err(Error::InvalidParameter("modified Mathieu grid must lie in mu >= 0".into()));
    }
    let coeffs = mathieu_coefficients(order, parity, q)?;
    let a = coeffs.char_value;
    let eval = |t: f64| if modified { coeffs.eval_modified(t) } else { coeffs.eval(t) };
    let (mut y, mut dy) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    for &t in grid {
        let (v, d) = eval(t);
        y.push(v);
        dy.push(d);
    }
    let first = eval(0.0);
    let (cy, cdy) = if modified {
        companion_solution(&modified_mathieu_frequency(a, q), grid, 0.0, first, settings)?
    } else {
        companion_solution(&mathieu_frequency(a, q), grid, 0.0, first, settings)?
    };
    match parity {
        Parity::Even => FundamentalPair::new(grid.to_vec(), y, dy, cy, cdy, 1.0),
        Parity::Odd => {
            // companion has W{Se, c} = 1, so -c gives W{-c, Se} = 1
            let ny = cy.iter().map(|v| -v).collect();
            let ndy = cdy.iter().map(|v| -v).collect();
            FundamentalPair::new(grid.to_vec(), ny, ndy, y, dy, 1.0)
        }
    }
}
