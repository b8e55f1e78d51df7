//! Adaptive Dormand-Prince 5(4) integrator with continuous output.
//!
//! Fixed-size states (`[f64; N]`) keep the inner loop allocation free. Output
//! points are landed on exactly; the fourth-order continuous extension is kept
//! for callers that want to evaluate between steps.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 5_000_000;

/// Step-size control parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub max_step: f64,
}

/// One accepted step with its continuous-extension coefficients.
#[derive(Debug, Clone)]
struct DenseStep<const N: usize> {
    t: f64,
    h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t) / self.h;
        let theta1 = 1.0 - theta;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])))
        })
    }
}

/// Continuous solution over the integrated span.
#[derive(Debug, Clone)]
pub struct DenseSolution<const N: usize> {
    steps: Vec<DenseStep<N>>,
    t0: f64,
    t1: f64,
    y1: [f64; N],
}

impl<const N: usize> DenseSolution<N> {
    pub fn span(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn steps(&self) -> usize {
        self.steps.len()
    }

    /// Final state.
    pub fn end(&self) -> [f64; N] {
        self.y1
    }

    /// Evaluates the interpolant; `None` outside the integrated span.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        let (lo, hi) = if self.t0 <= self.t1 { (self.t0, self.t1) } else { (self.t1, self.t0) };
        if t < lo || t > hi {
            return None;
        }
        if t == self.t1 {
            return Some(self.y1);
        }
        let forward = self.t1 >= self.t0;
        let idx = self.steps.partition_point(|s| {
            let end = s.t + s.h;
            if forward {
                end <= t
            } else {
                end >= t
            }
        });
        let step = self.steps.get(idx).or_else(|| self.steps.last())?;
        Some(step.eval(t))
    }
}

struct Stepper<'a, const N: usize, F> {
    f: &'a F,
    tol: Tolerances,
}

struct StepResult<const N: usize> {
    y_new: [f64; N],
    k_new: [f64; N],
    err: f64,
    rcont: Option<[[f64; N]; 5]>,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        y[i] + h * acc
    })
}

impl<'a, const N: usize, F> Stepper<'a, N, F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn norm(&self, v: &[f64; N], y: &[f64; N], y2: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = self.tol.abs + self.tol.rel * y[i].abs().max(y2[i].abs());
            let r = v[i] / sc;
            acc += r * r;
        }
        (acc / N as f64).sqrt()
    }

    fn step(&self, t: f64, y: &[f64; N], k1: &[f64; N], h: f64, dense: bool) -> StepResult<N> {
        let f = self.f;
        let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
        let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + h, &y_new);
        let err_vec: [f64; N] = std::array::from_fn(|i| {
            h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let mut err = self.norm(&err_vec, y, &y_new);
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            err = f64::INFINITY;
        }
        let rcont = dense.then(|| {
            let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            [
                *y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                std::array::from_fn(|i| {
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                }),
            ]
        });
        StepResult { y_new, k_new: k7, err, rcont }
    }

    fn initial_step(&self, t0: f64, y0: &[f64; N], f0: &[f64; N], dir: f64) -> f64 {
        let d0 = self.norm(y0, y0, y0);
        let d1 = self.norm(f0, y0, y0);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(self.tol.max_step);
        let y1 = axpy(y0, dir * h0, &[(1.0, f0)]);
        let f1 = (self.f)(t0 + dir * h0, &y1);
        let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
        let d2 = self.norm(&diff, y0, y0) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.tol.max_step)
    }
}

/// Hook called after each accepted step; returning `Some(err)` stops the run.
pub trait Halt<const N: usize> {
    fn check(&mut self, t: f64, y: &[f64; N]) -> Option<Error>;
}

impl<const N: usize, G> Halt<N> for G
where
    G: FnMut(f64, &[f64; N]) -> Option<Error>,
{
    fn check(&mut self, t: f64, y: &[f64; N]) -> Option<Error> {
        self(t, y)
    }
}

/// Never halts.
pub fn no_halt<const N: usize>(_: f64, _: &[f64; N]) -> Option<Error> {
    None
}

/// Integrates from `(t0, y0)` and returns the state at each of `targets`,
/// which must be monotone and on one side of `t0`.
pub fn integrate<const N: usize, F, H>(
    f: &F,
    t0: f64,
    y0: [f64; N],
    targets: &[f64],
    tol: Tolerances,
    mut halt: H,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    H: Halt<N>,
{
    let mut out = Vec::with_capacity(targets.len());
    let Some(&last) = targets.last() else {
        return Ok(out);
    };
    let dir = if last >= t0 { 1.0 } else { -1.0 };
    let mut prev = t0;
    for &t in targets {
        if (t - prev) * dir < 0.0 {
            return Err(Error::InvalidParameter(
                "integration targets must be monotone away from the start point".into(),
            ));
        }
        prev = t;
    }

    let stepper = Stepper { f, tol };
    let mut t = t0;
    let mut y = y0;
    let mut k = f(t, &y);
    let mut h = stepper.initial_step(t, &y, &k, dir);
    let mut steps = 0usize;

    for &target in targets {
        while (target - t) * dir > 0.0 {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::IntegrationFailure { q: t, reason: "step budget exhausted".into() });
            }
            let remaining = (target - t).abs();
            let clipped = h >= remaining;
            let h_try = if clipped { remaining } else { h };
            if h_try <= 16.0 * f64::EPSILON * t.abs().max(1e-300) {
                return Err(Error::IntegrationFailure { q: t, reason: "step size underflow".into() });
            }
            let res = stepper.step(t, &y, &k, dir * h_try, false);
            if res.err <= 1.0 {
                t = if clipped { target } else { t + dir * h_try };
                y = res.y_new;
                k = res.k_new;
                if let Some(e) = halt.check(t, &y) {
                    return Err(e);
                }
                let fac = (SAFETY * res.err.max(1e-10).powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR);
                let proposal = (h_try * fac).min(tol.max_step);
                // a step shortened to land on a target should not shrink the next one
                h = if clipped { proposal.max(h) } else { proposal };
            } else {
                let fac = if res.err.is_finite() {
                    (SAFETY * res.err.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
                } else {
                    MIN_FACTOR
                };
                h = h_try * fac;
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Integrates from `t0` to `t1` keeping the continuous extension of every step.
pub fn integrate_dense<const N: usize, F>(
    f: &F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: Tolerances,
) -> Result<DenseSolution<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let stepper = Stepper { f, tol };
    let mut t = t0;
    let mut y = y0;
    let mut k = f(t, &y);
    let mut h = stepper.initial_step(t, &y, &k, dir);
    let mut steps = Vec::new();
    while (t1 - t) * dir > 0.0 {
        if steps.len() > MAX_STEPS {
            return Err(Error::IntegrationFailure { q: t, reason: "step budget exhausted".into() });
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        let h_try = if last { remaining } else { h };
        if h_try <= 16.0 * f64::EPSILON * t.abs().max(1e-300) {
            return Err(Error::IntegrationFailure { q: t, reason: "step size underflow".into() });
        }
        let res = stepper.step(t, &y, &k, dir * h_try, true);
        if res.err <= 1.0 {
            steps.push(DenseStep {
                t,
                h: dir * h_try,
                rcont: res.rcont.expect("dense coefficients requested"),
            });
            t = if last { t1 } else { t + dir * h_try };
            y = res.y_new;
            k = res.k_new;
            let fac = (SAFETY * res.err.max(1e-10).powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR);
            h = (h_try * fac).min(tol.max_step);
        } else {
            let fac = if res.err.is_finite() {
                (SAFETY * res.err.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
            } else {
                MIN_FACTOR
            };
            h = h_try * fac;
        }
    }
    Ok(DenseSolution { steps, t0, t1, y1: y })
}
