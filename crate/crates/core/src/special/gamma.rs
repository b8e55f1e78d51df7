//! Gamma function (Lanczos, g = 7, nine terms) with reflection for x < 1/2.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `sin(πx)` with exact argument reduction, so zeros at integers are exact.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

fn lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Γ(x); fails at the poles `x = 0, -1, -2, …`.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma of non-finite argument {x}")));
    }
    if is_pole(x) {
        return Err(Error::Pole(x));
    }
    if x == x.floor() && x > 0.0 && x <= 171.0 {
        // exact factorials
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return Ok(acc);
    }
    if x < 0.5 {
        Ok(PI / (sin_pi(x) * lanczos(1.0 - x)))
    } else {
        Ok(lanczos(x))
    }
}

/// 1/Γ(x), which is zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    if is_pole(x) {
        0.0
    } else if x < 0.5 {
        sin_pi(x) * lanczos(1.0 - x) / PI
    } else {
        1.0 / gamma(x).expect("positive argument")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn classical_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) < 1e-14);
        assert!(rel(gamma(-0.5).unwrap(), -2.0 * PI.sqrt()) < 1e-14);
    }

    #[test]
    fn poles_are_errors() {
        for x in [0.0, -1.0, -7.0, -20.0] {
            assert_eq!(gamma(x), Err(Error::Pole(x)));
            assert_eq!(recip_gamma(x), 0.0);
        }
    }

    #[test]
    fn half_integers_match_double_factorial() {
        // Γ(n + 1/2) = (2n-1)!! √π / 2^n
        let mut df = 1.0;
        for n in 1..40 {
            df *= (2 * n - 1) as f64;
            let exact = df * PI.sqrt() / 2f64.powi(n);
            let x = n as f64 + 0.5;
            assert!(rel(gamma(x).unwrap(), exact) < 1e-13, "x={x}");
        }
    }

    #[test]
    fn negative_half_integers_via_reflection_identity() {
        // Γ(1/2 - n) = (-4)^n n! √π / (2n)!
        for n in 1..20i32 {
            let mut ratio = 1.0; // n!/(2n)!
            for j in (n + 1)..=(2 * n) {
                ratio /= j as f64;
            }
            let exact = (-4f64).powi(n) * ratio * PI.sqrt();
            assert!(rel(gamma(0.5 - n as f64).unwrap(), exact) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn recurrence_holds_over_range() {
        let mut x = -19.87;
        while x < 49.0 {
            if !is_pole(x) && !is_pole(x + 1.0) {
                let lhs = gamma(x + 1.0).unwrap();
                let rhs = x * gamma(x).unwrap();
                assert!(rel(lhs, rhs) < 2e-13, "x={x}");
            }
            x += 0.731;
        }
    }

    #[test]
    fn agrees_with_statrs_on_positive_axis() {
        let mut x = 0.05;
        while x < 50.0 {
            let ours = gamma(x).unwrap();
            let theirs = statrs::function::gamma::gamma(x);
            assert!(rel(ours, theirs) < 1e-12, "x={x}: {ours} vs {theirs}");
            x += 0.377;
        }
    }

    #[test]
    fn near_pole_accuracy() {
        // reflection with exact sin_pi keeps accuracy near -19
        let x = -19.0 + 1e-6;
        let via_recurrence = {
            // Γ(x) = Γ(x + 20) / (x (x+1) ... (x+19))
            let mut denom = 1.0;
            for j in 0..20 {
                denom *= x + j as f64;
            }
            gamma(x + 20.0).unwrap() / denom
        };
        assert!(rel(gamma(x).unwrap(), via_recurrence) < 1e-9);
    }

    #[test]
    fn recip_matches_inverse() {
        for x in [-3.3, -0.5, 0.25, 1.5, 7.2] {
            assert!(rel(recip_gamma(x), 1.0 / gamma(x).unwrap()) < 1e-14);
        }
    }
}
