use std::collections::BTreeMap;

use proptest::prelude::*;

use ermakov::catalog::{
    effective_frequency, geometric_frequency, lookup_system, sector_profile, FrequencyProfile, Potential,
    SectorSpec, Term, Weight, SYSTEM_KEYS,
};
use ermakov::ermakov::{el_invariant, invariant_drift, pinney_amplitude, solve_ep_direct, PinneyCoefficients};
use ermakov::linear::{
    fundamental_pair_on_grid, midpoint_index, uniform_grid, wronskian_check, FundamentalPair, IntegrationSettings,
};
use ermakov::pipeline::{run_sector, PinneyOverride, TrajectoryRequest};
use ermakov::problems::{build_problem, ProblemKind, ProblemSpec};

fn settings() -> IntegrationSettings {
    IntegrationSettings::default()
}

fn all_sectors() -> Vec<SectorSpec> {
    SYSTEM_KEYS.iter().flat_map(|name| lookup_system(name).unwrap().sectors().to_vec()).collect()
}

/// `-(ln s)''/2 - ((ln s)')²/4` from five-point differences of `ln s`.
fn geometric_by_differences(weight: &Weight, q: f64, h: f64) -> f64 {
    let l = |x: f64| weight.value(x).ln();
    let (m2, m1, c, p1, p2) = (l(q - 2.0 * h), l(q - h), l(q), l(q + h), l(q + 2.0 * h));
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
    -0.5 * d2 - 0.25 * d1 * d1
}

/// Cartesian profile `Ω² = 2(E - V)` with `V = v2 x² + v1 cos 2x`.
fn random_profile(e: f64, v2: f64, v1: f64) -> FrequencyProfile {
    let sector = SectorSpec::new("x", -3.0, 3.0, Weight::Unit).unwrap();
    let potential = Potential::zero().with(Term::Power { coeff: v2, power: 2 }).with(Term::Cos2 { coeff: v1 });
    FrequencyProfile::new(sector, 1.0, 1.0, e, potential, 0.0).unwrap()
}

fn pair_of(profile: &FrequencyProfile) -> FundamentalPair {
    let grid = uniform_grid(-3.0, 3.0, 601);
    fundamental_pair_on_grid(profile, &grid, 0.0, &settings()).unwrap()
}

fn coefficients(pair: &FundamentalPair, k: f64, spread: f64, extra: f64, negative: bool) -> PinneyCoefficients {
    let w = pair.wronskian();
    let a = spread * k.sqrt() / w.abs();
    let b = (k / (w * w)) * (1.0 + extra) / a;
    PinneyCoefficients::from_ab(a, b, k, w, negative).unwrap()
}

#[test]
fn unit_weight_sectors_have_zero_geometric_frequency() {
    for sector in all_sectors().iter().filter(|s| *s.weight() == Weight::Unit) {
        let (lo, hi) = sector.domain();
        for f in [0.1, 0.37, 0.5, 0.81] {
            assert_eq!(geometric_frequency(sector, lo + f * (hi - lo)).unwrap(), 0.0, "{}", sector.label());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn geometric_frequency_matches_differences(index in 0usize..21, f in 0.15f64..0.85) {
        let sectors = all_sectors();
        let sector = &sectors[index % sectors.len()];
        let (lo, hi) = sector.domain();
        let (lo, hi) = (lo.max(-10.0), hi.min(10.0).max(lo.max(-10.0) + 1.0));
        let q = lo + f * (hi - lo);
        let exact = geometric_frequency(sector, q).unwrap();
        let fd = geometric_by_differences(sector.weight(), q, 1e-3 * (hi - lo));
        prop_assert!((exact - fd).abs() <= 1e-7 * exact.abs().max(1.0), "{} at {q}: {exact} vs {fd}", sector.label());
    }

    #[test]
    fn polar_frequency_matches_table(l in 0u32..6, m in 0u32..4, theta in 0.05f64..3.09) {
        let system = lookup_system("spherical").unwrap();
        let params: BTreeMap<String, f64> =
            [("l".to_string(), l as f64), ("m_phi".to_string(), m as f64)].into_iter().collect();
        let profile = sector_profile(&system, "theta", &params, 1.0, 1.0, 0.0).unwrap();
        let (l, m) = (l as f64, m as f64);
        let s2 = theta.sin().powi(2);
        let table = l * (l + 1.0) + 0.25 - (m * m - 0.25) / s2;
        let value = effective_frequency(&profile, theta).unwrap();
        prop_assert!((value - table).abs() <= 1e-10 * table.abs().max(1.0));
    }

    #[test]
    fn wronskian_is_constant(e in -1.0f64..3.0, v2 in 0.0f64..0.5, v1 in -1.0f64..1.0) {
        let pair = pair_of(&random_profile(e, v2, v1));
        let w = pair.wronskian();
        prop_assert!(wronskian_check(&pair) <= 1e-9 * w.abs().max(1.0));
    }

    #[test]
    fn superposition_matches_direct_solve(
        e in 0.5f64..3.0, v2 in 0.0f64..0.3, v1 in -0.5f64..0.5,
        k in 0.1f64..2.0, spread in 0.5f64..2.0, extra in 0.0f64..1.0, negative in any::<bool>(),
    ) {
        let profile = random_profile(e, v2, v1);
        let pair = pair_of(&profile);
        let c = coefficients(&pair, k, spread, extra, negative);
        let amp = pinney_amplitude(&c, &pair).unwrap();
        let grid = pair.grid();
        let i0 = midpoint_index(grid);
        let direct = solve_ep_direct(&profile, k, (amp.rho[i0], amp.drho[i0]), grid[i0], grid, &settings()).unwrap();
        let err = direct.rho.iter().zip(&amp.rho).fold(0.0_f64, |m, (d, r)| m.max((d - r).abs() / r));
        prop_assert!(err <= 1e-6, "{err}");
    }

    #[test]
    fn invariant_is_constant(
        e in 0.5f64..3.0, v2 in 0.0f64..0.3, v1 in -0.5f64..0.5,
        k in 0.1f64..2.0, spread in 0.5f64..2.0, extra in 0.0f64..1.0,
    ) {
        let pair = pair_of(&random_profile(e, v2, v1));
        let c = coefficients(&pair, k, spread, extra, false);
        let amp = pinney_amplitude(&c, &pair).unwrap();
        for (y, dy) in [(pair.y1(), pair.dy1()), (pair.y2(), pair.dy2())] {
            let inv = el_invariant(&amp, y, dy).unwrap();
            prop_assert!(invariant_drift(pair.grid(), &inv).unwrap().max_relative <= 1e-8);
        }
    }

    #[test]
    fn harmonic_runs_certify(e in 0.6f64..3.4, c in 0.2f64..2.0, x0 in -1.5f64..1.5) {
        let spec = ProblemSpec::new(ProblemKind::HarmonicOscillator)
            .with_param("omega", 1.0)
            .with_param("E", e)
            .with_flux("x", c);
        let setup = &build_problem(&spec).unwrap()[0];
        let req = TrajectoryRequest { x0, t_end: 1.5, samples: 31 };
        let run = run_sector(setup, &PinneyOverride::default(), &settings(), Some(&req)).unwrap();
        let r = &run.residuals;
        prop_assert!(r.invariant.max_relative <= 1e-8);
        prop_assert!(r.continuity <= 1e-10);
        prop_assert!(r.energy <= 1e-6);
        prop_assert!(run.trajectory.unwrap().reversal.unwrap() <= 1e-8);
    }
}
