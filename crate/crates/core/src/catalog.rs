//! Separable coordinate catalog.
//!
//! Each coordinate system is a list of sectors. A sector carries its
//! Sturm-Liouville weight `s(q)` in closed form so that the geometric part of
//! the Liouville frequency,
//!
//! ```text
//! Ω²_geom = -s''/(2s) + (s'/s)²/4 = -(ln s)''/2 - ((ln s)')²/4,
//! ```
//!
//! is evaluated from exact derivatives. A [`FrequencyProfile`] adds the
//! physical part `(2m/ħ²)(E - V(q)) - κ/s²` on top of it.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use crate::error::{Error, Result};

/// Weights below this (or above its reciprocal) mark a singular endpoint.
pub const SINGULAR_CUTOFF: f64 = 1e-12;

/// Catalog keys accepted by [`lookup_system`].
pub const SYSTEM_KEYS: [&str; 7] = [
    "cartesian",
    "cylindrical",
    "spherical",
    "parabolic3d",
    "elliptic_cylinder",
    "parabolic_cylinder",
    "confocal_quadric",
];

/// Closed-form Sturm-Liouville weight.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    /// `s = 1`.
    Unit,
    /// `s = coeff * q^exponent`, used on `q >= 0`.
    Power { coeff: f64, exponent: f64 },
    /// `s = sin q`.
    Sin,
    /// Elliptic-cylinder weight `a sqrt(sinh²μ + cross)` (radial) or
    /// `a sqrt(cross + sin²ν)` (angular), the other coordinate frozen into
    /// `cross`.
    EllipticCylinder { a: f64, cross: f64, angular: bool },
    /// Confocal quadric master weight `sqrt(sign * (a²-q)(b²-q)(c²-q))`, where
    /// `sign` makes the product positive on the declared interval.
    ConfocalQuadric { a2: f64, b2: f64, c2: f64, sign: f64 },
}

impl Weight {
    /// Returns `(s, s', s'')` at `q`.
    pub fn derivatives(&self, q: f64) -> (f64, f64, f64) {
        match *self {
            Weight::Unit => (1.0, 0.0, 0.0),
            Weight::Power { coeff, exponent } => {
                if exponent == 0.0 {
                    return (coeff, 0.0, 0.0);
                }
                let s = coeff * q.powf(exponent);
                let d1 = coeff * exponent * q.powf(exponent - 1.0);
                let d2 = coeff * exponent * (exponent - 1.0) * q.powf(exponent - 2.0);
                (s, d1, d2)
            }
            Weight::Sin => (q.sin(), q.cos(), -q.sin()),
            Weight::EllipticCylinder { a, cross, angular } => {
                let (g, g1, g2) = if angular {
                    let sn = q.sin();
                    (cross + sn * sn, (2.0 * q).sin(), 2.0 * (2.0 * q).cos())
                } else {
                    let sh = q.sinh();
                    (sh * sh + cross, (2.0 * q).sinh(), 2.0 * (2.0 * q).cosh())
                };
                sqrt_chain(a, g, g1, g2)
            }
            Weight::ConfocalQuadric { a2, b2, c2, sign } => {
                let (u, v, w) = (a2 - q, b2 - q, c2 - q);
                let p = sign * u * v * w;
                let p1 = -sign * (v * w + u * w + u * v);
                let p2 = 2.0 * sign * (u + v + w);
                sqrt_chain(1.0, p, p1, p2)
            }
        }
    }

    pub fn value(&self, q: f64) -> f64 {
        self.derivatives(q).0
    }

    /// Human-readable formula, as printed by the `catalog` subcommand.
    pub fn formula(&self, var: &str) -> String {
        match *self {
            Weight::Unit => "1".to_string(),
            Weight::Power { coeff, exponent } => {
                let pow = if exponent == 1.0 {
                    var.to_string()
                } else {
                    format!("{var}^{exponent}")
                };
                if coeff == 1.0 {
                    pow
                } else {
                    format!("{coeff}*{pow}")
                }
            }
            Weight::Sin => format!("sin({var})"),
            Weight::EllipticCylinder { a, cross, angular } => {
                if angular {
                    format!("{a}*sqrt({cross} + sin^2({var}))")
                } else {
                    format!("{a}*sqrt(sinh^2({var}) + {cross})")
                }
            }
            Weight::ConfocalQuadric { a2, b2, c2, .. } => {
                format!("sqrt(|({a2}-{var})({b2}-{var})({c2}-{var})|)")
            }
        }
    }
}

/// `(c sqrt(g))`, its first and second derivative given `g, g', g''`.
fn sqrt_chain(c: f64, g: f64, g1: f64, g2: f64) -> (f64, f64, f64) {
    let r = g.sqrt();
    let s = c * r;
    let d1 = c * g1 / (2.0 * r);
    let d2 = c * (g2 / (2.0 * r) - g1 * g1 / (4.0 * g * r));
    (s, d1, d2)
}

/// One separated coordinate sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorSpec {
    label: String,
    domain: (f64, f64),
    weight: Weight,
    singular_endpoints: Vec<f64>,
}

impl SectorSpec {
    pub fn new(label: impl Into<String>, lo: f64, hi: f64, weight: Weight) -> Result<Self> {
        let label = label.into();
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "sector `{label}` needs a finite domain with lo < hi, got [{lo}, {hi}]"
            )));
        }
        if let Weight::ConfocalQuadric { a2, b2, c2, sign } = weight {
            for root in [a2, b2, c2] {
                if root > lo && root < hi {
                    return Err(Error::InvalidParameter(format!(
                        "confocal weight changes sign at q = {root} inside [{lo}, {hi}]"
                    )));
                }
            }
            let mid = 0.5 * (lo + hi);
            if sign * (a2 - mid) * (b2 - mid) * (c2 - mid) <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "confocal product is not positive on [{lo}, {hi}] with sign {sign}"
                )));
            }
        }
        let singular_endpoints = [lo, hi]
            .into_iter()
            .filter(|&q| is_singular_value(weight.value(q)))
            .collect();
        Ok(SectorSpec {
            label,
            domain: (lo, hi),
            weight,
            singular_endpoints,
        })
    }

    /// Same weight, new domain.
    pub fn with_domain(&self, lo: f64, hi: f64) -> Result<Self> {
        SectorSpec::new(self.label.clone(), lo, hi, self.weight.clone())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn singular_endpoints(&self) -> &[f64] {
        &self.singular_endpoints
    }

    pub fn contains(&self, q: f64) -> bool {
        q >= self.domain.0 && q <= self.domain.1
    }

    /// Checks that `q` is in the domain and not at a singular endpoint.
    pub fn check_point(&self, q: f64) -> Result<()> {
        if !self.contains(q) {
            return Err(Error::OutOfDomain {
                q,
                lo: self.domain.0,
                hi: self.domain.1,
            });
        }
        if self.singular_endpoints.contains(&q) || is_singular_value(self.weight.value(q)) {
            return Err(Error::Singularity { q });
        }
        Ok(())
    }

    /// Geometric (Liouville) frequency `-s''/(2s) + (s'/s)²/4`, no checks.
    pub fn geometric_unchecked(&self, q: f64) -> f64 {
        let (s, d1, d2) = self.weight.derivatives(q);
        if d1 == 0.0 && d2 == 0.0 {
            return 0.0;
        }
        let l1 = d1 / s;
        -0.5 * d2 / s + 0.25 * l1 * l1
    }
}

fn is_singular_value(s: f64) -> bool {
    !s.is_finite() || s.abs() < SINGULAR_CUTOFF || s.abs() > 1.0 / SINGULAR_CUTOFF
}

/// Geometric part of the effective frequency at an interior point.
pub fn geometric_frequency(sector: &SectorSpec, q: f64) -> Result<f64> {
    sector.check_point(q)?;
    Ok(sector.geometric_unchecked(q))
}

/// An orthogonal separable coordinate system.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateSystem {
    name: String,
    sectors: Vec<SectorSpec>,
}

impl CoordinateSystem {
    pub fn new(name: impl Into<String>, sectors: Vec<SectorSpec>) -> Result<Self> {
        let name = name.into();
        if sectors.is_empty() || sectors.len() > 3 {
            return Err(Error::InvalidParameter(format!(
                "system `{name}` must have 1 to 3 sectors"
            )));
        }
        for (i, s) in sectors.iter().enumerate() {
            if sectors[..i].iter().any(|t| t.label == s.label) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate sector label `{}` in `{name}`",
                    s.label
                )));
            }
        }
        Ok(CoordinateSystem { name, sectors })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sectors(&self) -> &[SectorSpec] {
        &self.sectors
    }

    pub fn sector(&self, label: &str) -> Result<&SectorSpec> {
        self.sectors
            .iter()
            .find(|s| s.label == label)
            .ok_or_else(|| Error::UnknownSector {
                system: self.name.clone(),
                label: label.to_string(),
            })
    }

    /// Elliptic cylinder with focal half-distance `a`. The weight of each
    /// elliptic sector depends on both coordinates; the other coordinate is
    /// frozen at `mu_ref` / `nu_ref`.
    pub fn elliptic_cylinder(a: f64, mu_ref: f64, nu_ref: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidParameter(format!("elliptic a must be > 0, got {a}")));
        }
        let nu_cross = nu_ref.sin().powi(2);
        let mu_cross = mu_ref.sinh().powi(2);
        CoordinateSystem::new(
            "elliptic_cylinder",
            vec![
                SectorSpec::new(
                    "mu",
                    0.0,
                    5.0,
                    Weight::EllipticCylinder { a, cross: nu_cross, angular: false },
                )?,
                SectorSpec::new(
                    "nu",
                    0.0,
                    2.0 * PI,
                    Weight::EllipticCylinder { a, cross: mu_cross, angular: true },
                )?,
                SectorSpec::new("z", -100.0, 100.0, Weight::Unit)?,
            ],
        )
    }

    /// Confocal quadric family with axis parameters `a² > b² > c²` and one
    /// `(label, lo, hi)` interval per coordinate.
    pub fn confocal_quadric(a2: f64, b2: f64, c2: f64, intervals: [(&str, f64, f64); 3]) -> Result<Self> {
        let sectors = intervals
            .iter()
            .map(|&(label, lo, hi)| {
                let mid = 0.5 * (lo + hi);
                let sign = ((a2 - mid) * (b2 - mid) * (c2 - mid)).signum();
                SectorSpec::new(label, lo, hi, Weight::ConfocalQuadric { a2, b2, c2, sign })
            })
            .collect::<Result<Vec<_>>>()?;
        CoordinateSystem::new("confocal_quadric", sectors)
    }
}

/// Looks up a catalog system with its default domains and parameters.
pub fn lookup_system(name: &str) -> Result<CoordinateSystem> {
    let unit = |label: &str, lo, hi| SectorSpec::new(label, lo, hi, Weight::Unit);
    let power = |label: &str, lo, hi, exponent| {
        SectorSpec::new(label, lo, hi, Weight::Power { coeff: 1.0, exponent })
    };
    let two_pi = 2.0 * PI;
    match name {
        "cartesian" => CoordinateSystem::new(
            name,
            vec![unit("x", -100.0, 100.0)?, unit("y", -100.0, 100.0)?, unit("z", -100.0, 100.0)?],
        ),
        "cylindrical" => CoordinateSystem::new(
            name,
            vec![power("r", 0.0, 100.0, 1.0)?, unit("theta", 0.0, two_pi)?, unit("z", -100.0, 100.0)?],
        ),
        "spherical" => CoordinateSystem::new(
            name,
            vec![
                power("r", 0.0, 100.0, 2.0)?,
                SectorSpec::new("theta", 0.0, PI, Weight::Sin)?,
                unit("phi", 0.0, two_pi)?,
            ],
        ),
        "parabolic3d" => CoordinateSystem::new(
            name,
            vec![power("u", 0.0, 100.0, 1.0)?, power("v", 0.0, 100.0, 1.0)?, unit("phi", 0.0, two_pi)?],
        ),
        "elliptic_cylinder" => CoordinateSystem::elliptic_cylinder(1.0, 1.0, FRAC_PI_2),
        "parabolic_cylinder" => CoordinateSystem::new(
            name,
            vec![unit("u", -100.0, 100.0)?, unit("v", 0.0, 100.0)?, unit("z", -100.0, 100.0)?],
        ),
        "confocal_quadric" => CoordinateSystem::confocal_quadric(
            3.0,
            2.0,
            1.0,
            [("lambda", -2.0, 1.0), ("mu", 1.0, 2.0), ("nu", 2.0, 3.0)],
        ),
        _ => Err(Error::UnknownSystem {
            name: name.to_string(),
            valid: SYSTEM_KEYS.iter().map(|s| s.to_string()).collect(),
        }),
    }
}

/// One closed-form term of a separated potential, in energy units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Term {
    /// `coeff * q^power`
    Power { coeff: f64, power: i32 },
    /// `coeff / sin²q`
    InvSinSq { coeff: f64 },
    /// `coeff * cos²q`
    CosSq { coeff: f64 },
    /// `coeff * cos 2q`
    Cos2 { coeff: f64 },
    /// `coeff * cosh²q`
    CoshSq { coeff: f64 },
    /// `coeff * cosh q`
    Cosh { coeff: f64 },
}

impl Term {
    pub fn eval(&self, q: f64) -> f64 {
        match *self {
            Term::Power { coeff, power } => coeff * q.powi(power),
            Term::InvSinSq { coeff } => coeff / q.sin().powi(2),
            Term::CosSq { coeff } => coeff * q.cos().powi(2),
            Term::Cos2 { coeff } => coeff * (2.0 * q).cos(),
            Term::CoshSq { coeff } => coeff * q.cosh().powi(2),
            Term::Cosh { coeff } => coeff * q.cosh(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Term::Power { coeff, power } => write!(f, "{coeff}*q^{power}"),
            Term::InvSinSq { coeff } => write!(f, "{coeff}/sin^2(q)"),
            Term::CosSq { coeff } => write!(f, "{coeff}*cos^2(q)"),
            Term::Cos2 { coeff } => write!(f, "{coeff}*cos(2q)"),
            Term::CoshSq { coeff } => write!(f, "{coeff}*cosh^2(q)"),
            Term::Cosh { coeff } => write!(f, "{coeff}*cosh(q)"),
        }
    }
}

/// Separated potential `V(q)` as a sum of closed-form terms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Potential {
    terms: Vec<Term>,
}

impl Potential {
    pub fn zero() -> Self {
        Potential::default()
    }

    pub fn new(terms: Vec<Term>) -> Self {
        Potential { terms }
    }

    pub fn with(mut self, term: Term) -> Self {
        self.terms.push(term);
        self
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn eval(&self, q: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(q)).sum()
    }
}

/// Effective frequency `Ω²(q) = Ω²_geom(q) + (2m/ħ²)(E - V(q)) - κ/s²(q)` on a
/// sector.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyProfile {
    sector: SectorSpec,
    mass: f64,
    hbar: f64,
    energy: f64,
    potential: Potential,
    kappa: f64,
    separation: BTreeMap<String, f64>,
}

impl FrequencyProfile {
    pub fn new(
        sector: SectorSpec,
        mass: f64,
        hbar: f64,
        energy: f64,
        potential: Potential,
        kappa: f64,
    ) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        if !energy.is_finite() {
            return Err(Error::InvalidParameter(format!("sector energy must be finite, got {energy}")));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!("kappa must be >= 0, got {kappa}")));
        }
        Ok(FrequencyProfile {
            sector,
            mass,
            hbar,
            energy,
            potential,
            kappa,
            separation: BTreeMap::new(),
        })
    }

    /// Profile with `Ω²_phys = value` constant, i.e. `E = ħ²·value/(2m)`, `V = 0`.
    pub fn constant(sector: SectorSpec, value: f64) -> Result<Self> {
        FrequencyProfile::new(sector, 1.0, 1.0, 0.5 * value, Potential::zero(), 0.0)
    }

    /// Records a named separation constant (bookkeeping only).
    pub fn with_separation(mut self, name: impl Into<String>, value: f64) -> Self {
        self.separation.insert(name.into(), value);
        self
    }

    pub fn sector(&self) -> &SectorSpec {
        &self.sector
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn separation(&self) -> &BTreeMap<String, f64> {
        &self.separation
    }

    /// `2m/ħ²`
    pub fn scale(&self) -> f64 {
        2.0 * self.mass / (self.hbar * self.hbar)
    }

    pub fn physical_unchecked(&self, q: f64) -> f64 {
        let mut value = self.scale() * (self.energy - self.potential.eval(q));
        if self.kappa != 0.0 {
            let s = self.sector.weight.value(q);
            value -= self.kappa / (s * s);
        }
        value
    }

    /// `Ω²(q)` without domain checks; used inside integrators.
    pub fn omega2_unchecked(&self, q: f64) -> f64 {
        self.sector.geometric_unchecked(q) + self.physical_unchecked(q)
    }
}

/// `Ω²(q)` at an interior point of the profile's sector.
pub fn effective_frequency(profile: &FrequencyProfile, q: f64) -> Result<f64> {
    profile.sector.check_point(q)?;
    Ok(profile.omega2_unchecked(q))
}

/// Named parameter bindings for [`sector_profile`].
pub type Params = BTreeMap<String, f64>;

fn param(params: &Params, name: &str) -> Result<f64> {
    params
        .get(name)
        .copied()
        .ok_or_else(|| Error::UnboundParameter(name.to_string()))
}

/// Builds the tabulated physical frequency for a catalog sector.
///
/// Parameter names per system:
///
/// | system | sector | parameters |
/// |---|---|---|
/// | cartesian | x, y, z | `k_x`, `k_y`, `k_z` |
/// | cylindrical | r / theta / z | `k0, k_z, m_theta` / `m_theta` / `k_z` |
/// | spherical | r / theta / phi | `k0, l` / `l, m_phi` / `m_phi` |
/// | parabolic3d | u / v / phi | `k0, lambda, m_u` / `k0, lambda, m_v` / `m_phi` |
/// | elliptic_cylinder | mu, nu / z | `k, gamma_sep` / `k_z` |
/// | parabolic_cylinder | u, v / z | `k_perp, lambda` / `k_z` |
/// | confocal_quadric | any | `q_sl` |
pub fn sector_profile(
    system: &CoordinateSystem,
    label: &str,
    params: &Params,
    mass: f64,
    hbar: f64,
    kappa: f64,
) -> Result<FrequencyProfile> {
    let sector = system.sector(label)?.clone();
    // energy per unit of Ω²
    let f = hbar * hbar / (2.0 * mass);
    let p = |name: &str| param(params, name);
    let (energy, potential, names): (f64, Potential, Vec<&str>) = match (system.name(), label) {
        ("cartesian", axis) => {
            let key = format!("k_{axis}");
            let k = p(&key)?;
            (f * k * k, Potential::zero(), vec![])
        }
        ("cylindrical", "r") => {
            let (k0, kz, m) = (p("k0")?, p("k_z")?, p("m_theta")?);
            (
                f * (k0 * k0 - kz * kz),
                Potential::new(vec![Term::Power { coeff: f * m * m, power: -2 }]),
                vec!["k0", "k_z", "m_theta"],
            )
        }
        ("cylindrical", "theta") => {
            let m = p("m_theta")?;
            (f * m * m, Potential::zero(), vec!["m_theta"])
        }
        ("cylindrical", _) | ("elliptic_cylinder", "z") | ("parabolic_cylinder", "z") => {
            let kz = p("k_z")?;
            (f * kz * kz, Potential::zero(), vec!["k_z"])
        }
        ("spherical", "r") => {
            let (k0, l) = (p("k0")?, p("l")?);
            (
                f * k0 * k0,
                Potential::new(vec![Term::Power { coeff: f * l * (l + 1.0), power: -2 }]),
                vec!["k0", "l"],
            )
        }
        ("spherical", "theta") => {
            let (l, m) = (p("l")?, p("m_phi")?);
            (
                f * l * (l + 1.0),
                Potential::new(vec![Term::InvSinSq { coeff: f * m * m }]),
                vec!["l", "m_phi"],
            )
        }
        ("spherical", _) | ("parabolic3d", "phi") => {
            let m = p("m_phi")?;
            (f * m * m, Potential::zero(), vec!["m_phi"])
        }
        ("parabolic3d", axis @ ("u" | "v")) => {
            let (k0, lambda) = (p("k0")?, p("lambda")?);
            let m_key = if axis == "u" { "m_u" } else { "m_v" };
            let m = p(m_key)?;
            let sign = if axis == "u" { 1.0 } else { -1.0 };
            (
                sign * f * lambda,
                Potential::new(vec![
                    Term::Power { coeff: -f * k0 * k0, power: 2 },
                    Term::Power { coeff: f * m * m, power: -2 },
                ]),
                vec!["k0", "lambda", m_key],
            )
        }
        ("elliptic_cylinder", axis) => {
            let a = match sector.weight() {
                Weight::EllipticCylinder { a, .. } => *a,
                _ => 1.0,
            };
            let (k, gamma) = (p("k")?, p("gamma_sep")?);
            let a2k2 = a * a * k * k;
            if axis == "mu" {
                (f * gamma, Potential::new(vec![Term::CoshSq { coeff: -f * a2k2 }]), vec!["k", "gamma_sep"])
            } else {
                (-f * gamma, Potential::new(vec![Term::CosSq { coeff: f * a2k2 }]), vec!["k", "gamma_sep"])
            }
        }
        ("parabolic_cylinder", axis) => {
            let (kp, lambda) = (p("k_perp")?, p("lambda")?);
            let sign = if axis == "u" { -1.0 } else { 1.0 };
            (
                sign * f * lambda,
                Potential::new(vec![Term::Power { coeff: -f * kp * kp, power: 2 }]),
                vec!["k_perp", "lambda"],
            )
        }
        ("confocal_quadric", _) => {
            let q_sl = p("q_sl")?;
            (f * q_sl, Potential::zero(), vec!["q_sl"])
        }
        (system_name, _) => {
            return Err(Error::UnknownSector {
                system: system_name.to_string(),
                label: label.to_string(),
            })
        }
    };
    let mut profile = FrequencyProfile::new(sector, mass, hbar, energy, potential, kappa)?;
    for name in names {
        profile = profile.with_separation(name, params[name]);
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, f64)]) -> Params {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn cartesian_has_three_unit_sectors() {
        let sys = lookup_system("cartesian").unwrap();
        assert_eq!(sys.sectors().len(), 3);
        for s in sys.sectors() {
            assert_eq!(*s.weight(), Weight::Unit);
            assert!(s.singular_endpoints().is_empty());
        }
    }

    #[test]
    fn spherical_weights() {
        let sys = lookup_system("spherical").unwrap();
        let r = sys.sector("r").unwrap();
        assert_eq!(r.weight().value(3.0), 9.0);
        assert_eq!(r.singular_endpoints(), &[0.0]);
        let th = sys.sector("theta").unwrap();
        assert!((th.weight().value(0.7) - 0.7f64.sin()).abs() < 1e-15);
        assert_eq!(th.singular_endpoints().len(), 2);
        assert_eq!(*sys.sector("phi").unwrap().weight(), Weight::Unit);
    }

    #[test]
    fn unknown_system_names_valid_keys() {
        let err = lookup_system("toroidal").unwrap_err();
        match &err {
            Error::UnknownSystem { name, valid } => {
                assert_eq!(name, "toroidal");
                assert_eq!(valid.len(), SYSTEM_KEYS.len());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("spherical"));
    }

    #[test]
    fn every_catalog_key_resolves() {
        for key in SYSTEM_KEYS {
            let sys = lookup_system(key).unwrap();
            assert_eq!(sys.name(), key);
        }
    }

    #[test]
    fn geometric_frequency_examples() {
        let unit = SectorSpec::new("x", -1.0, 1.0, Weight::Unit).unwrap();
        assert_eq!(geometric_frequency(&unit, 0.3).unwrap(), 0.0);
        let sq = SectorSpec::new("r", 0.0, 10.0, Weight::Power { coeff: 1.0, exponent: 2.0 }).unwrap();
        assert!(geometric_frequency(&sq, 2.0).unwrap().abs() < 1e-15);
        let lin = SectorSpec::new("r", 0.0, 10.0, Weight::Power { coeff: 1.0, exponent: 1.0 }).unwrap();
        assert!((geometric_frequency(&lin, 2.0).unwrap() - 1.0 / 16.0).abs() < 1e-16);
    }

    #[test]
    fn singular_endpoint_is_rejected() {
        let sys = lookup_system("spherical").unwrap();
        let r = sys.sector("r").unwrap();
        assert_eq!(geometric_frequency(r, 0.0), Err(Error::Singularity { q: 0.0 }));
        assert!(matches!(geometric_frequency(r, -1.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn free_particle_frequency_is_k0_squared() {
        let sys = lookup_system("cartesian").unwrap();
        let (m, hbar, k0) = (1.3, 0.7, 2.5);
        let prof = sector_profile(&sys, "x", &params(&[("k_x", k0)]), m, hbar, 0.0).unwrap();
        assert!((prof.energy() - hbar * hbar * k0 * k0 / (2.0 * m)).abs() < 1e-14);
        for x in [-50.0, -1.0, 0.0, 3.3, 99.0] {
            assert!((effective_frequency(&prof, x).unwrap() - k0 * k0).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_frequency_matches_closed_form() {
        let sec = SectorSpec::new("x", -10.0, 10.0, Weight::Unit).unwrap();
        let (m, hbar, omega, e) = (2.0, 1.5, 0.8, 1.1);
        let pot = Potential::new(vec![Term::Power { coeff: 0.5 * m * omega * omega, power: 2 }]);
        let prof = FrequencyProfile::new(sec, m, hbar, e, pot, 0.0).unwrap();
        for x in [-3.0, 0.0, 0.5, 2.0] {
            let expect = 2.0 * m * e / (hbar * hbar) - m * m * omega * omega * x * x / (hbar * hbar);
            assert!((effective_frequency(&prof, x).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn cylindrical_radial_matches_table() {
        let sys = lookup_system("cylindrical").unwrap();
        let (k0, kz, m) = (2.0, 0.5, 3.0);
        let prof = sector_profile(
            &sys,
            "r",
            &params(&[("k0", k0), ("k_z", kz), ("m_theta", m)]),
            1.0,
            1.0,
            0.0,
        )
        .unwrap();
        for r in [0.3, 1.0, 7.5] {
            let expect = (k0 * k0 - kz * kz) - (m * m - 0.25) / (r * r);
            let got = effective_frequency(&prof, r).unwrap();
            assert!((got - expect).abs() <= 1e-12 * expect.abs().max(1.0), "r={r}");
        }
    }

    #[test]
    fn unbound_parameter_is_reported() {
        let sys = lookup_system("cylindrical").unwrap();
        let err = sector_profile(&sys, "r", &params(&[("k0", 1.0)]), 1.0, 1.0, 0.0).unwrap_err();
        assert_eq!(err, Error::UnboundParameter("k_z".into()));
    }

    #[test]
    fn kappa_must_be_nonnegative() {
        let sec = SectorSpec::new("x", -1.0, 1.0, Weight::Unit).unwrap();
        assert!(FrequencyProfile::new(sec, 1.0, 1.0, 0.0, Potential::zero(), -1.0).is_err());
    }

    #[test]
    fn kappa_term_uses_weight() {
        let sec = SectorSpec::new("r", 0.0, 5.0, Weight::Power { coeff: 1.0, exponent: 2.0 }).unwrap();
        let prof = FrequencyProfile::new(sec, 1.0, 1.0, 0.5, Potential::zero(), 2.0).unwrap();
        let r: f64 = 1.5;
        let expect = 1.0 - 2.0 / r.powi(4);
        assert!((effective_frequency(&prof, r).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn confocal_interval_must_avoid_roots() {
        let w = Weight::ConfocalQuadric { a2: 3.0, b2: 2.0, c2: 1.0, sign: 1.0 };
        assert!(SectorSpec::new("mu", 0.5, 1.5, w).is_err());
        let sys = lookup_system("confocal_quadric").unwrap();
        let mu = sys.sector("mu").unwrap();
        assert_eq!(mu.singular_endpoints(), &[1.0, 2.0]);
        let s = mu.weight().value(1.5);
        assert!((s - (1.5f64 * 0.5 * 0.5).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn duplicate_labels_rejected() {
        let a = SectorSpec::new("x", 0.0, 1.0, Weight::Unit).unwrap();
        assert!(CoordinateSystem::new("bad", vec![a.clone(), a]).is_err());
    }
}
