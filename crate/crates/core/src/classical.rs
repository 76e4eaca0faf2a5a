//! Classical motion of a charge q = −e in a uniform field B along z plus an
//! infinitely thin solenoid of flux Φ on the z axis.
//!
//! Off the axis the solenoid exerts no force, so orbits are the usual
//! cyclotron circles; the flux only shifts the canonical angular momentum.
//! Rotation is anticlockwise (ω > 0).

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default tie tolerance for [`classify_orbit`], in natural units.
pub const BOUNDARY_EPS: f64 = 1e-12;

/// Physical scales. Every formula carries ħ, M and ω explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
    pub omega: f64,
}

impl Default for Units {
    fn default() -> Self {
        Units::natural()
    }
}

impl Units {
    /// ħ = M = ω = 1.
    pub const fn natural() -> Self {
        Units {
            hbar: 1.0,
            mass: 1.0,
            omega: 1.0,
        }
    }

    pub fn new(hbar: f64, mass: f64, omega: f64) -> Result<Self> {
        let u = Units { hbar, mass, omega };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("omega", self.omega),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// 2ħ/(Mω).
    pub fn magnetic_length_sq(&self) -> f64 {
        2.0 * self.hbar / (self.mass * self.omega)
    }

    /// ρ = Mω r² / (2ħ).
    pub fn rho(&self, r: f64) -> f64 {
        r * r / self.magnetic_length_sq()
    }
}

/// Flux through the solenoid in units of the flux quantum, split as
/// `flux_quanta = l0 + mu` with integer `l0` and `0 ≤ mu < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxConfig {
    pub flux_quanta: f64,
    pub l0: i64,
    pub mu: f64,
}

impl FluxConfig {
    pub fn from_flux(flux_quanta: f64) -> Result<Self> {
        if !flux_quanta.is_finite() || flux_quanta.abs() > 1e12 {
            return Err(Error::Config(format!(
                "flux_quanta {flux_quanta} out of range"
            )));
        }
        let mut l0 = flux_quanta.floor();
        let mut mu = flux_quanta - l0;
        if mu >= 1.0 {
            l0 += 1.0;
            mu = 0.0;
        }
        Ok(FluxConfig {
            flux_quanta,
            l0: l0 as i64,
            mu,
        })
    }

    pub fn new(l0: i64, mu: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&mu) {
            return Err(Error::Config(format!("mu = {mu} must lie in [0, 1)")));
        }
        Ok(FluxConfig {
            flux_quanta: l0 as f64 + mu,
            l0,
            mu,
        })
    }

    /// eΦ/(2πc) = ħ(l0 + μ).
    pub fn angular_shift(&self, units: &Units) -> f64 {
        units.hbar * (self.l0 as f64 + self.mu)
    }
}

/// A cyclotron circle of radius `r` about the center
/// (`rc` cos α_c, `rc` sin α_c), with phase ψ = ωt + ψ₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalOrbit {
    pub r: f64,
    pub rc: f64,
    pub psi0: f64,
    pub alpha_c: f64,
    #[serde(default)]
    pub pz: f64,
    #[serde(default)]
    pub z0: f64,
}

impl ClassicalOrbit {
    pub fn new(r: f64, rc: f64, psi0: f64, alpha_c: f64) -> Result<Self> {
        if !(r >= 0.0 && rc >= 0.0) || !r.is_finite() || !rc.is_finite() {
            return Err(Error::Config(format!(
                "orbit radii must be finite and >= 0 ({r}, {rc})"
            )));
        }
        Ok(ClassicalOrbit {
            r,
            rc,
            psi0,
            alpha_c,
            pz: 0.0,
            z0: 0.0,
        })
    }

    /// Orbit whose invariants are the given classical `a1` (at t = 0) and `a2`.
    pub fn from_a(a1: Complex64, a2: Complex64, units: &Units) -> Self {
        let l = units.magnetic_length_sq().sqrt();
        // a1 = −(R/l) e^{−iψ}
        let psi0 = if a1.norm() == 0.0 {
            0.0
        } else {
            (-a1.conj()).arg()
        };
        ClassicalOrbit {
            r: l * a1.norm(),
            rc: l * a2.norm(),
            psi0,
            alpha_c: a2.arg(),
            pz: 0.0,
            z0: 0.0,
        }
    }

    pub fn center(&self) -> (f64, f64) {
        (self.rc * self.alpha_c.cos(), self.rc * self.alpha_c.sin())
    }

    pub fn r_min(&self) -> f64 {
        (self.r - self.rc).abs()
    }

    pub fn r_max(&self) -> f64 {
        self.r + self.rc
    }

    /// True when the circle passes through the solenoid (R = R_c).
    pub fn touches_solenoid(&self) -> bool {
        self.r_min() <= BOUNDARY_EPS * self.r_max().max(1.0)
    }
}

/// Position and kinetic momentum at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub px: f64,
    pub py: f64,
}

pub fn orbit_state(orbit: &ClassicalOrbit, units: &Units, t: f64) -> PhasePoint {
    let psi = units.omega * t + orbit.psi0;
    let (x0, y0) = orbit.center();
    let (s, c) = psi.sin_cos();
    let mw = units.mass * units.omega;
    PhasePoint {
        x: x0 + orbit.r * c,
        y: y0 + orbit.r * s,
        z: orbit.pz / units.mass * t + orbit.z0,
        px: -mw * orbit.r * s,
        py: mw * orbit.r * c,
    }
}

/// Canonical momentum from the kinetic one: P = p − (q/c)A with q = −e, so
/// p = P − (e/c)A where (e/c)A = [ħ(l0+μ)/r² + Mω/2] (−y, x).
pub fn canonical_momentum(pt: &PhasePoint, units: &Units, flux: &FluxConfig) -> (f64, f64) {
    let r2 = pt.x * pt.x + pt.y * pt.y;
    let g = flux.angular_shift(units) / r2 + 0.5 * units.mass * units.omega;
    (pt.px + g * pt.y, pt.py - g * pt.x)
}

/// Energy and canonical angular momentum of an orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalObservables {
    pub energy: f64,
    pub lz: f64,
}

pub fn classical_observables(
    orbit: &ClassicalOrbit,
    units: &Units,
    flux: &FluxConfig,
) -> ClassicalObservables {
    let mw = units.mass * units.omega;
    ClassicalObservables {
        energy: 0.5 * mw * units.omega * orbit.r * orbit.r,
        lz: 0.5 * mw * (orbit.r * orbit.r - orbit.rc * orbit.rc) - flux.angular_shift(units),
    }
}

/// Classical invariants a1 (time dependent through ψ) and a2, from the orbit
/// parameters.
pub fn classical_a(orbit: &ClassicalOrbit, units: &Units, t: f64) -> (Complex64, Complex64) {
    let k = (units.mass * units.omega / (2.0 * units.hbar)).sqrt();
    let psi = units.omega * t + orbit.psi0;
    (
        -k * orbit.r * Complex64::from_polar(1.0, -psi),
        k * orbit.rc * Complex64::from_polar(1.0, orbit.alpha_c),
    )
}

/// Same invariants built from position and kinetic momentum.
pub fn classical_a_from_phase(pt: &PhasePoint, units: &Units) -> (Complex64, Complex64) {
    let mw = units.mass * units.omega;
    let d = (2.0 * units.hbar * mw).sqrt();
    let a1 = Complex64::new(-pt.py, -pt.px) / d;
    let a2 = Complex64::new(mw * pt.x - pt.py, mw * pt.y + pt.px) / d;
    (a1, a2)
}

/// Which side of the solenoid the orbit lies on: j = 1 orbits embrace it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sector {
    #[serde(rename = "0")]
    J0,
    #[serde(rename = "1")]
    J1,
}

impl Sector {
    pub fn index(self) -> u8 {
        match self {
            Sector::J0 => 0,
            Sector::J1 => 1,
        }
    }

    pub fn from_index(j: i64) -> Result<Self> {
        match j {
            0 => Ok(Sector::J0),
            1 => Ok(Sector::J1),
            _ => Err(Error::Sector(format!("j = {j} is not 0 or 1"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrbitClass {
    Sector(Sector),
    Boundary,
}

impl std::fmt::Display for OrbitClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OrbitClass::Sector(s) => write!(f, "{}", s.index()),
            OrbitClass::Boundary => f.write_str("boundary"),
        }
    }
}

/// Sign of R² − R_c², with ties within `eps` reported as a boundary orbit.
pub fn classify_orbit_eps(orbit: &ClassicalOrbit, eps: f64) -> OrbitClass {
    let d = orbit.r * orbit.r - orbit.rc * orbit.rc;
    if d > eps {
        OrbitClass::Sector(Sector::J1)
    } else if d < -eps {
        OrbitClass::Sector(Sector::J0)
    } else {
        OrbitClass::Boundary
    }
}

pub fn classify_orbit(orbit: &ClassicalOrbit) -> OrbitClass {
    classify_orbit_eps(orbit, BOUNDARY_EPS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const NAT: Units = Units::natural();

    #[test]
    fn state_at_start() {
        let o = ClassicalOrbit::new(2.0, 3.0, 0.0, 0.0).unwrap();
        let p = orbit_state(&o, &NAT, 0.0);
        assert_abs_diff_eq!(p.x, 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.px, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.py, 2.0, epsilon = 1e-15);

        let touch = ClassicalOrbit::new(1.0, 1.0, PI, 0.0).unwrap();
        let p = orbit_state(&touch, &NAT, 0.0);
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-15);
        assert!(touch.touches_solenoid());
        assert!(!o.touches_solenoid());
    }

    #[test]
    fn observables() {
        let flux = FluxConfig::from_flux(2.3).unwrap();
        assert_eq!(flux.l0, 2);
        let o = ClassicalOrbit::new(3.0, 1.0, 0.4, 1.1).unwrap();
        let obs = classical_observables(&o, &NAT, &flux);
        assert_abs_diff_eq!(obs.energy, 4.5, epsilon = 1e-14);
        assert_abs_diff_eq!(obs.lz, 1.7, epsilon = 1e-14);
        // L_z = x p_y − y p_x with canonical momenta along the orbit
        for k in 0..7 {
            let p = orbit_state(&o, &NAT, 0.9 * k as f64);
            let (cx, cy) = canonical_momentum(&p, &NAT, &flux);
            assert_abs_diff_eq!(p.x * cy - p.y * cx, 1.7, epsilon = 1e-12);
        }

        let zero = ClassicalOrbit::new(0.0, 2.0, 0.0, 0.0).unwrap();
        let obs = classical_observables(&zero, &NAT, &flux);
        assert_eq!(obs.energy, 0.0);
        assert_abs_diff_eq!(obs.lz, -2.0 - 2.3, epsilon = 1e-14);
        let tie = ClassicalOrbit::new(1.5, 1.5, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(
            classical_observables(&tie, &NAT, &flux).lz,
            -2.3,
            epsilon = 1e-14
        );
    }

    #[test]
    fn invariants_a() {
        let o = ClassicalOrbit::new(2.0, 0.0, 0.0, 0.0).unwrap();
        let (a1, a2) = classical_a(&o, &NAT, 0.0);
        assert_abs_diff_eq!(a1.re, -(2.0f64.sqrt()), epsilon = 1e-15);
        assert_abs_diff_eq!(a1.im, 0.0, epsilon = 1e-15);
        assert_eq!(a2.norm(), 0.0);
        let o = ClassicalOrbit::new(0.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(classical_a(&o, &NAT, 3.0).0.norm(), 0.0);
    }

    #[test]
    fn flux_decomposition() {
        let f = FluxConfig::from_flux(-0.25).unwrap();
        assert_eq!((f.l0, f.mu), (-1, 0.75));
        let f = FluxConfig::from_flux(3.0).unwrap();
        assert_eq!((f.l0, f.mu), (3, 0.0));
        let f = FluxConfig::from_flux(-1e-20).unwrap();
        assert!(f.mu < 1.0);
        assert!(FluxConfig::new(0, 1.0).is_err());
    }

    #[test]
    fn classification() {
        let c = |r, rc| classify_orbit(&ClassicalOrbit::new(r, rc, 0.0, 0.0).unwrap());
        assert_eq!(c(3.0, 1.0), OrbitClass::Sector(Sector::J1));
        assert_eq!(c(1.0, 3.0), OrbitClass::Sector(Sector::J0));
        assert_eq!(c(1.0, 1.0), OrbitClass::Boundary);
    }

    fn orbit_strategy() -> impl Strategy<Value = (ClassicalOrbit, Units, FluxConfig)> {
        (
            0.0..4.0f64,
            0.0..4.0f64,
            -PI..PI,
            -PI..PI,
            0.3..3.0f64,
            0.3..3.0f64,
            0.3..3.0f64,
            -3.0..3.0f64,
        )
            .prop_map(|(r, rc, psi0, ac, h, m, w, f)| {
                (
                    ClassicalOrbit::new(r, rc, psi0, ac).unwrap(),
                    Units::new(h, m, w).unwrap(),
                    FluxConfig::from_flux(f).unwrap(),
                )
            })
    }

    proptest! {
        #[test]
        fn conserved_along_orbit((o, u, flux) in orbit_strategy(), t in -50.0..50.0f64) {
            let p = orbit_state(&o, &u, t);
            let (a1, a2) = classical_a_from_phase(&p, &u);
            let (b1, b2) = classical_a(&o, &u, t);
            prop_assert!((a1 - b1).norm() < 1e-12);
            prop_assert!((a2 - b2).norm() < 1e-12);
            // a1 e^{iψ} is a constant of motion
            let psi = u.omega * t + o.psi0;
            let c = a1 * Complex64::from_polar(1.0, psi);
            prop_assert!((c.re + o.r / u.magnetic_length_sq().sqrt()).abs() < 1e-12);
            prop_assert!(c.im.abs() < 1e-12);

            let l2 = u.magnetic_length_sq();
            prop_assert!((l2 * a1.norm_sqr() - o.r * o.r).abs() < 1e-12 * (1.0 + o.r * o.r));
            prop_assert!((l2 * a2.norm_sqr() - o.rc * o.rc).abs() < 1e-12 * (1.0 + o.rc * o.rc));
            let xy = l2.sqrt() * (a2 - a1.conj());
            prop_assert!((xy.re - p.x).abs() < 1e-12 && (xy.im - p.y).abs() < 1e-12);

            let obs = classical_observables(&o, &u, &flux);
            let e = u.omega * u.hbar * a1.norm_sqr();
            let lz = u.hbar * (a1.norm_sqr() - a2.norm_sqr()) - flux.angular_shift(&u);
            prop_assert!((e - obs.energy).abs() < 1e-12 * (1.0 + obs.energy.abs()));
            prop_assert!((lz - obs.lz).abs() < 1e-12 * (1.0 + obs.lz.abs()));

            let r2 = p.x * p.x + p.y * p.y;
            let want = o.r * o.r + o.rc * o.rc + 2.0 * o.r * o.rc * (psi - o.alpha_c).cos();
            prop_assert!((r2 - want).abs() < 1e-10);
        }

        #[test]
        fn radius_extremes((o, u, _f) in orbit_strategy()) {
            let period = 2.0 * PI / u.omega;
            let r2 = |t: f64| {
                let p = orbit_state(&o, &u, t);
                p.x * p.x + p.y * p.y
            };
            // coarse scan, then golden-section refinement of r² on either extreme
            let refine = |sign: f64| {
                let n = 64;
                let h = period / n as f64;
                let best = (0..n)
                    .map(|k| k as f64 * h)
                    .min_by(|a, b| (sign * r2(*a)).total_cmp(&(sign * r2(*b))))
                    .unwrap();
                let (mut a, mut b) = (best - h, best + h);
                let g = 0.5 * (5.0f64.sqrt() - 1.0);
                for _ in 0..120 {
                    let c = b - g * (b - a);
                    let d = a + g * (b - a);
                    if sign * r2(c) < sign * r2(d) { b = d } else { a = c }
                }
                r2(0.5 * (a + b))
            };
            let lo = refine(1.0);
            let hi = refine(-1.0);
            prop_assert!((lo - o.r_min().powi(2)).abs() < 1e-10, "{} {}", lo, o.r_min());
            prop_assert!((hi - o.r_max().powi(2)).abs() < 1e-10, "{} {}", hi, o.r_max());
        }

        #[test]
        fn from_a_round_trip((o, u, _f) in orbit_strategy()) {
            let (a1, a2) = classical_a(&o, &u, 0.0);
            let back = ClassicalOrbit::from_a(a1, a2, &u);
            let (b1, b2) = classical_a(&back, &u, 0.0);
            prop_assert!((a1 - b1).norm() < 1e-12 && (a2 - b2).norm() < 1e-12);
        }
    }
}
