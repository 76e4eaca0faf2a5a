//! Coherent states Φ^{(j)}_{z1,z2} = Σ_{m,l} z1^{n1} z2^{n2} / √(Γ(1+n1)Γ(1+n2)) Φ_{n1,n2},
//! one family per sector, together with their overlaps, means and time
//! evolution.
//!
//! Overlaps reduce to the Q family: (Φ^{(1)}, Φ^{(1)}) = Q_μ(|z2|, |z1|) and
//! (Φ^{(0)}, Φ^{(0)}) = Q_{1−μ}(|z1|, |z2|). Means of N̂_s are the logarithmic
//! derivatives of these; means of a_s follow from Δ = Q⁻/Q.

pub mod lattice;
pub mod qfn;
pub mod yfn;

pub use lattice::{
    build_lattice, build_lattice_capped, cell_occupations, coefficient, ladder_image, ladder_mean,
    lattice_bounds, mean_rho, observable_moments, CoefficientLattice, Moments, Observable,
    DEFAULT_CELL_CAP,
};
pub use qfn::{
    delta_complement, delta_fn, ln_q_double, ln_q_fn, ln_q_minus, ln_q_tilde_series, one_minus_t,
    q_complex, q_fn, q_minus, q_tilde, t_fn, t_split, TSplit,
};
pub use yfn::{y_fn, YMode};

use crate::classical::{Sector, Units};
use crate::error::{domain, Error, Result};
use crate::special::ln_gamma;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Tail tolerance of the lattices built internally for variances.
pub const INTERNAL_TOL: f64 = 1e-13;

/// Relative squared mass left out of the wavefunction's l-sum; pointwise
/// errors scale with its square root, hence the much smaller value.
const WAVE_TOL: f64 = 1e-32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentParams {
    pub j: Sector,
    pub z1: Complex64,
    pub z2: Complex64,
    pub mu: f64,
    pub l0: i64,
}

impl CoherentParams {
    pub fn new(j: i64, z1: Complex64, z2: Complex64, mu: f64, l0: i64) -> Result<Self> {
        let p = CoherentParams {
            j: Sector::from_index(j)?,
            z1,
            z2,
            mu,
            l0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.mu) {
            return Err(Error::Sector(format!(
                "mu = {} must lie in [0, 1)",
                self.mu
            )));
        }
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        if !finite(self.z1) || !finite(self.z2) {
            return Err(domain("coherent", "z1 and z2 must be finite"));
        }
        Ok(())
    }

    /// True when both |z_s|² ≫ 1 and ||z1|² − |z2|²| ≫ 1, taking 9 as the threshold.
    pub fn semiclassical(&self) -> bool {
        let a = self.z1.norm_sqr();
        let b = self.z2.norm_sqr();
        a >= 9.0 && b >= 9.0 && (a - b).abs() >= 9.0
    }

    /// Errors for parameter values whose state is identically zero.
    pub fn check_nondegenerate(&self) -> Result<()> {
        match self.j {
            Sector::J1 if self.z1.norm() == 0.0 && self.mu > 0.0 => Err(Error::Degenerate(
                "j = 1 with z1 = 0 and mu > 0: every coefficient carries z1^(l+mu)".into(),
            )),
            Sector::J0 if self.z2.norm() == 0.0 => Err(Error::Degenerate(
                "j = 0 with z2 = 0: every coefficient carries z2^(m-l-mu)".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Order α and arguments (u, v) of the norm Q_α(u, v); v belongs to N̂1
    /// for j = 1 and to N̂2 for j = 0.
    fn q_args(&self) -> (f64, f64, f64) {
        match self.j {
            Sector::J1 => (self.mu, self.z2.norm(), self.z1.norm()),
            Sector::J0 => (1.0 - self.mu, self.z1.norm(), self.z2.norm()),
        }
    }
}

/// ln (Φ, Φ).
pub fn ln_norm_sqr(p: &CoherentParams) -> Result<f64> {
    p.validate()?;
    let (alpha, u, v) = p.q_args();
    if u > 0.0 && v > 0.0 {
        ln_q_fn(alpha, u, v)
    } else {
        ln_q_double(alpha, u, v)
    }
}

/// Principal power arguments: the pair whose exponents are non-integer
/// must not wrap past the negative real axis, or Σ c*c′ and the Q form
/// disagree by a phase.
fn check_branch(w_conj: Complex64, w: Complex64) -> Result<()> {
    if w_conj.norm() == 0.0 || w.norm() == 0.0 {
        return Ok(());
    }
    let total = w_conj.arg() + w.arg();
    if total <= -PI || total > PI {
        return Err(Error::Branch {
            func: "overlap",
            detail: format!(
                "arg(z*) + arg(z') = {total:.6} leaves (-pi, pi]; the principal power of z* z' \
                 differs from the product of principal powers"
            ),
        });
    }
    Ok(())
}

/// (Φ^{(j)}_{z}, Φ^{(j′)}_{z′}).
pub fn overlap(p: &CoherentParams, p2: &CoherentParams) -> Result<Complex64> {
    p.validate()?;
    p2.validate()?;
    if p.mu != p2.mu || p.l0 != p2.l0 {
        return Err(domain("overlap", "states must share mu and l0"));
    }
    if p.j != p2.j {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if p.z1 == p2.z1 && p.z2 == p2.z2 {
        let ln = ln_norm_sqr(p)?;
        if ln > f64::MAX.ln() {
            return Err(Error::Overflow {
                func: "overlap",
                ln_value: ln,
            });
        }
        return Ok(Complex64::new(ln.exp(), 0.0));
    }
    let a1 = p.z1.conj() * p2.z1;
    let a2 = p.z2.conj() * p2.z2;
    match p.j {
        Sector::J1 => {
            if p.mu > 0.0 {
                check_branch(p.z1.conj(), p2.z1)?;
            }
            q_complex(p.mu, a2, a1)
        }
        Sector::J0 => {
            check_branch(p.z2.conj(), p2.z2)?;
            q_complex(1.0 - p.mu, a1, a2)
        }
    }
}

/// (x/2) d/dx f at x by centered differences with one Richardson step.
fn log_derivative(f: impl Fn(f64) -> Result<f64>, x: f64) -> Result<f64> {
    let h = 1e-5 * x;
    let d = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let d1 = d(h)?;
    let d2 = d(0.5 * h)?;
    let r = (4.0 * d2 - d1) / 3.0;
    if !r.is_finite() {
        return Err(Error::NoConvergence {
            func: "mean_n",
            terms: 2,
            estimate: (d2 - d1).abs(),
        });
    }
    Ok(0.5 * x * r)
}

/// ⟨N̂_s⟩, s ∈ {1, 2}.
pub fn mean_n(p: &CoherentParams, s: u8) -> Result<f64> {
    p.validate()?;
    p.check_nondegenerate()?;
    if s != 1 && s != 2 {
        return Err(domain("mean_n", format!("s = {s} must be 1 or 2")));
    }
    let (alpha, u, v) = p.q_args();
    if u == 0.0 || v == 0.0 {
        let lat = build_lattice(p, INTERNAL_TOL)?;
        let obs = if s == 1 {
            Observable::N1
        } else {
            Observable::N2
        };
        return Ok(observable_moments(&lat, obs, &Units::natural())?.mean.re);
    }
    let on_v = matches!((p.j, s), (Sector::J1, 1) | (Sector::J0, 2));
    if on_v {
        Ok(v * v + log_derivative(|x| ln_q_tilde_series(alpha, u, x), v)?)
    } else {
        Ok(u * u + log_derivative(|x| ln_q_tilde_series(alpha, x, v), u)?)
    }
}

/// ⟨a_s⟩, s ∈ {1, 2}.
pub fn mean_a(p: &CoherentParams, s: u8) -> Result<Complex64> {
    p.validate()?;
    p.check_nondegenerate()?;
    let (alpha, u, v) = p.q_args();
    match (p.j, s) {
        (Sector::J1, 1) => Ok(p.z1),
        (Sector::J0, 2) => Ok(p.z2),
        (Sector::J1, 2) => Ok(p.z2 * qfn::delta_any(alpha, u, v)?),
        (Sector::J0, 1) => Ok(p.z1 * qfn::delta_any(alpha, u, v)?),
        _ => Err(domain("mean_a", format!("s = {s} must be 1 or 2"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanReport {
    pub n1_mean: f64,
    pub n2_mean: f64,
    pub a1_mean: Complex64,
    pub a2_mean: Complex64,
    /// ⟨x + iy⟩ in length units.
    pub position_mean: Complex64,
    pub r_mean: f64,
    pub rc_mean: f64,
    pub var_r2: f64,
    pub var_rc2: f64,
    pub var_position: f64,
}

pub fn mean_geometry(p: &CoherentParams, units: &Units) -> Result<MeanReport> {
    units.validate()?;
    let a1 = mean_a(p, 1)?;
    let a2 = mean_a(p, 2)?;
    let scale = units.magnetic_length_sq().sqrt();
    let lat = build_lattice(p, INTERNAL_TOL)?;
    let r2 = observable_moments(&lat, Observable::R2, units)?;
    let rc2 = observable_moments(&lat, Observable::Rc2, units)?;
    let pos = observable_moments(&lat, Observable::XPlusIY, units)?;
    Ok(MeanReport {
        n1_mean: mean_n(p, 1)?,
        n2_mean: mean_n(p, 2)?,
        a1_mean: a1,
        a2_mean: a2,
        position_mean: scale * (a2 - a1.conj()),
        r_mean: scale * a1.norm(),
        rc_mean: scale * a2.norm(),
        var_r2: r2.variance,
        var_rc2: rc2.variance,
        var_position: pos.variance,
    })
}

/// z1 ↦ z1 e^{−iωt}, z2 fixed.
pub fn evolve(p: &CoherentParams, t: f64, units: &Units) -> CoherentParams {
    CoherentParams {
        z1: p.z1 * Complex64::from_polar(1.0, -units.omega * t),
        ..*p
    }
}

/// Ψ^{(j)}(t, r, φ, z) = exp{−(i/ħ)[(p_z²/2M + ħω/2)t − p_z z]} Φ^{(j)}_{z1(t),z2}(φ, ρ).
///
/// z1(t) keeps a continuous phase arg z1 − ωt, so that each component
/// evolves as e^{−iωt n1} exactly. For j = 1 the exponents n1 are not
/// integers when μ > 0, and one period multiplies the state by e^{−2πiμ}
/// on top of the global phase.
pub fn wavefunction(
    p: &CoherentParams,
    units: &Units,
    pz: f64,
    t: f64,
    r: f64,
    phi: f64,
    z: f64,
) -> Result<Complex64> {
    units.validate()?;
    p.validate()?;
    p.check_nondegenerate()?;
    if !(r >= 0.0) {
        return Err(domain("wavefunction", format!("r = {r} must be >= 0")));
    }
    let rho = units.rho(r);
    let theta1 = p.z1.arg() - units.omega * t;
    let z1t = Complex64::from_polar(p.z1.norm(), theta1);
    let ln_norm = ln_norm_sqr(p)?;
    let (_, l_len) = lattice_bounds(p, WAVE_TOL, ln_norm);
    let w = z1t * p.z2;
    let mut sum = Complex64::new(0.0, 0.0);
    for c in 0..l_len {
        let (l, alpha, b_abs, b_arg) = match p.j {
            Sector::J1 => (c as i64, c as f64 + p.mu, p.z1.norm(), theta1),
            Sector::J0 => (
                -(c as i64) - 1,
                c as f64 + 1.0 - p.mu,
                p.z2.norm(),
                p.z2.arg(),
            ),
        };
        let ln_b_alpha = if b_abs == 0.0 {
            if alpha != 0.0 {
                continue;
            }
            Complex64::new(0.0, 0.0)
        } else {
            alpha * Complex64::new(b_abs.ln(), b_arg)
        };
        let y = yfn::y_from_log_power(alpha, w, ln_b_alpha, rho)?;
        let mut ang = Complex64::from_polar(1.0, (l - p.l0) as f64 * phi);
        if p.j == Sector::J1 && l.rem_euclid(2) == 1 {
            ang = -ang;
        }
        sum += ang * y;
    }
    let phase = -((pz * pz / (2.0 * units.mass) + 0.5 * units.hbar * units.omega) * t - pz * z)
        / units.hbar;
    Ok(Complex64::from_polar(1.0, phase) * sum)
}

/// ln of the largest |c|² in the lattice domain, a lower bound on ln Σ|c|².
pub(crate) fn ln_peak_weight(p: &CoherentParams) -> f64 {
    let a = p.z1.norm_sqr();
    let b = p.z2.norm_sqr();
    let (x_major, nu0, x_minor) = match p.j {
        Sector::J1 => (a, p.mu, b),
        Sector::J0 => (b, 1.0 - p.mu, a),
    };
    let w = |n: f64, x: f64| {
        if x == 0.0 {
            if n == 0.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            n * x.ln() - ln_gamma(1.0 + n).expect("n > -1")
        }
    };
    let k = (x_major - nu0).floor().max(0.0);
    let m = x_minor.floor().min(k);
    w(k + nu0, x_major) + w(m, x_minor)
}
