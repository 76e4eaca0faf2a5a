//! Stationary states of the transverse Hamiltonian.
//!
//! States are labelled by a sector j, a radial index m ≥ 0 and an angular
//! index l (l ≥ 0 for j = 1, l ≤ −1 for j = 0). Writing ν = |l + μ| for the
//! Laguerre order, both sectors share the radial function I_{m+ν,m}(ρ):
//!
//! * j = 1: n1 = m + l + μ, n2 = m, Φ = e^{i(l−l0)φ − iπl} I_{n1,n2}(ρ)
//! * j = 0: n1 = m, n2 = m − l − μ, Φ = e^{i(l−l0)φ} I_{n2,n1}(ρ)
//!
//! The normalization constant is 1, so the states are orthonormal under
//! (f, g) = (1/2π) ∫dρ ∫dφ f* g.

use crate::classical::{FluxConfig, Sector, Units};
use crate::error::{Error, Result};
use crate::special::quadrature::{integrate_radial, QuadOptions};
use crate::special::{laguerre_fn, ln_gamma, EvalResult};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::cell::RefCell;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumNumbers {
    pub j: Sector,
    pub m: u32,
    pub l: i64,
    pub n1: f64,
    pub n2: f64,
    pub mu: f64,
}

pub fn make_qn(j: i64, m: i64, l: i64, mu: f64) -> Result<QuantumNumbers> {
    let sector = Sector::from_index(j)?;
    if m < 0 || m > u32::MAX as i64 {
        return Err(Error::Sector(format!(
            "m = {m} must be a non-negative integer"
        )));
    }
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::Sector(format!("mu = {mu} must lie in [0, 1)")));
    }
    let mf = m as f64;
    let (n1, n2) = match sector {
        Sector::J1 if l >= 0 => (mf + l as f64 + mu, mf),
        Sector::J0 if l <= -1 => (mf, mf - l as f64 - mu),
        _ => {
            return Err(Error::Sector(format!(
                "l = {l} is outside sector j = {j} (j=1 needs l >= 0, j=0 needs l <= -1)"
            )))
        }
    };
    Ok(QuantumNumbers {
        j: sector,
        m: m as u32,
        l,
        n1,
        n2,
        mu,
    })
}

impl QuantumNumbers {
    /// Laguerre order |l + μ| of the radial factor I_{m+ν,m}.
    pub fn order(&self) -> f64 {
        match self.j {
            Sector::J1 => self.l as f64 + self.mu,
            Sector::J0 => -(self.l as f64) - self.mu,
        }
    }

    /// Angular factor e^{i(l−l0)φ}, times (−1)^l in sector 1.
    pub fn angular(&self, l0: i64, phi: f64) -> Complex64 {
        let c = Complex64::from_polar(1.0, (self.l - l0) as f64 * phi);
        if self.j == Sector::J1 && self.l.rem_euclid(2) == 1 {
            -c
        } else {
            c
        }
    }

    pub fn radial(&self, rho: f64) -> Result<f64> {
        laguerre_fn(self.order(), self.m as usize, rho)
    }

    /// Radius beyond which |Φ|² is below 1e−20 of its scale.
    pub fn rho_cut(&self) -> Result<f64> {
        radial_cut(self.order(), self.m as usize)
    }
}

/// Cutoff for I_{m+ν,m}(ρ)²: the large-ρ envelope e^{−ρ}ρ^{ν+2m}/(m!Γ(m+ν+1))
/// falls below 1e−20 beyond it.
pub fn radial_cut(nu: f64, m: usize) -> Result<f64> {
    let p = nu + 2.0 * m as f64;
    let norm = ln_gamma(m as f64 + 1.0)? + ln_gamma(m as f64 + nu + 1.0)?;
    let target = -20.0 * std::f64::consts::LN_10;
    let mut rho = 2.0 * p + 20.0;
    while p * rho.ln() - rho - norm > target {
        rho += 1.0 + 0.05 * rho;
    }
    Ok(rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelEntry {
    pub qn: QuantumNumbers,
    /// Energy in units of ħω.
    pub energy: f64,
    /// L_z in units of ħ.
    pub lz: f64,
}

pub fn energy_lz(qn: &QuantumNumbers, l0: i64) -> LevelEntry {
    LevelEntry {
        qn: *qn,
        energy: qn.n1 + 0.5,
        lz: (qn.l - l0) as f64,
    }
}

/// Φ^{(j)}_{n1,n2}(φ, ρ).
pub fn eigenfunction(qn: &QuantumNumbers, l0: i64, phi: f64, rho: f64) -> Result<Complex64> {
    Ok(qn.angular(l0, phi) * qn.radial(rho)?)
}

/// Eigenfunction at a Cartesian point, with ρ = Mω r²/(2ħ).
pub fn eigenfunction_xy(
    qn: &QuantumNumbers,
    l0: i64,
    units: &Units,
    x: f64,
    y: f64,
) -> Result<Complex64> {
    eigenfunction(qn, l0, y.atan2(x), units.rho((x * x + y * y).sqrt()))
}

/// Grid and tolerances for [`inner_product`].
#[derive(Debug, Clone, Copy)]
pub struct InnerOptions {
    /// Trapezoid nodes in φ; exact for e^{ikφ} with |k| < n_phi.
    pub n_phi: usize,
    pub rho_cut: f64,
    pub quad: QuadOptions,
}

impl InnerOptions {
    pub fn with_cut(rho_cut: f64) -> Self {
        InnerOptions {
            n_phi: 64,
            rho_cut,
            quad: QuadOptions::default(),
        }
    }
}

/// (f, g) = (1/2π) ∫₀^{ρ_cut} dρ ∫₀^{2π} dφ f* g.
///
/// The φ integral uses the uniform trapezoid rule, the ρ integral adaptive
/// Gauss–Kronrod. The first error raised by `f` or `g` aborts the result.
pub fn inner_product<F, G>(f: F, g: G, opts: &InnerOptions) -> Result<EvalResult<Complex64>>
where
    F: Fn(f64, f64) -> Result<Complex64>,
    G: Fn(f64, f64) -> Result<Complex64>,
{
    let n = opts.n_phi.max(1);
    let h = 2.0 * PI / n as f64;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |rho: f64| {
        if failure.borrow().is_some() {
            return Complex64::new(0.0, 0.0);
        }
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let phi = k as f64 * h;
            match (f(phi, rho), g(phi, rho)) {
                (Ok(a), Ok(b)) => s += a.conj() * b,
                (Err(e), _) | (_, Err(e)) => {
                    *failure.borrow_mut() = Some(e);
                    return Complex64::new(0.0, 0.0);
                }
            }
        }
        s / n as f64
    };
    let r = integrate_radial(integrand, opts.rho_cut, &opts.quad)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(EvalResult {
        value: r.value,
        abs_error_estimate: r.abs_error,
        terms_used: r.evaluations,
    })
}

/// Inner product of two eigenstates by quadrature.
pub fn state_overlap(
    a: &QuantumNumbers,
    b: &QuantumNumbers,
    l0: i64,
) -> Result<EvalResult<Complex64>> {
    let cut = a.rho_cut()?.max(b.rho_cut()?);
    let dl = (a.l - b.l).unsigned_abs() as usize;
    let opts = InnerOptions {
        n_phi: (dl + 2).max(8),
        ..InnerOptions::with_cut(cut)
    };
    inner_product(
        |phi, rho| eigenfunction(a, l0, phi, rho),
        |phi, rho| eigenfunction(b, l0, phi, rho),
        &opts,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LadderOp {
    A1,
    A1Dag,
    A2,
    A2Dag,
}

impl LadderOp {
    pub const ALL: [LadderOp; 4] = [LadderOp::A1, LadderOp::A1Dag, LadderOp::A2, LadderOp::A2Dag];

    /// Shifts (Δn1, Δn2).
    pub fn shift(self) -> (i64, i64) {
        match self {
            LadderOp::A1 => (-1, 0),
            LadderOp::A1Dag => (1, 0),
            LadderOp::A2 => (0, -1),
            LadderOp::A2Dag => (0, 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LadderTarget {
    /// The operator annihilates the state.
    Zero,
    /// The image is a function singular at r → 0, outside the regular domain.
    Irregular {
        n1: f64,
        n2: f64,
    },
    State(QuantumNumbers),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderResult {
    pub coefficient: f64,
    pub target: LadderTarget,
}

/// Action of a1, a1†, a2, a2† on an eigenstate: op Φ = coefficient · target.
///
/// Lowering n1 (or n2) always shifts l by −1 (or +1), so for μ > 0 the
/// step out of a sector lands on the irregular solution with Laguerre order
/// −μ or μ−1. At μ = 0 that function is the regular state of the other
/// sector with the same (n1, n2).
pub fn ladder_apply(op: LadderOp, qn: &QuantumNumbers) -> LadderResult {
    let (d1, d2) = op.shift();
    let coefficient = match op {
        LadderOp::A1 => qn.n1.sqrt(),
        LadderOp::A1Dag => (qn.n1 + 1.0).sqrt(),
        LadderOp::A2 => qn.n2.sqrt(),
        LadderOp::A2Dag => (qn.n2 + 1.0).sqrt(),
    };
    if coefficient == 0.0 {
        return LadderResult {
            coefficient,
            target: LadderTarget::Zero,
        };
    }
    let l = qn.l + d1 - d2;
    let m = qn.m as i64
        + match qn.j {
            Sector::J1 => d2,
            Sector::J0 => d1,
        };
    let stays = match qn.j {
        Sector::J1 => l >= 0,
        Sector::J0 => l <= -1,
    };
    let target = if stays {
        // m ≥ 0 here: the only way to reach m = −1 is through a √0 coefficient
        LadderTarget::State(make_qn(qn.j.index() as i64, m, l, qn.mu).expect("in-sector target"))
    } else {
        let n1 = qn.n1 + d1 as f64;
        let n2 = qn.n2 + d2 as f64;
        if qn.mu == 0.0 {
            let (j, m) = if n1 >= n2 { (1, n2) } else { (0, n1) };
            LadderTarget::State(
                make_qn(j, m.round() as i64, (n1 - n2).round() as i64, 0.0)
                    .expect("cross-sector target"),
            )
        } else {
            LadderTarget::Irregular { n1, n2 }
        }
    };
    LadderResult {
        coefficient,
        target,
    }
}

/// Both sectors' levels for 0 ≤ m ≤ m_max and l_min ≤ l ≤ l_max, sorted by
/// energy, then sector, m and l.
pub fn level_diagram(flux: &FluxConfig, m_max: u32, l_min: i64, l_max: i64) -> Vec<LevelEntry> {
    let mut keys = Vec::new();
    for l in l_min..=l_max {
        let j = if l >= 0 { 1 } else { 0 };
        for m in 0..=m_max {
            keys.push((j, m as i64, l));
        }
    }
    let mut levels: Vec<LevelEntry> = keys
        .par_iter()
        .map(|&(j, m, l)| energy_lz(&make_qn(j, m, l, flux.mu).expect("valid by range"), flux.l0))
        .collect();
    levels.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then(a.qn.j.cmp(&b.qn.j))
            .then(a.qn.m.cmp(&b.qn.m))
            .then(a.qn.l.cmp(&b.qn.l))
    });
    levels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quantum_numbers() {
        let q = make_qn(1, 2, 3, 0.4).unwrap();
        assert_abs_diff_eq!(q.n1, 5.4, epsilon = 1e-15);
        assert_eq!(q.n2, 2.0);
        let q = make_qn(0, 2, -3, 0.4).unwrap();
        assert_eq!(q.n1, 2.0);
        assert_abs_diff_eq!(q.n2, 4.6, epsilon = 1e-15);
        assert!(matches!(make_qn(0, 0, 0, 0.3), Err(Error::Sector(_))));
        assert!(make_qn(1, 0, -1, 0.3).is_err());
        assert!(make_qn(2, 0, 0, 0.3).is_err());
        assert!(make_qn(1, -1, 0, 0.3).is_err());
    }

    #[test]
    fn energies() {
        let e = energy_lz(&make_qn(1, 0, 0, 0.3).unwrap(), 0);
        assert_abs_diff_eq!(e.energy, 0.8, epsilon = 1e-15);
        for mu in [0.0, 0.3, 0.9] {
            assert_eq!(energy_lz(&make_qn(0, 0, -1, mu).unwrap(), 0).energy, 0.5);
        }
        let e = energy_lz(&make_qn(1, 1, 2, 0.0).unwrap(), 3);
        assert_eq!(e.energy, 3.5);
        assert_eq!(e.lz, -1.0);
    }

    #[test]
    fn eigenfunction_values() {
        let q = make_qn(1, 0, 0, 0.0).unwrap();
        assert_eq!(
            eigenfunction(&q, 0, 1.234, 0.0).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        // n2 = m − l − μ = 0.7, so the radial factor is I_{0.7,0}
        let q = make_qn(0, 0, -1, 0.3).unwrap();
        let rho: f64 = 1.7;
        let want = (1.0 / gamma(1.7).unwrap()).sqrt() * (-rho / 2.0).exp() * rho.powf(0.35);
        let got = eigenfunction(&q, 0, 0.0, rho).unwrap();
        assert_abs_diff_eq!(got.re, want, epsilon = 1e-14);
        // odd l in sector 1 carries the e^{−iπl} sign
        let q = make_qn(1, 0, 1, 0.0).unwrap();
        assert!(eigenfunction(&q, 1, 0.0, 1.0).unwrap().re < 0.0);
    }

    #[test]
    fn normalized_and_orthogonal() {
        let a = make_qn(1, 2, 1, 0.3).unwrap();
        let b = make_qn(1, 1, 1, 0.3).unwrap();
        let c = make_qn(0, 2, -2, 0.3).unwrap();
        let aa = state_overlap(&a, &a, 1).unwrap();
        assert!((aa.value - 1.0).norm() < 1e-9, "{:?}", aa);
        assert!(aa.abs_error_estimate < 1e-9);
        assert!(state_overlap(&a, &b, 1).unwrap().value.norm() < 1e-9);
        assert!(state_overlap(&a, &c, 1).unwrap().value.norm() < 1e-9);
    }

    #[test]
    fn orthonormality_matrix() {
        let mut states = Vec::new();
        for mu in [0.0, 0.45] {
            for (j, m, l) in [
                (1, 0, 0),
                (1, 1, 0),
                (1, 0, 2),
                (1, 3, 1),
                (1, 2, 4),
                (1, 5, 0),
                (0, 0, -1),
                (0, 2, -1),
                (0, 1, -3),
                (0, 4, -2),
                (0, 0, -5),
                (0, 3, -4),
                (1, 1, 1),
                (0, 1, -1),
                (1, 6, 2),
            ] {
                states.push(make_qn(j, m, l, mu).unwrap());
            }
        }
        assert_eq!(states.len(), 30);
        let mut worst = 0.0f64;
        for (i, a) in states.iter().enumerate() {
            for b in &states[i..] {
                if a.mu != b.mu {
                    continue;
                }
                let v = state_overlap(a, b, 0).unwrap().value;
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((v - want).norm());
            }
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn ladder_rules() {
        // a1 on the bottom of sector 1 leaves the sector
        let q = make_qn(1, 0, 0, 0.5).unwrap();
        let r = ladder_apply(LadderOp::A1, &q);
        assert_abs_diff_eq!(r.coefficient, 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(matches!(r.target, LadderTarget::Irregular { .. }));
        let r = ladder_apply(LadderOp::A1, &make_qn(1, 0, 2, 0.5).unwrap());
        assert_abs_diff_eq!(r.coefficient, 2.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(
            r.target,
            LadderTarget::State(make_qn(1, 0, 1, 0.5).unwrap())
        );
        assert_eq!(
            ladder_apply(LadderOp::A2, &make_qn(1, 0, 3, 0.2).unwrap()).target,
            LadderTarget::Zero
        );
        assert_eq!(
            ladder_apply(LadderOp::A1, &make_qn(0, 0, -3, 0.2).unwrap()).target,
            LadderTarget::Zero
        );
        let r = ladder_apply(LadderOp::A1Dag, &make_qn(0, 3, -2, 0.1).unwrap());
        assert_eq!(r.coefficient, 2.0);
        assert_eq!(
            r.target,
            LadderTarget::State(make_qn(0, 4, -1, 0.1).unwrap())
        );
        // j=0, l=−1 raised by a2: irregular for μ > 0, the j=1 state at μ = 0
        let r = ladder_apply(LadderOp::A2, &make_qn(0, 2, -1, 0.3).unwrap());
        assert!(matches!(r.target, LadderTarget::Irregular { .. }));
        let r = ladder_apply(LadderOp::A2, &make_qn(0, 2, -1, 0.0).unwrap());
        assert_eq!(
            r.target,
            LadderTarget::State(make_qn(1, 2, 0, 0.0).unwrap())
        );
        let r = ladder_apply(LadderOp::A2Dag, &make_qn(1, 2, 0, 0.0).unwrap());
        assert_eq!(
            r.target,
            LadderTarget::State(make_qn(0, 2, -1, 0.0).unwrap())
        );
    }

    /// a1, a2 and adjoints as differential operators, natural units:
    /// P = −i∇ + g(−y, x), g = (l0+μ)/r² + 1/2.
    fn apply_differential(op: LadderOp, qn: &QuantumNumbers, l0: i64, x: f64, y: f64) -> Complex64 {
        let u = Units::natural();
        let f = |x: f64, y: f64| eigenfunction_xy(qn, l0, &u, x, y).unwrap();
        let h = 1e-4;
        // fourth-order central differences
        let d = |g: &dyn Fn(f64) -> Complex64| {
            (g(-2.0 * h) - g(2.0 * h) + (g(h) - g(-h)) * 8.0) / (12.0 * h)
        };
        let fx = d(&|s| f(x + s, y));
        let fy = d(&|s| f(x, y + s));
        let v = f(x, y);
        let g = (l0 as f64 + qn.mu) / (x * x + y * y) + 0.5;
        let i = Complex64::i();
        let px = -i * fx - g * y * v;
        let py = -i * fy + g * x * v;
        let z = Complex64::new(x, y);
        let s2 = 2.0f64.sqrt();
        match op {
            LadderOp::A1 => (-i * px - py) / s2,
            LadderOp::A1Dag => (i * px - py) / s2,
            LadderOp::A2 => (z * v + i * px - py) / s2,
            LadderOp::A2Dag => (z.conj() * v - i * px - py) / s2,
        }
    }

    #[test]
    fn ladder_matches_differential_operators() {
        let points = [(0.7, -1.1), (-1.3, 0.4), (0.2, 1.9)];
        for mu in [0.0, 0.3] {
            for l0 in [0, 2] {
                for (j, m, l) in [
                    (1, 2, 3),
                    (1, 1, 0),
                    (0, 2, -3),
                    (0, 1, -1),
                    (1, 0, 2),
                    (0, 3, -2),
                ] {
                    let qn = make_qn(j, m, l, mu).unwrap();
                    for op in LadderOp::ALL {
                        let r = ladder_apply(op, &qn);
                        for &(x, y) in &points {
                            let lhs = apply_differential(op, &qn, l0, x, y);
                            let rhs = match r.target {
                                LadderTarget::State(t) => {
                                    r.coefficient
                                        * eigenfunction_xy(&t, l0, &Units::natural(), x, y).unwrap()
                                }
                                LadderTarget::Zero => Complex64::new(0.0, 0.0),
                                LadderTarget::Irregular { .. } => continue,
                            };
                            assert!(
                                (lhs - rhs).norm() < 1e-6,
                                "{op:?} {qn:?} {l0}: {lhs} vs {rhs}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn diagram() {
        let flux = FluxConfig::new(0, 0.25).unwrap();
        let d = level_diagram(&flux, 4, -3, 3);
        assert_eq!(d.len(), 5 * 7);
        assert!(d.windows(2).all(|w| w[0].energy <= w[1].energy));
        for e in &d {
            let frac = e.energy - e.energy.floor();
            match e.qn.j {
                Sector::J0 => assert_abs_diff_eq!(frac, 0.5, epsilon = 1e-14),
                Sector::J1 => assert_abs_diff_eq!(frac, 0.75, epsilon = 1e-14),
            }
        }
        let flat = level_diagram(&FluxConfig::new(1, 0.0).unwrap(), 3, -2, 2);
        assert!(flat
            .iter()
            .all(|e| (e.energy - e.energy.floor() - 0.5).abs() < 1e-15));
    }
}
