//! Truncated expansion of a coherent state over the (m, l) eigenbasis,
//! c_{m,l} = z1^{n1} z2^{n2} / √(Γ(1+n1) Γ(1+n2)), and the brute-force
//! observables computed from it.
//!
//! Cells are stored densely: m ∈ [0, m_max] and an l-range of `l_len`
//! columns starting at the sector boundary (l = 0 upward for j = 1,
//! l = −1 downward for j = 0).

use super::CoherentParams;
use crate::classical::{Sector, Units};
use crate::error::{Error, Result};
use crate::special::ln_gamma;
use crate::spectrum::{ladder_apply, make_qn, LadderOp, LadderTarget, QuantumNumbers};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Largest number of cells [`build_lattice`] will allocate.
pub const DEFAULT_CELL_CAP: usize = 4_000_000;

/// |z1|² + |z2|² beyond which Σ|c|² ~ e^{|z1|²+|z2|²} leaves f64 range.
const MAX_EXPONENT: f64 = 650.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientLattice {
    pub j: Sector,
    pub mu: f64,
    pub l0: i64,
    pub z1: Complex64,
    pub z2: Complex64,
    pub m_max: u32,
    l_len: usize,
    /// Upper bound on Σ|c|² over omitted cells, relative to the retained Σ|c|².
    pub tail_mass: f64,
    coeffs: Vec<Complex64>,
}

/// (n1, n2) of cell (m, l) in sector j, valid also one column past the
/// sector boundary.
pub fn cell_occupations(j: Sector, mu: f64, m: u32, l: i64) -> (f64, f64) {
    let mf = m as f64;
    match j {
        Sector::J1 => (mf + l as f64 + mu, mf),
        Sector::J0 => (mf, mf - l as f64 - mu),
    }
}

/// Cell (m, l) of sector j carrying occupations (n1, n2).
fn cell_of(j: Sector, mu: f64, n1: f64, n2: f64) -> (i64, i64) {
    let l = (n1 - n2 - mu).round() as i64;
    let m = match j {
        Sector::J1 => n2,
        Sector::J0 => n1,
    };
    (m.round() as i64, l)
}

fn ln_pow(n: f64, ln_abs: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else {
        n * ln_abs
    }
}

/// z1^{n1} z2^{n2} / √(Γ(1+n1) Γ(1+n2)) with principal powers. Occupations
/// at or below −1 (reached only through a zero ladder coefficient) give 0.
pub fn coefficient(z1: Complex64, z2: Complex64, n1: f64, n2: f64) -> Complex64 {
    if n1 <= -1.0 || n2 <= -1.0 {
        return Complex64::new(0.0, 0.0);
    }
    let lg = ln_gamma(1.0 + n1).expect("n1 > -1") + ln_gamma(1.0 + n2).expect("n2 > -1");
    let ln_mag = ln_pow(n1, z1.norm().ln()) + ln_pow(n2, z2.norm().ln()) - 0.5 * lg;
    if ln_mag == f64::NEG_INFINITY || ln_mag.is_nan() {
        return Complex64::new(0.0, 0.0);
    }
    let phase =
        if n1 == 0.0 { 0.0 } else { n1 * z1.arg() } + if n2 == 0.0 { 0.0 } else { n2 * z2.arg() };
    Complex64::from_polar(ln_mag.exp(), phase)
}

/// ln of the Poisson-type weight x^n / Γ(1+n).
fn ln_weight(n: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    n * x.ln() - ln_gamma(1.0 + n).expect("n > -1")
}

/// ln Σ_{k>N} x^{k+ν}/Γ(1+k+ν), bounded geometrically; +∞ while the
/// term ratio is still ≥ 1.
fn ln_tail(n: usize, x: f64, nu: f64) -> f64 {
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    let first = (n + 1) as f64 + nu;
    let ratio = x / (first + 1.0);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    ln_weight(first, x) - (1.0 - ratio).ln()
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Minor/major mode split of a sector: the major occupation is k + ν0
/// with k = m + |l − boundary| and weight x_major; the minor one is m.
struct Modes {
    x_major: f64,
    nu0: f64,
    x_minor: f64,
}

fn modes(p: &CoherentParams) -> Modes {
    let a = p.z1.norm_sqr();
    let b = p.z2.norm_sqr();
    match p.j {
        Sector::J1 => Modes {
            x_major: a,
            nu0: p.mu,
            x_minor: b,
        },
        Sector::J0 => Modes {
            x_major: b,
            nu0: 1.0 - p.mu,
            x_minor: a,
        },
    }
}

/// ln of the bound on the omitted mass outside m ≤ m_max, column index ≤ l_max.
fn ln_omitted(md: &Modes, m_max: usize, l_max: usize) -> f64 {
    // m > m_max: any k, major sum ≤ e^{x_major}
    let a = ln_tail(m_max, md.x_minor, 0.0) + md.x_major;
    // m ≤ m_max but k − m > l_max ⇒ k > l_max
    let b = ln_tail(l_max, md.x_major, md.nu0) + md.x_minor;
    log_add(a, b)
}

impl CoefficientLattice {
    pub fn l_bounds(&self) -> (i64, i64) {
        let n = self.l_len as i64;
        match self.j {
            Sector::J1 => (0, n - 1),
            Sector::J0 => (-n, -1),
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn column(&self, l: i64) -> Option<usize> {
        let c = match self.j {
            Sector::J1 => l,
            Sector::J0 => -l - 1,
        };
        (c >= 0 && (c as usize) < self.l_len).then_some(c as usize)
    }

    fn column_l(&self, c: usize) -> i64 {
        match self.j {
            Sector::J1 => c as i64,
            Sector::J0 => -(c as i64) - 1,
        }
    }

    pub fn get(&self, m: u32, l: i64) -> Option<Complex64> {
        if m > self.m_max {
            return None;
        }
        let c = self.column(l)?;
        Some(self.coeffs[c * (self.m_max as usize + 1) + m as usize])
    }

    /// All cells as (m, l, c), column by column.
    pub fn cells(&self) -> impl Iterator<Item = (u32, i64, Complex64)> + '_ {
        let rows = self.m_max as usize + 1;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| ((i % rows) as u32, self.column_l(i / rows), c))
    }

    pub fn quantum_numbers(&self, m: u32, l: i64) -> Result<QuantumNumbers> {
        make_qn(self.j.index() as i64, m as i64, l, self.mu)
    }

    pub fn occupations(&self, m: u32, l: i64) -> (f64, f64) {
        cell_occupations(self.j, self.mu, m, l)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Σ c*_{m,l} c′_{m,l} over cells present in both lattices.
    pub fn inner(&self, other: &CoefficientLattice) -> Complex64 {
        if self.j != other.j {
            return Complex64::new(0.0, 0.0);
        }
        self.cells()
            .filter_map(|(m, l, c)| other.get(m, l).map(|d| c.conj() * d))
            .sum()
    }

    /// Map (m, l) → c, including only nonzero cells.
    pub fn to_map(&self) -> BTreeMap<(i64, i64), Complex64> {
        self.cells()
            .filter(|(_, _, c)| c.norm_sqr() > 0.0)
            .map(|(m, l, c)| ((m as i64, l), c))
            .collect()
    }

    /// The lattice of a single eigenstate: one cell with coefficient 1.
    pub fn single_cell(qn: &QuantumNumbers, l0: i64) -> Self {
        let col = match qn.j {
            Sector::J1 => qn.l as usize,
            Sector::J0 => (-qn.l - 1) as usize,
        };
        let rows = qn.m as usize + 1;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); rows * (col + 1)];
        coeffs[col * rows + qn.m as usize] = Complex64::new(1.0, 0.0);
        CoefficientLattice {
            j: qn.j,
            mu: qn.mu,
            l0,
            z1: Complex64::new(0.0, 0.0),
            z2: Complex64::new(0.0, 0.0),
            m_max: qn.m,
            l_len: col + 1,
            tail_mass: 0.0,
            coeffs,
        }
    }

    /// Text form: `# key=value` header lines followed by `m,l,re,im` rows.
    pub fn to_text(&self) -> String {
        let (lo, hi) = self.l_bounds();
        let mut s = String::new();
        let _ = writeln!(s, "# j={}", self.j.index());
        let _ = writeln!(s, "# mu={:e}", self.mu);
        let _ = writeln!(s, "# l0={}", self.l0);
        let _ = writeln!(s, "# z1={:e},{:e}", self.z1.re, self.z1.im);
        let _ = writeln!(s, "# z2={:e},{:e}", self.z2.re, self.z2.im);
        let _ = writeln!(s, "# m_max={}", self.m_max);
        let _ = writeln!(s, "# l_bounds={lo},{hi}");
        let _ = writeln!(s, "# tail_mass={:e}", self.tail_mass);
        s.push_str("m,l,re,im\n");
        for (m, l, c) in self.cells() {
            let _ = writeln!(s, "{m},{l},{:e},{:e}", c.re, c.im);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::Config(format!("lattice text: {what}"));
        let mut header = BTreeMap::new();
        let mut rows = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(h) = line.strip_prefix('#') {
                let (k, v) = h
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| bad("malformed header"))?;
                header.insert(k.trim().to_string(), v.trim().to_string());
            } else if line.starts_with("m,") {
                continue;
            } else {
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 4 {
                    return Err(bad("row needs 4 fields"));
                }
                let m: u32 = f[0].parse().map_err(|_| bad("m"))?;
                let l: i64 = f[1].parse().map_err(|_| bad("l"))?;
                let re: f64 = f[2].parse().map_err(|_| bad("re"))?;
                let im: f64 = f[3].parse().map_err(|_| bad("im"))?;
                rows.push((m, l, Complex64::new(re, im)));
            }
        }
        let get = |k: &str| header.get(k).ok_or_else(|| bad(&format!("missing {k}")));
        let pair = |k: &str| -> Result<(String, String)> {
            let (a, b) = get(k)?.split_once(',').ok_or_else(|| bad(k))?;
            Ok((a.to_string(), b.to_string()))
        };
        let cplx = |k: &str| -> Result<Complex64> {
            let (a, b) = pair(k)?;
            Ok(Complex64::new(
                a.parse().map_err(|_| bad(k))?,
                b.parse().map_err(|_| bad(k))?,
            ))
        };
        let j =
            Sector::from_index(get("j")?.parse().map_err(|_| bad("j"))?).map_err(|_| bad("j"))?;
        let (lo, hi) = pair("l_bounds")?;
        let (lo, hi): (i64, i64) = (
            lo.parse().map_err(|_| bad("l_bounds"))?,
            hi.parse().map_err(|_| bad("l_bounds"))?,
        );
        let l_len = (hi - lo + 1).max(0) as usize;
        let m_max: u32 = get("m_max")?.parse().map_err(|_| bad("m_max"))?;
        let mut lat = CoefficientLattice {
            j,
            mu: get("mu")?.parse().map_err(|_| bad("mu"))?,
            l0: get("l0")?.parse().map_err(|_| bad("l0"))?,
            z1: cplx("z1")?,
            z2: cplx("z2")?,
            m_max,
            l_len,
            tail_mass: get("tail_mass")?.parse().map_err(|_| bad("tail_mass"))?,
            coeffs: vec![Complex64::new(0.0, 0.0); l_len * (m_max as usize + 1)],
        };
        if lat.l_bounds() != (lo, hi) {
            return Err(bad("l_bounds do not match the sector"));
        }
        let stride = m_max as usize + 1;
        for (m, l, c) in rows {
            let col = lat
                .column(l)
                .filter(|_| m <= m_max)
                .ok_or_else(|| bad("cell out of bounds"))?;
            lat.coeffs[col * stride + m as usize] = c;
        }
        Ok(lat)
    }
}

/// Smallest (m_max, column count) whose omitted-mass bound is below
/// `tol` times `ln_norm`.
pub fn lattice_bounds(p: &CoherentParams, tol: f64, ln_norm: f64) -> (usize, usize) {
    let md = modes(p);
    let target = tol.ln() - std::f64::consts::LN_2 + ln_norm;
    let mut m_max = 0usize;
    while ln_tail(m_max, md.x_minor, 0.0) + md.x_major > target {
        m_max += 1;
    }
    let mut l_max = 0usize;
    while ln_tail(l_max, md.x_major, md.nu0) + md.x_minor > target {
        l_max += 1;
    }
    (m_max, l_max + 1)
}

/// Lattice with relative omitted mass ≤ `tol`, capped at [`DEFAULT_CELL_CAP`] cells.
pub fn build_lattice(p: &CoherentParams, tol: f64) -> Result<CoefficientLattice> {
    build_lattice_capped(p, tol, DEFAULT_CELL_CAP)
}

pub fn build_lattice_capped(
    p: &CoherentParams,
    tol: f64,
    cap: usize,
) -> Result<CoefficientLattice> {
    p.validate()?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(crate::error::domain(
            "build_lattice",
            format!("tol = {tol} must lie in (0, 1)"),
        ));
    }
    let md = modes(p);
    if md.x_major + md.x_minor > MAX_EXPONENT {
        return Err(Error::Overflow {
            func: "build_lattice",
            ln_value: md.x_major + md.x_minor,
        });
    }
    p.check_nondegenerate()?;
    let (m_max, l_len) = lattice_bounds(p, tol, super::ln_peak_weight(p));
    let cells = (m_max + 1).saturating_mul(l_len);
    if cells > cap {
        return Err(Error::Budget { needed: cells, cap });
    }
    let rows = m_max + 1;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); cells];
    coeffs
        .par_chunks_mut(rows)
        .enumerate()
        .for_each(|(col, chunk)| {
            let l = match p.j {
                Sector::J1 => col as i64,
                Sector::J0 => -(col as i64) - 1,
            };
            for (m, c) in chunk.iter_mut().enumerate() {
                let (n1, n2) = cell_occupations(p.j, p.mu, m as u32, l);
                *c = coefficient(p.z1, p.z2, n1, n2);
            }
        });
    let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let tail_mass = (ln_omitted(&md, m_max, l_len - 1) - norm.ln()).exp();
    if !(tail_mass <= tol) {
        return Err(Error::TailMass {
            tail: tail_mass,
            allowed: tol,
        });
    }
    Ok(CoefficientLattice {
        j: p.j,
        mu: p.mu,
        l0: p.l0,
        z1: p.z1,
        z2: p.z2,
        m_max: m_max as u32,
        l_len,
        tail_mass,
        coeffs,
    })
}

/// Coefficients of op·Φ, keyed by the lattice sector's (m, l). Images that
/// leave the sector (the irregular column, or at μ = 0 the neighbouring
/// sector) keep the cell given by their (n1, n2).
pub fn ladder_image(lat: &CoefficientLattice, op: LadderOp) -> BTreeMap<(i64, i64), Complex64> {
    let mut out = BTreeMap::new();
    for (m, l, c) in lat.cells() {
        let qn = lat.quantum_numbers(m, l).expect("lattice cell in sector");
        let r = ladder_apply(op, &qn);
        let (n1, n2) = match r.target {
            LadderTarget::Zero => continue,
            LadderTarget::Irregular { n1, n2 } => (n1, n2),
            LadderTarget::State(t) => (t.n1, t.n2),
        };
        *out.entry(cell_of(lat.j, lat.mu, n1, n2))
            .or_insert(Complex64::new(0.0, 0.0)) += c * r.coefficient;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    N1,
    N2,
    R2,
    Rc2,
    XPlusIY,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    /// Real for the Hermitian observables; x + iy in length units for `XPlusIY`.
    pub mean: Complex64,
    /// For `XPlusIY`: ⟨(x − x̄)² + (y − ȳ)²⟩.
    pub variance: f64,
}

/// ⟨ρ⟩ from the tridiagonal action of ρ on each fixed-l column:
/// ρ I_m = (2m+ν+1) I_m − √(m(m+ν)) I_{m−1} − √((m+1)(m+ν+1)) I_{m+1}.
pub fn mean_rho(lat: &CoefficientLattice) -> f64 {
    let rows = lat.m_max as usize + 1;
    let (lo, hi) = lat.l_bounds();
    let num: f64 = (lo..=hi)
        .into_par_iter()
        .map(|l| {
            let nu = lat.quantum_numbers(0, l).expect("in sector").order();
            let col: Vec<Complex64> = (0..rows as u32).map(|m| lat.get(m, l).unwrap()).collect();
            let mut s = 0.0;
            for m in 0..rows {
                let mf = m as f64;
                s += (2.0 * mf + nu + 1.0) * col[m].norm_sqr();
                if m + 1 < rows {
                    let off = ((mf + 1.0) * (mf + nu + 1.0)).sqrt();
                    s -= 2.0 * off * (col[m].conj() * col[m + 1]).re;
                }
            }
            s
        })
        .sum();
    num / lat.norm_sqr()
}

fn diagonal_moments(lat: &CoefficientLattice, f: impl Fn(f64, f64) -> f64) -> (f64, f64) {
    let norm = lat.norm_sqr();
    let (mut s1, mut s2) = (0.0, 0.0);
    for (m, l, c) in lat.cells() {
        let (n1, n2) = lat.occupations(m, l);
        let v = f(n1, n2);
        let w = c.norm_sqr();
        s1 += v * w;
        s2 += v * v * w;
    }
    let mean = s1 / norm;
    (mean, (s2 / norm - mean * mean).max(0.0))
}

/// ⟨c| op c⟩ / ⟨c|c⟩ with out-of-lattice images dropped.
pub fn ladder_mean(lat: &CoefficientLattice, op: LadderOp) -> Complex64 {
    let img = ladder_image(lat, op);
    let s: Complex64 = img
        .iter()
        .filter_map(|(&(m, l), &v)| {
            if m < 0 {
                return None;
            }
            lat.get(m as u32, l).map(|c| c.conj() * v)
        })
        .sum();
    s / lat.norm_sqr()
}

pub fn observable_moments(
    lat: &CoefficientLattice,
    obs: Observable,
    units: &Units,
) -> Result<Moments> {
    if !(lat.tail_mass <= 1e-8) {
        return Err(Error::TailMass {
            tail: lat.tail_mass,
            allowed: 1e-8,
        });
    }
    if lat.norm_sqr() == 0.0 {
        return Err(Error::Degenerate("lattice has zero norm".into()));
    }
    // ħ/(Mω)
    let half_lsq = 0.5 * units.magnetic_length_sq();
    let real = |(m, v): (f64, f64)| Moments {
        mean: Complex64::new(m, 0.0),
        variance: v,
    };
    Ok(match obs {
        Observable::N1 => real(diagonal_moments(lat, |n1, _| n1)),
        Observable::N2 => real(diagonal_moments(lat, |_, n2| n2)),
        Observable::R2 => real(diagonal_moments(lat, |n1, _| half_lsq * (2.0 * n1 + 1.0))),
        Observable::Rc2 => real(diagonal_moments(lat, |_, n2| half_lsq * (2.0 * n2 + 1.0))),
        Observable::XPlusIY => {
            let scale = units.magnetic_length_sq().sqrt();
            let mean = scale * (ladder_mean(lat, LadderOp::A2) - ladder_mean(lat, LadderOp::A1Dag));
            let r2 = units.magnetic_length_sq() * mean_rho(lat);
            Moments {
                mean,
                variance: (r2 - mean.norm_sqr()).max(0.0),
            }
        }
    })
}
