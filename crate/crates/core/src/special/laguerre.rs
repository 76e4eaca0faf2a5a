//! Generalized Laguerre polynomials and the normalized Laguerre functions
//! `I_{m+α,m}(ρ) = √(m!/Γ(m+α+1)) e^{−ρ/2} ρ^{α/2} L_m^α(ρ)`.
//!
//! The functions are generated by the normalized three-term recurrence
//! with a running log scale, so neither the Gamma ratio nor e^{−ρ/2}
//! is ever formed on its own.

use super::gamma::ln_gamma;
use crate::error::{domain, Error, Result};

const RESCALE: f64 = 1e150;

fn check(func: &'static str, alpha: f64, rho: f64) -> Result<()> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(domain(
            func,
            format!("alpha = {alpha} must be finite and > -1"),
        ));
    }
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(domain(func, format!("rho = {rho} must be finite and >= 0")));
    }
    Ok(())
}

/// L_m^α(ρ) by the forward recurrence
/// `(k+1) L_{k+1} = (2k+1+α−ρ) L_k − (k+α) L_{k−1}`.
pub fn laguerre_poly(m: usize, alpha: f64, rho: f64) -> Result<f64> {
    check("laguerre_poly", alpha, rho)?;
    let mut prev = 1.0;
    if m == 0 {
        return Ok(prev);
    }
    let mut cur = 1.0 + alpha - rho;
    for k in 1..m {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - rho) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Successive values I_{α,0}(ρ), I_{α+1,1}(ρ), I_{α+2,2}(ρ), … at fixed α, ρ.
#[derive(Debug, Clone)]
pub struct LaguerreFnIter {
    alpha: f64,
    rho: f64,
    k: usize,
    prev: f64,
    cur: f64,
    ln_scale: f64,
}

impl LaguerreFnIter {
    pub fn new(alpha: f64, rho: f64) -> Result<Self> {
        check("laguerre_fn", alpha, rho)?;
        let ln_scale = if rho == 0.0 {
            if alpha < 0.0 {
                return Err(domain("laguerre_fn", "singular at rho = 0 for alpha < 0"));
            }
            if alpha > 0.0 {
                f64::NEG_INFINITY
            } else {
                0.0
            }
        } else {
            -0.5 * rho + 0.5 * alpha * rho.ln() - 0.5 * ln_gamma(alpha + 1.0)?
        };
        Ok(LaguerreFnIter {
            alpha,
            rho,
            k: 0,
            prev: 0.0,
            cur: 1.0,
            ln_scale,
        })
    }

    /// Index m that [`Self::value`] refers to.
    pub fn index(&self) -> usize {
        self.k
    }

    /// I_{m+α,m}(ρ) at the current index.
    pub fn value(&self) -> f64 {
        if self.ln_scale == f64::NEG_INFINITY {
            return 0.0;
        }
        self.cur * self.ln_scale.exp()
    }

    /// Value split as `(mantissa, ln_scale)` for callers working in log space.
    pub fn scaled(&self) -> (f64, f64) {
        (self.cur, self.ln_scale)
    }

    /// Moves to index m+1.
    pub fn advance(&mut self) {
        let a = self.alpha;
        let k = self.k as f64;
        let next = if self.k == 0 {
            (1.0 + a - self.rho) / (a + 1.0).sqrt() * self.cur
        } else {
            ((2.0 * k + 1.0 + a - self.rho) * self.cur - (k * (k + a)).sqrt() * self.prev)
                / ((k + 1.0) * (k + a + 1.0)).sqrt()
        };
        self.prev = self.cur;
        self.cur = next;
        self.k += 1;
        let big = self.cur.abs().max(self.prev.abs());
        if big > RESCALE || (big < 1.0 / RESCALE && big > 0.0) {
            self.prev /= big;
            self.cur /= big;
            self.ln_scale += big.ln();
        }
    }
}

impl Iterator for LaguerreFnIter {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let v = self.value();
        self.advance();
        Some(v)
    }
}

/// Normalized Laguerre function I_{m+α,m}(ρ).
pub fn laguerre_fn(alpha: f64, m: usize, rho: f64) -> Result<f64> {
    let mut it = LaguerreFnIter::new(alpha, rho)?;
    for _ in 0..m {
        it.advance();
    }
    let v = it.value();
    if v.is_infinite() {
        let (mant, ls) = it.scaled();
        return Err(Error::Overflow {
            func: "laguerre_fn",
            ln_value: ls + mant.abs().ln(),
        });
    }
    Ok(v)
}

/// dI_{m+α,m}/dρ for ρ > 0, from `d/dρ L_m^α = −L_{m−1}^{α+1}`:
/// `(α/(2ρ) − 1/2) I_{m+α,m} − √(m/ρ) I_{m+α,m−1}`.
pub fn laguerre_fn_derivative(alpha: f64, m: usize, rho: f64) -> Result<f64> {
    check("laguerre_fn_derivative", alpha, rho)?;
    if rho == 0.0 {
        return Err(domain("laguerre_fn_derivative", "rho must be > 0"));
    }
    let f = laguerre_fn(alpha, m, rho)?;
    let shifted = if m == 0 {
        0.0
    } else {
        laguerre_fn(alpha + 1.0, m - 1, rho)?
    };
    Ok((0.5 * alpha / rho - 0.5) * f - (m as f64 / rho).sqrt() * shifted)
}
