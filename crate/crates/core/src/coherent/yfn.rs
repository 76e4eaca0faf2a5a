//! Y_α(z1, z2; ρ) = Σ_m z1^m z2^{m+α} I_{m+α,m}(ρ) / √(Γ(1+m) Γ(1+m+α)),
//! the fixed-l building block of the coherent states, and its closed form
//! e^{z1 z2 − ρ/2} (√(z2/z1))^α J_α(2√(z1 z2 ρ)).

use crate::error::{domain, Error, Result};
use crate::special::{bessel_j_entire_complex, ln_gamma, LaguerreFnIter, SeriesSum, TailRule};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YMode {
    Series,
    Closed,
}

fn check(alpha: f64, rho: f64) -> Result<()> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(domain(
            "y_fn",
            format!("alpha = {alpha} must be finite and > -1"),
        ));
    }
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(domain(
            "y_fn",
            format!("rho = {rho} must be finite and >= 0"),
        ));
    }
    Ok(())
}

/// k·ln|z| with the convention 0·ln 0 = 0.
fn pow_ln(k: f64, ln_abs: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * ln_abs
    }
}

pub fn y_fn(alpha: f64, z1: Complex64, z2: Complex64, rho: f64, mode: YMode) -> Result<Complex64> {
    check(alpha, rho)?;
    match mode {
        YMode::Series => y_series(alpha, z1, z2, rho),
        YMode::Closed => y_closed(alpha, z1, z2, rho),
    }
}

fn y_series(alpha: f64, z1: Complex64, z2: Complex64, rho: f64) -> Result<Complex64> {
    if z2.norm() == 0.0 && alpha < 0.0 {
        return Err(domain(
            "y_fn",
            "z2^alpha is infinite at z2 = 0 for alpha < 0",
        ));
    }
    let (l1, a1) = (z1.norm().ln(), z1.arg());
    let (l2, a2) = (z2.norm().ln(), z2.arg());
    let mut lag = LaguerreFnIter::new(alpha, rho)?;
    let mut acc = SeriesSum::new(TailRule {
        tol: 1e-16,
        consecutive: 3,
        max_terms: 100_000,
    });
    let lg_alpha = ln_gamma(1.0 + alpha)?;
    let mut lg_m = 0.0;
    let mut lg_ma = lg_alpha;
    let mut m = 0usize;
    loop {
        let mf = m as f64;
        if m > 0 {
            lg_m += mf.ln();
            lg_ma += (mf + alpha).ln();
        }
        let (mant, ln_scale) = lag.scaled();
        let ln_mag = pow_ln(mf, l1) + pow_ln(mf + alpha, l2) - 0.5 * (lg_m + lg_ma) + ln_scale;
        let term = if mant == 0.0 || ln_mag == f64::NEG_INFINITY {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(mant * ln_mag.exp(), mf * a1 + (mf + alpha) * a2)
        };
        if acc.push(term) {
            return Ok(acc.value());
        }
        // nothing but the m = 0 term survives when z1 = 0
        if z1.norm() == 0.0 || z2.norm() == 0.0 {
            return Ok(acc.value());
        }
        if acc.exhausted() {
            return Err(acc.non_convergence("y_fn"));
        }
        lag.advance();
        m += 1;
    }
}

fn y_closed(alpha: f64, z1: Complex64, z2: Complex64, rho: f64) -> Result<Complex64> {
    if alpha == 0.0 {
        let w = z1 * z2;
        return Ok((w - 0.5 * rho).exp() * bessel_j_entire_complex(0.0, w * rho)?);
    }
    if z1.norm() == 0.0 {
        return Err(Error::Branch {
            func: "y_fn",
            detail: "(z2/z1)^(alpha/2) is undefined at z1 = 0".into(),
        });
    }
    if z2.norm() == 0.0 {
        if alpha < 0.0 {
            return Err(domain("y_fn", "singular at z2 = 0 for alpha < 0"));
        }
        return Ok(Complex64::new(0.0, 0.0));
    }
    // principal branches of √(z2/z1) and √(z1 z2); their product is ±z2
    let ln_s = 0.5 * (z2 / z1).ln();
    let ln_t = 0.5 * (z1 * z2).ln();
    let st = (ln_s + ln_t).exp();
    if (st + z2).norm() < (st - z2).norm() {
        return Err(Error::Branch {
            func: "y_fn",
            detail: format!("principal roots give √(z2/z1)·√(z1z2) = −z2 for z1 = {z1}, z2 = {z2}"),
        });
    }
    y_from_log_power(alpha, z1 * z2, alpha * (ln_s + ln_t), rho)
}

/// b^α e^{w−ρ/2} ρ^{α/2} Λ_α(wρ) with w = ab and `ln_b_alpha` = α ln b on a
/// caller-chosen branch. This is Y_α(a, b; ρ) without any root ambiguity.
pub(crate) fn y_from_log_power(
    alpha: f64,
    w: Complex64,
    ln_b_alpha: Complex64,
    rho: f64,
) -> Result<Complex64> {
    if rho == 0.0 {
        return Ok(if alpha == 0.0 {
            (w).exp()
        } else {
            Complex64::new(0.0, 0.0)
        });
    }
    let ln_pref = ln_b_alpha + w - 0.5 * rho + 0.5 * alpha * rho.ln();
    Ok(ln_pref.exp() * bessel_j_entire_complex(alpha, w * rho)?)
}
