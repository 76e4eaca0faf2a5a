//! The Q family that governs norms and means of the coherent states:
//!
//! * Q⁻_α(u,v) = Σ_{l≥1} (v/u)^{α+l} I_{α+l}(2uv)
//! * Q_α(u,v) = Q⁻_α(u,v) + (v/u)^α I_α(2uv)
//! * T(u,v) = 2e^{−u²} ∫_v^∞ e^{−t²} (t/u)^α I_α(2ut) t dt
//!
//! with Q⁻ = e^{u²+v²}(1 − T). Everything is evaluated in log space; the
//! quadrature computes whichever of T and 1 − T is the smaller one, so both
//! keep full relative accuracy.

use crate::error::{domain, Error, Result};
use crate::special::quadrature::{integrate, integrate_radial, QuadOptions};
use crate::special::{ln_bessel_i, ln_gamma, ln_sum_series, TailRule};
use num_complex::Complex64;

const RULE: TailRule = TailRule {
    tol: 1e-17,
    consecutive: 2,
    max_terms: 200_000,
};

fn check(func: &'static str, alpha: f64, u: f64, v: f64) -> Result<()> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(domain(
            func,
            format!("alpha = {alpha} must be finite and > -1"),
        ));
    }
    if !(u > 0.0 && v > 0.0) || !u.is_finite() || !v.is_finite() {
        return Err(domain(
            func,
            format!("u = {u}, v = {v} must be finite and > 0"),
        ));
    }
    Ok(())
}

fn ln_boundary(alpha: f64, u: f64, v: f64) -> Result<f64> {
    Ok(alpha * (v / u).ln() + ln_bessel_i(alpha, 2.0 * u * v)?)
}

/// Σ_{l ≥ first} (v/u)^{α+l} I_{α+l}(2uv) in log form.
fn ln_tail_sum(func: &'static str, alpha: f64, u: f64, v: f64, first: usize) -> Result<f64> {
    let lr = (v / u).ln();
    let x = 2.0 * u * v;
    ln_sum_series(func, RULE, |k| {
        let nu = alpha + (first + k) as f64;
        Ok(nu * lr + ln_bessel_i(nu, x)?)
    })
}

fn finite_exp(func: &'static str, ln: f64) -> Result<f64> {
    if ln > f64::MAX.ln() {
        return Err(Error::Overflow { func, ln_value: ln });
    }
    Ok(ln.exp())
}

pub fn ln_q_minus(alpha: f64, u: f64, v: f64) -> Result<f64> {
    check("q_minus", alpha, u, v)?;
    ln_tail_sum("q_minus", alpha, u, v, 1)
}

pub fn q_minus(alpha: f64, u: f64, v: f64) -> Result<f64> {
    finite_exp("q_minus", ln_q_minus(alpha, u, v)?)
}

pub fn ln_q_fn(alpha: f64, u: f64, v: f64) -> Result<f64> {
    check("q_fn", alpha, u, v)?;
    ln_tail_sum("q_fn", alpha, u, v, 0)
}

pub fn q_fn(alpha: f64, u: f64, v: f64) -> Result<f64> {
    finite_exp("q_fn", ln_q_fn(alpha, u, v)?)
}

/// Q_α through its double series in A = u², B = v²:
/// Q_α = Σ_n B^{α+n} e_n(A) / Γ(α+n+1), e_n(A) = Σ_{k≤n} A^k/k!.
/// Accepts u = 0 or v = 0, where the Bessel form is singular.
pub fn ln_q_double(alpha: f64, u: f64, v: f64) -> Result<f64> {
    if !(alpha > -1.0) || !(u >= 0.0 && v >= 0.0) {
        return Err(domain("q_fn", format!("alpha = {alpha}, u = {u}, v = {v}")));
    }
    if v == 0.0 {
        return Ok(if alpha == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    }
    let la = 2.0 * u.ln();
    let lb = 2.0 * v.ln();
    // running ln e_n(A) via log-sum-exp of the partial exponential sum
    let mut ln_e = 0.0f64;
    let mut ln_ak = 0.0f64;
    ln_sum_series("q_fn", RULE, |n| {
        if n > 0 && u > 0.0 {
            ln_ak += la - (n as f64).ln();
            let (hi, lo) = if ln_e > ln_ak {
                (ln_e, ln_ak)
            } else {
                (ln_ak, ln_e)
            };
            ln_e = hi + (lo - hi).exp().ln_1p();
        }
        let nu = alpha + n as f64;
        Ok(nu * lb + ln_e - ln_gamma(nu + 1.0)?)
    })
}

/// Split of the unit integral ∫₀^∞ into T (upper part from v) and 1 − T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TSplit {
    pub t: f64,
    pub one_minus_t: f64,
    pub abs_error: f64,
}

fn t_integrand(alpha: f64, u: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let lb = match ln_bessel_i(alpha, 2.0 * u * s) {
        Ok(v) => v,
        Err(_) => return f64::NAN,
    };
    (std::f64::consts::LN_2 - u * u - s * s + alpha * (s / u).ln() + lb + s.ln()).exp()
}

/// T(u,v) and 1 − T(u,v) by adaptive quadrature.
pub fn t_split(alpha: f64, u: f64, v: f64) -> Result<TSplit> {
    check("t_fn", alpha, u, v)?;
    let opts = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-13,
        max_panels: 20_000,
        initial_panels: 8,
    };
    let f = |s: f64| t_integrand(alpha, u, s);
    if v >= u {
        // the e^{−(t−u)²} envelope has dropped by e^{−45} past `hi`
        let hi = u + ((v - u).powi(2) + 45.0).sqrt() + 1.0;
        let r = integrate(f, v, hi, &opts)?;
        if !r.value.is_finite() {
            return Err(domain("t_fn", "non-finite integrand"));
        }
        Ok(TSplit {
            t: r.value,
            one_minus_t: 1.0 - r.value,
            abs_error: r.abs_error,
        })
    } else {
        let r = integrate_radial(f, v, &opts)?;
        if !r.value.is_finite() {
            return Err(domain("t_fn", "non-finite integrand"));
        }
        Ok(TSplit {
            t: 1.0 - r.value,
            one_minus_t: r.value,
            abs_error: r.abs_error,
        })
    }
}

pub fn t_fn(alpha: f64, u: f64, v: f64) -> Result<f64> {
    Ok(t_split(alpha, u, v)?.t)
}

pub fn one_minus_t(alpha: f64, u: f64, v: f64) -> Result<f64> {
    Ok(t_split(alpha, u, v)?.one_minus_t)
}

/// Q̃_α = e^{−u²−v²} Q_α = 1 − T + e^{−u²−v²} (v/u)^α I_α(2uv).
pub fn q_tilde(alpha: f64, u: f64, v: f64) -> Result<f64> {
    let s = t_split(alpha, u, v)?;
    Ok(s.one_minus_t + (ln_boundary(alpha, u, v)? - u * u - v * v).exp())
}

/// ln Q̃_α from the Bessel series, used where derivatives are needed.
pub fn ln_q_tilde_series(alpha: f64, u: f64, v: f64) -> Result<f64> {
    Ok(ln_q_fn(alpha, u, v)? - u * u - v * v)
}

/// Δ_α = Q⁻_α / Q_α ∈ (0, 1).
pub fn delta_fn(alpha: f64, u: f64, v: f64) -> Result<f64> {
    Ok((ln_q_minus(alpha, u, v)? - ln_q_fn(alpha, u, v)?).exp())
}

/// 1 − Δ_α = (v/u)^α I_α(2uv) / Q_α, kept separately since Δ rounds to 1
/// once the boundary term is below machine precision of Q.
pub fn delta_complement(alpha: f64, u: f64, v: f64) -> Result<f64> {
    Ok((ln_boundary(alpha, u, v)? - ln_q_fn(alpha, u, v)?).exp())
}

/// Δ_α allowing u = 0 or v = 0, via the double series.
pub(crate) fn delta_any(alpha: f64, u: f64, v: f64) -> Result<f64> {
    if u > 0.0 && v > 0.0 {
        return delta_fn(alpha, u, v);
    }
    let lq = ln_q_double(alpha, u, v)?;
    if lq == f64::NEG_INFINITY {
        return Err(Error::Degenerate(
            "Q vanishes: the state has zero norm".into(),
        ));
    }
    // boundary term (v/u)^α I_α(2uv) → B^α/Γ(α+1) as u → 0, and 0 or 1 as v → 0
    let boundary = if v == 0.0 {
        if alpha == 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        2.0 * alpha * v.ln() - ln_gamma(alpha + 1.0)?
    };
    Ok((1.0 - (boundary - lq).exp()).max(0.0))
}

/// Q_α(u, v) for complex u², v² given as A = u², B = v²:
/// Q_α = Σ_{l≥0} B^{α+l} Λ_{α+l}(−AB), with the principal power B^α.
pub fn q_complex(alpha: f64, a_sq: Complex64, b_sq: Complex64) -> Result<Complex64> {
    use crate::special::{bessel_j_entire_complex, SeriesSum};
    if !(alpha > -1.0) {
        return Err(domain("q_fn", format!("alpha = {alpha} must be > -1")));
    }
    if b_sq.norm() == 0.0 {
        return Ok(Complex64::new(if alpha == 0.0 { 1.0 } else { 0.0 }, 0.0));
    }
    let s = -a_sq * b_sq;
    let ln_b = b_sq.ln();
    let mut acc = SeriesSum::new(TailRule {
        tol: 1e-16,
        consecutive: 2,
        max_terms: 100_000,
    });
    let mut l = 0usize;
    loop {
        let nu = alpha + l as f64;
        let term = (ln_b * nu).exp() * bessel_j_entire_complex(nu, s)?;
        if acc.push(term) {
            return Ok(acc.value());
        }
        if acc.exhausted() {
            return Err(acc.non_convergence("q_fn"));
        }
        l += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // (α, u, v, Q⁻, T, Q, q̃, Δ) from 50-digit evaluations
    #[allow(clippy::type_complexity)]
    const REF: [(f64, f64, f64, f64, f64, f64, f64, f64); 7] = [
        (
            0.5,
            1.0,
            2.0,
            121.342_196_702_521_94,
            0.182_402_709_865_803_85,
            136.738_883_721_022_2,
            0.921_339_351_226_358_1,
            0.887_400_813_875_935,
        ),
        (
            0.5,
            2.0,
            1.0,
            3.972_653_351_858_570_6,
            0.973_232_472_269_437_7,
            11.670_996_861_108_7,
            0.078_638_558_276_643_27,
            0.340_386_806_640_027_1,
        ),
        (
            0.3,
            1.5,
            2.5,
            4_268.319_230_200_696,
            0.131_532_047_814_296_1,
            4_578.874_351_339_742,
            0.931_656_096_171_768_6,
            0.932_176_535_691_969_8,
        ),
        (
            0.3,
            3.0,
            5.0,
            581_334_521_958_500.9,
            0.003_645_861_268_879_864_5,
            582_244_260_591_781.4,
            0.997_913_347_445_199_1,
            0.998_437_530_955_898_4,
        ),
        (
            0.5,
            5.0,
            3.0,
            761_719_937_187.337_5,
            0.998_694_481_777_180_9,
            1_364_639_701_561.734_4,
            0.002_338_867_490_523_633,
            0.558_183_919_400_558_6,
        ),
        (
            0.5,
            3.0,
            5.0,
            581_092_236_551_935.8,
            0.004_061_116_270_031_304,
            582_097_102_825_893.1,
            0.997_661_132_509_476_4,
            0.998_273_713_665_505_2,
        ),
        (
            1.9,
            4.0,
            0.5,
            0.009_140_153_899_219_455,
            0.999_999_999_198_934_2,
            0.139_414_909_973_931_35,
            1.221_866_876_502_922_6e-8,
            0.065_560_806_236_065_7,
        ),
    ];

    #[test]
    fn reference_values() {
        for (a, u, v, qm, t, q, qt, d) in REF {
            assert_relative_eq!(q_minus(a, u, v).unwrap(), qm, max_relative = 1e-12);
            assert_relative_eq!(q_fn(a, u, v).unwrap(), q, max_relative = 1e-12);
            assert_relative_eq!(t_fn(a, u, v).unwrap(), t, max_relative = 1e-10);
            assert_relative_eq!(one_minus_t(a, u, v).unwrap(), 1.0 - t, max_relative = 1e-9);
            assert_relative_eq!(q_tilde(a, u, v).unwrap(), qt, max_relative = 1e-9);
            assert_relative_eq!(delta_fn(a, u, v).unwrap(), d, max_relative = 1e-12);
        }
    }

    #[test]
    fn boundary_term_is_the_difference() {
        let (a, u, v) = (0.7, 1.3, 0.9);
        let b = (ln_boundary(a, u, v).unwrap()).exp();
        assert_relative_eq!(
            q_fn(a, u, v).unwrap() - q_minus(a, u, v).unwrap(),
            b,
            max_relative = 1e-12
        );
    }

    #[test]
    fn integral_and_series_agree() {
        for (a, u, v) in [
            (0.5, 1.0, 2.0),
            (0.3, 1.5, 2.5),
            (1.7, 3.9, 0.6),
            (0.1, 0.5, 4.0),
        ] {
            let lhs = q_minus(a, u, v).unwrap();
            let rhs = (u * u + v * v).exp() * one_minus_t(a, u, v).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-8);
        }
    }

    #[test]
    fn complete_integral_is_one() {
        let (a, u) = (0.6, 1.7);
        let opts = QuadOptions::default();
        let r = integrate_radial(|s| t_integrand(a, u, s), u + 12.0, &opts).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn limits() {
        assert!(q_minus(0.4, 1.0, 1e-6).unwrap() < 1e-11);
        assert!(t_fn(0.4, 1.0, 30.0).unwrap() < 1e-300);
        let qt = q_tilde(0.3, 3.0, 5.0).unwrap();
        assert!((qt - 1.0).abs() < 0.05);
        assert!(q_minus(0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn double_series_matches_bessel_series() {
        for (a, u, v) in [(0.3, 1.5, 2.5), (0.0, 2.0, 0.3), (1.2, 0.4, 3.0)] {
            assert_relative_eq!(
                ln_q_double(a, u, v).unwrap(),
                ln_q_fn(a, u, v).unwrap(),
                max_relative = 1e-13
            );
        }
        // u = 0: Σ_n B^{α+n}/Γ(α+n+1)
        let (a, v) = (0.4f64, 1.3f64);
        let direct: f64 = (0..80)
            .map(|n| ((a + n as f64) * 2.0 * v.ln() - ln_gamma(a + n as f64 + 1.0).unwrap()).exp())
            .sum();
        assert_relative_eq!(
            ln_q_double(a, 0.0, v).unwrap(),
            direct.ln(),
            max_relative = 1e-13
        );
        assert!(delta_any(a, 0.0, v).unwrap() < 1.0);
    }

    #[test]
    fn complex_matches_real_on_positive_axis() {
        let (a, u, v) = (0.3, 1.5, 2.5);
        let c = q_complex(a, Complex64::new(u * u, 0.0), Complex64::new(v * v, 0.0)).unwrap();
        assert_relative_eq!(c.re, q_fn(a, u, v).unwrap(), max_relative = 1e-11);
        assert!(c.im.abs() < 1e-9 * c.re);
    }

    #[test]
    fn delta_below_one() {
        for a in [0.05, 0.5, 0.95] {
            for u in [0.3, 1.0, 3.0, 6.0] {
                for v in [0.3, 1.0, 3.0, 6.0] {
                    let d = delta_fn(a, u, v).unwrap();
                    let e = delta_complement(a, u, v).unwrap();
                    assert!(d > 0.0 && d <= 1.0 && e > 0.0, "{a} {u} {v} {d}");
                    assert!((d + e - 1.0).abs() < 1e-14, "{a} {u} {v}");
                }
            }
        }
    }
}
