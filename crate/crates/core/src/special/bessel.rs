//! Bessel functions of real order ν > −1.
//!
//! J is reduced to the entire function
//! `Λ_ν(s) = Σ_k (−s)^k / (k! Γ(ν+k+1))`, with `J_ν(ζ) = (ζ/2)^ν Λ_ν(ζ²/4)`.
//! Λ is evaluated by its ascending series when cancellation is mild and
//! otherwise by backward recurrence normalized with the Neumann sum
//! `(ζ/2)^ν = Σ_k (ν+2k) Γ(ν+k)/k! · J_{ν+2k}(ζ)`; whichever route shows
//! the smaller measured cancellation wins.
//!
//! I is summed directly in log space outward from the largest term, so it
//! has no cancellation at all and never overflows internally.

use super::gamma::ln_gamma;
use super::series::{SeriesSum, TailRule};
use crate::error::{domain, Error, Result};
use num_complex::Complex64;

const RESCALE: f64 = 1e200;
// Digits we are willing to lose to cancellation in the ascending series
// before trying the recurrence.
const SERIES_CANCEL_LIMIT: f64 = 1e3;

fn check_order(func: &'static str, nu: f64) -> Result<()> {
    if !(nu > -1.0) || !nu.is_finite() {
        return Err(domain(func, format!("order {nu} must be finite and > -1")));
    }
    Ok(())
}

/// Ascending series for Λ_ν(s). Returns the value and Σ|t_k| / |Σ t_k|.
fn entire_series(nu: f64, s: Complex64) -> Result<(Complex64, f64)> {
    let rule = TailRule {
        tol: 1e-17,
        consecutive: 2,
        max_terms: 20_000,
    };
    let mut acc = SeriesSum::new(rule);
    let mut t = Complex64::new((-ln_gamma(nu + 1.0)?).exp(), 0.0);
    let mut abs_sum = 0.0;
    let mut k = 0usize;
    loop {
        abs_sum += t.norm();
        if acc.push(t) {
            break;
        }
        if acc.exhausted() {
            return Err(acc.non_convergence("bessel_j series"));
        }
        let kf = k as f64;
        t = t * (-s) / ((kf + 1.0) * (nu + kf + 1.0));
        k += 1;
    }
    let v = acc.value();
    let cancel = if v.norm() > 0.0 {
        abs_sum / v.norm()
    } else {
        f64::INFINITY
    };
    Ok((v, cancel))
}

/// Backward recurrence for the ratio J_ν(ζ) / [(ζ/2)^ν / Γ(ν+1)] = Γ(ν+1) Λ_ν.
/// Returns the ratio and the cancellation measured in the normalization sum.
fn miller_ratio(nu: f64, zeta: Complex64) -> (Complex64, f64) {
    let az = zeta.norm();
    let mut n = (az + 20.0 + 4.0 * az.sqrt()).ceil() as usize;
    if n % 2 == 1 {
        n += 1;
    }
    let half = n / 2;
    // h_i = Π_{q=1}^{i-1} (ν+q) / i!, the Neumann weights divided by Γ(ν+1)
    let mut h = vec![0.0; half + 1];
    if half >= 1 {
        h[1] = 1.0;
    }
    for i in 1..half {
        h[i + 1] = h[i] * (nu + i as f64) / (i as f64 + 1.0);
    }
    let inv_zeta = 1.0 / zeta;
    let mut j_next = Complex64::new(0.0, 0.0);
    let mut j_cur = Complex64::new(1e-30, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    let mut k = n;
    loop {
        if k.is_multiple_of(2) {
            let w = if k == 0 {
                1.0
            } else {
                (nu + k as f64) * h[k / 2]
            };
            sum += j_cur * w;
            abs_sum += (j_cur * w).norm();
        }
        if k == 0 {
            break;
        }
        let j_prev = j_cur * (2.0 * (nu + k as f64)) * inv_zeta - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        k -= 1;
        if j_cur.norm() > RESCALE {
            j_cur /= RESCALE;
            j_next /= RESCALE;
            sum /= RESCALE;
            abs_sum /= RESCALE;
        }
    }
    let cancel = abs_sum / sum.norm();
    (j_cur / sum, cancel)
}

/// Λ_ν(s) = Σ_k (−s)^k / (k! Γ(ν+k+1)) for complex s.
///
/// J_ν(ζ) = (ζ/2)^ν Λ_ν(ζ²/4) and I_ν(x) = (x/2)^ν Λ_ν(−x²/4).
pub fn bessel_j_entire_complex(nu: f64, s: Complex64) -> Result<Complex64> {
    check_order("bessel_j_entire", nu)?;
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(domain("bessel_j_entire", "non-finite argument"));
    }
    let zeta = 2.0 * s.sqrt();
    if zeta.norm() < 4.0 {
        return Ok(entire_series(nu, s)?.0);
    }
    let (sv, s_cancel) = entire_series(nu, s)?;
    if s_cancel < SERIES_CANCEL_LIMIT {
        return Ok(sv);
    }
    let (ratio, m_cancel) = miller_ratio(nu, zeta);
    if m_cancel < s_cancel {
        Ok(ratio * (-ln_gamma(nu + 1.0)?).exp())
    } else {
        Ok(sv)
    }
}

/// Real-argument form of [`bessel_j_entire_complex`].
pub fn bessel_j_entire(nu: f64, s: f64) -> Result<f64> {
    Ok(bessel_j_entire_complex(nu, Complex64::new(s, 0.0))?.re)
}

/// Bessel function of the first kind J_α(x), α > −1, x ≥ 0.
pub fn bessel_j(alpha: f64, x: f64) -> Result<f64> {
    check_order("bessel_j", alpha)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain(
            "bessel_j",
            format!("argument {x} must be finite and >= 0"),
        ));
    }
    if x == 0.0 {
        return match alpha {
            0.0 => Ok(1.0),
            a if a > 0.0 => Ok(0.0),
            _ => Err(domain("bessel_j", "J_α(0) is infinite for α < 0")),
        };
    }
    let ln_pref = alpha * (0.5 * x).ln() - ln_gamma(alpha + 1.0)?;
    let s = 0.25 * x * x;
    let zeta = Complex64::new(x, 0.0);
    let ratio = if x < 4.0 {
        entire_series(alpha, Complex64::new(s, 0.0))?.0 * (ln_gamma(alpha + 1.0)?).exp()
    } else {
        let (sv, cancel) = entire_series(alpha, Complex64::new(s, 0.0))?;
        if cancel < SERIES_CANCEL_LIMIT {
            sv * (ln_gamma(alpha + 1.0)?).exp()
        } else {
            miller_ratio(alpha, zeta).0
        }
    };
    Ok(ratio.re * ln_pref.exp())
}

/// ln I_ν(x) for ν > −1, x ≥ 0 (−∞ when I vanishes).
pub fn ln_bessel_i(nu: f64, x: f64) -> Result<f64> {
    check_order("bessel_i", nu)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain(
            "bessel_i",
            format!("argument {x} must be finite and >= 0"),
        ));
    }
    if x == 0.0 {
        return match nu {
            0.0 => Ok(0.0),
            a if a > 0.0 => Ok(f64::NEG_INFINITY),
            _ => Err(domain("bessel_i", "I_ν(0) is infinite for ν < 0")),
        };
    }
    let lx = (0.5 * x).ln();
    let q = 0.25 * x * x;
    let peak = ((-nu + (nu * nu + 4.0 * q).sqrt()) * 0.5).floor().max(0.0);
    let kp = peak as usize;
    let ln_peak = (nu + 2.0 * peak) * lx - ln_gamma(peak + 1.0)? - ln_gamma(nu + peak + 1.0)?;

    // upward from the peak, terms relative to the peak term
    let rule = TailRule {
        tol: 1e-17,
        consecutive: 2,
        max_terms: 1_000_000,
    };
    let mut up = SeriesSum::<f64>::new(rule);
    let mut t = 1.0;
    let mut k = kp;
    while !up.push(t) {
        if up.exhausted() {
            return Err(up.non_convergence("bessel_i"));
        }
        let kf = k as f64;
        t *= q / ((kf + 1.0) * (nu + kf + 1.0));
        k += 1;
    }
    let mut total = up.value();
    // downward: ratios ≤ 1 and shrinking, so stop once terms are negligible
    let mut t = 1.0;
    let mut k = kp;
    while k > 0 {
        let kf = k as f64;
        t *= kf * (nu + kf) / q;
        total += t;
        if t < 1e-18 * total {
            break;
        }
        k -= 1;
    }
    Ok(ln_peak + total.ln())
}

/// Modified Bessel function I_ν(x); signals overflow instead of returning ∞.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    let l = ln_bessel_i(nu, x)?;
    if l > f64::MAX.ln() {
        return Err(Error::Overflow {
            func: "bessel_i",
            ln_value: l,
        });
    }
    Ok(l.exp())
}

/// Exponentially scaled e^{−x} I_ν(x).
pub fn bessel_i_scaled(nu: f64, x: f64) -> Result<f64> {
    Ok((ln_bessel_i(nu, x)? - x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// Ascending series summed directly, the textbook definition.
    fn j_series_oracle(a: f64, x: f64) -> f64 {
        let mut s = 0.0;
        for k in 0..60 {
            let lg = ln_gamma(k as f64 + 1.0).unwrap() + ln_gamma(a + k as f64 + 1.0).unwrap();
            let mag = ((a + 2.0 * k as f64) * (x / 2.0).ln() - lg).exp();
            s += if k % 2 == 0 { mag } else { -mag };
        }
        s
    }

    #[test]
    fn j_trivial_values() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1.5, 0.0).unwrap(), 0.0);
        assert!(bessel_j(0.5, PI).unwrap().abs() < 1e-11);
        let x: f64 = 2.3;
        let closed = (2.0 / (PI * x)).sqrt() * x.sin();
        assert_relative_eq!(bessel_j(0.5, x).unwrap(), closed, max_relative = 1e-13);
    }

    #[test]
    fn j_matches_direct_series() {
        let oracle = j_series_oracle(1.3, 2.7);
        assert_relative_eq!(oracle, 0.503_927_761_946_129_7, max_relative = 1e-14);
        assert_relative_eq!(bessel_j(1.3, 2.7).unwrap(), oracle, max_relative = 1e-13);
    }

    #[test]
    fn j_reference_values() {
        // 50-digit reference evaluations
        let cases = [
            (0.3, 15.0, 0.080_045_072_038_934_18),
            (1.7, 50.0, -0.096_030_564_062_553_75),
            (0.0, 100.0, 0.019_985_850_304_223_122),
            (2.5, 200.0, 0.048_854_529_236_358_56),
            (-0.4, 7.3, 0.194_014_255_094_301_6),
            (40.0, 30.0, 3.612_023_608_896_585e-4),
            (10.2, 150.0, -1.361_980_397_579_213e-3),
            (0.5, 1e-3, 0.025_231_321_014_980_94),
            (25.0, 199.5, -0.039_865_293_471_146_31),
            (0.9, 0.4, 0.239_155_945_615_415_9),
            (3.0, 9.1, -0.159_761_332_740_244_95),
            (50.0, 60.0, -0.137_982_731_485_352_12),
            (-0.9, 120.0, 0.022_958_168_142_837_19),
        ];
        for (a, x, want) in cases {
            let got = bessel_j(a, x).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-11);
        }
    }

    #[test]
    fn j_domain_errors() {
        assert!(bessel_j(-1.0, 1.0).is_err());
        assert!(bessel_j(0.5, -1.0).is_err());
        assert!(bessel_j(-0.5, 0.0).is_err());
    }

    #[test]
    fn complex_entire_matches_real_on_axis_and_symmetry() {
        for &(nu, s) in &[(0.3, 10.0), (0.0, -30.0)] {
            let c = bessel_j_entire_complex(nu, Complex64::new(s, 0.0)).unwrap();
            let r = entire_series(nu, Complex64::new(s, 0.0)).unwrap().0;
            assert!((c - r).norm() <= 1e-12 * r.norm(), "{nu} {s}");
        }
        // J_{3/2}(x) = √(2/(πx)) (sin x / x − cos x), deep in the recurrence regime
        let x: f64 = 40.0;
        let j = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
        let c = bessel_j_entire_complex(1.5, Complex64::new(0.25 * x * x, 0.0)).unwrap();
        assert!((c.re * (0.5 * x).powf(1.5) - j).abs() < 1e-13);
        assert!(c.im.abs() < 1e-25);
        // Λ has real Taylor coefficients: Λ(s̄) = conj Λ(s)
        let s = Complex64::new(30.0, 12.0);
        let a = bessel_j_entire_complex(0.7, s).unwrap();
        let b = bessel_j_entire_complex(0.7, s.conj()).unwrap();
        assert!((a - b.conj()).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn complex_entire_routes_agree_off_axis() {
        // moderate |ζ| where both the series and the recurrence are accurate
        let s = Complex64::new(20.0, 15.0);
        let nu = 0.4;
        let (sv, _) = entire_series(nu, s).unwrap();
        let (ratio, _) = miller_ratio(nu, 2.0 * s.sqrt());
        let mv = ratio * (-ln_gamma(nu + 1.0).unwrap()).exp();
        assert!((sv - mv).norm() < 1e-11 * sv.norm());
    }

    #[test]
    fn i_trivial_values() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn i_reference_values() {
        assert_relative_eq!(
            bessel_i(0.7, 3.1).unwrap(),
            4.781_762_487_752_217,
            max_relative = 1e-12
        );
        let cases = [
            (
                0.3,
                50.0,
                2.929_888_721_451_148e20,
                0.056_510_224_260_500_99,
            ),
            (
                2.5,
                100.0,
                1.040_553_196_140_803_9e42,
                0.038_709_369_467_351_01,
            ),
            (-0.6, 2.0, 2.040_615_550_091_590_2, 0.276_167_283_448_681_6),
            (0.0, 0.5, 1.063_483_370_741_323_5, 0.645_035_270_449_150_1),
            (
                30.0,
                10.0,
                7.787_569_783_163_048e-12,
                3.535_551_211_760_518e-16,
            ),
        ];
        for (a, x, want, scaled) in cases {
            assert_relative_eq!(bessel_i(a, x).unwrap(), want, max_relative = 1e-11);
            assert_relative_eq!(bessel_i_scaled(a, x).unwrap(), scaled, max_relative = 1e-11);
        }
        assert_relative_eq!(
            bessel_i_scaled(1.2, 700.0).unwrap(),
            0.015_065_780_354_582_286,
            max_relative = 1e-11
        );
        assert_relative_eq!(
            bessel_i_scaled(0.4, 2000.0).unwrap(),
            0.008_920_821_347_190_077,
            max_relative = 1e-10
        );
    }

    #[test]
    fn i_overflow_is_signalled() {
        assert!(matches!(bessel_i(0.4, 2000.0), Err(Error::Overflow { .. })));
        assert!(ln_bessel_i(0.4, 2000.0).unwrap() > 1990.0);
    }

    #[test]
    fn i_agrees_with_entire_function() {
        let nu = 1.1;
        let x: f64 = 7.5;
        let via_entire = (0.5 * x).powf(nu) * bessel_j_entire(nu, -0.25 * x * x).unwrap();
        assert_relative_eq!(bessel_i(nu, x).unwrap(), via_entire, max_relative = 1e-13);
    }
}
