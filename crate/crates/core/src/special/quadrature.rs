//! Adaptive 15-point Gauss–Kronrod quadrature on finite intervals.
//!
//! Panels are refined largest-error-first until the summed estimate meets
//! `max(abs_tol, rel_tol·|I|)`. A radial helper maps the panel touching the
//! origin through ρ = t⁴ so integrands behaving like ρ^β (β > −1) are smooth
//! enough for the rule.

use super::Scalar;
use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Number of equal panels the interval is split into before refinement.
    pub initial_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_panels: 4000,
            initial_panels: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub abs_error: f64,
    pub evaluations: usize,
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err;
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

fn gk15<T: Scalar>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.norm() * WGK[7];
    let mut fv1 = [T::default(); 7];
    let mut fv2 = [T::default(); 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k = res_k + (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let h = half.abs();
    let err = rescale_error(((res_k - res_g) * h).norm(), res_abs * h, res_asc * h);
    (res_k * half, err)
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<T: Scalar>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult<T>> {
    if a == b {
        return Ok(QuadResult {
            value: T::default(),
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let n0 = opts.initial_panels.max(1);
    let mut heap = BinaryHeap::with_capacity(n0 * 4);
    let mut total = T::default();
    let mut err = 0.0;
    let width = (b - a) / n0 as f64;
    for i in 0..n0 {
        let pa = a + width * i as f64;
        let pb = if i + 1 == n0 {
            b
        } else {
            a + width * (i + 1) as f64
        };
        let (v, e) = gk15(&mut f, pa, pb);
        total = total + v;
        err += e;
        heap.push(Panel {
            a: pa,
            b: pb,
            value: v,
            err: e,
        });
    }
    let mut evals = 15 * n0;
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.norm());
        if err <= target {
            break;
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::Quadrature {
                estimate: err,
                requested: target,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split further in floating point
            return Err(Error::Quadrature {
                estimate: err,
                requested: target,
            });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evals += 30;
        total = total - worst.value + v1 + v2;
        err += e1 + e2 - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
    }
    // re-sum to shed accumulated cancellation in the running total
    let mut value = T::default();
    let mut err_sum = 0.0;
    for p in heap.iter() {
        value = value + p.value;
        err_sum += p.err;
    }
    Ok(QuadResult {
        value,
        abs_error: err_sum,
        evaluations: evals,
    })
}

/// Integrates `f` over `[0, cut]` for integrands that may behave like a
/// fractional power at the origin.
///
/// The first unit of the range (or all of it, when `cut < 1`) is mapped
/// through ρ = t⁴.
pub fn integrate_radial<T: Scalar>(
    mut f: impl FnMut(f64) -> T,
    cut: f64,
    opts: &QuadOptions,
) -> Result<QuadResult<T>> {
    let split = cut.min(1.0);
    let inner_opts = QuadOptions {
        initial_panels: 2,
        ..*opts
    };
    let inner = integrate(
        |t: f64| {
            let t2 = t * t;
            f(t2 * t2) * (4.0 * t2 * t)
        },
        0.0,
        split.powf(0.25),
        &inner_opts,
    )?;
    if cut <= split {
        return Ok(inner);
    }
    let outer = integrate(f, split, cut, opts)?;
    Ok(QuadResult {
        value: inner.value + outer.value,
        abs_error: inner.abs_error + outer.abs_error,
        evaluations: inner.evaluations + outer.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(
            |x: f64| x.powi(9) - 3.0 * x * x,
            -1.0,
            2.0,
            &QuadOptions::default(),
        )
        .unwrap();
        let want = (2f64.powi(10) - 1.0) / 10.0 - (8.0 + 1.0);
        assert_relative_eq!(r.value, want, max_relative = 1e-14);
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(|x: f64| (20.0 * x).cos(), 0.0, 3.0, &QuadOptions::default()).unwrap();
        assert_relative_eq!(r.value, (60.0f64).sin() / 20.0, epsilon = 1e-13);
    }

    #[test]
    fn fractional_power_at_origin() {
        // ∫₀^∞ ρ^{0.3} e^{-ρ} dρ = Γ(1.3)
        let g13 = crate::special::gamma(1.3).unwrap();
        let r = integrate_radial(
            |r: f64| r.powf(0.3) * (-r).exp(),
            60.0,
            &QuadOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(r.value, g13, max_relative = 1e-12);
        // and an integrable singularity ρ^{-0.7}
        let g03 = crate::special::gamma(0.3).unwrap();
        let r = integrate_radial(
            |r: f64| r.powf(-0.7) * (-r).exp(),
            60.0,
            &QuadOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(r.value, g03, max_relative = 1e-11);
    }

    #[test]
    fn complex_valued() {
        let r = integrate(
            |x: f64| Complex64::new(0.0, x).exp(),
            0.0,
            std::f64::consts::PI,
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn failure_reports_estimate() {
        let opts = QuadOptions {
            max_panels: 10,
            ..QuadOptions::default()
        };
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &opts).unwrap_err();
        match err {
            Error::Quadrature {
                estimate,
                requested,
            } => assert!(estimate > requested),
            other => panic!("unexpected {other:?}"),
        }
    }
}
