use crate::error::{domain, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k-1)) for k = 1..=8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

const SHIFT_TO: f64 = 15.0;

/// Natural logarithm of the gamma function for `x > 0`.
///
/// Arguments below 15 are shifted upward with the recurrence
/// Γ(x+1) = xΓ(x) and the Stirling series is summed there.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(
            "ln_gamma",
            format!("x = {x} must be finite and > 0"),
        ));
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    let mut y = x;
    let mut prod = 1.0;
    while y < SHIFT_TO {
        prod *= y;
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut p = inv;
    for c in STIRLING {
        corr += c * p;
        p *= inv2;
    }
    let stirling = (y - 0.5) * y.ln() - y + LN_SQRT_2PI + corr;
    Ok(stirling - prod.ln())
}

/// Γ(x) for `x > 0`. Overflows to an error past x ≈ 171.6.
pub fn gamma(x: f64) -> Result<f64> {
    let lg = ln_gamma(x)?;
    if lg > f64::MAX.ln() {
        return Err(crate::Error::Overflow {
            func: "gamma",
            ln_value: lg,
        });
    }
    Ok(lg.exp())
}
