//! Regularized incomplete beta function in log form, specialised for cap areas.
//!
//! The surface fraction of a cap of half-angle `alpha <= pi/2` on `S^n` is
//! `(1/2) I_{sin^2 alpha}(n/2, 1/2)`. For large `n` the value underflows, so
//! everything here is computed as a natural logarithm.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use crate::error::{Error, Result};
use crate::logscale::LogScale;

const MAX_ITER: usize = 200_000;
const TINY: f64 = 1e-300;

/// `ln(Gamma(a + 1/2) / Gamma(a))` for `a > 0`, accurate to a few ulps in
/// absolute terms even when both gammas are astronomically large.
pub fn ln_gamma_half_ratio(a: f64) -> f64 {
    debug_assert!(a > 0.0);
    const SHIFT: f64 = 20.0;
    if a < SHIFT {
        // R(a) = R(a + k) * prod_{j<k} (a + j) / (a + j + 1/2)
        let k = (SHIFT - a).ceil();
        let mut acc = 0.0;
        let mut j = 0.0;
        while j < k {
            acc += ((a + j) / (a + j + 0.5)).ln();
            j += 1.0;
        }
        return acc + ln_gamma_half_ratio(a + k);
    }
    // Stirling series difference; the a*ln1p(1/2a) - 1/2 term is O(1/a).
    a * (0.5 / a).ln_1p() - 0.5 + 0.5 * a.ln() + stirling_tail(a + 0.5) - stirling_tail(a)
}

fn stirling_tail(z: f64) -> f64 {
    // sum_k B_{2k} / (2k (2k-1) z^{2k-1}), k = 1..6
    const C: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
    ];
    let z2 = z * z;
    let mut pow = z;
    let mut sum = 0.0;
    for c in C {
        sum += c / pow;
        pow *= z2;
    }
    sum
}

/// `ln B(a, 1/2)`.
pub fn ln_beta_half(a: f64) -> f64 {
    0.5 * PI.ln() - ln_gamma_half_ratio(a)
}

/// `ln I_x(a, b)` given `x`, its complement `y = 1 - x` (passed separately so
/// callers can supply it without cancellation) and `ln B(a, b)`.
pub fn ln_beta_inc_reg(a: f64, b: f64, x: f64, y: f64, ln_beta: f64) -> Result<LogScale> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidInput(format!(
            "incomplete beta needs a, b > 0 (got {a}, {b})"
        )));
    }
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(Error::InvalidInput(format!(
            "incomplete beta argument out of [0, 1]: {x}"
        )));
    }
    if x == 0.0 {
        return Ok(LogScale::ZERO);
    }
    if y == 0.0 {
        return Ok(LogScale::ONE);
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        let tail = ln_inc_cf(b, a, y, x, ln_beta)?;
        Ok(tail.complement())
    } else {
        ln_inc_cf(a, b, x, y, ln_beta)
    }
}

/// Continued fraction for `I_x(a, b)` (modified Lentz), valid when
/// `x <= (a + 1) / (a + b + 2)`.
fn ln_inc_cf(a: f64, b: f64, x: f64, y: f64, ln_beta: f64) -> Result<LogScale> {
    let ln_front = a * x.ln() + b * y.ln() - ln_beta - a.ln();

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut f = d;

    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let even = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + even * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + even / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        f *= d * c;

        let odd = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + odd * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + odd / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        f *= delta;

        if (delta - 1.0).abs() < 2.0 * f64::EPSILON {
            return Ok(LogScale::from_ln(ln_front + f.ln()));
        }
    }
    Err(Error::Numerical(format!(
        "incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})"
    )))
}

/// Surface fraction of a cap with half-angle `alpha` on the unit sphere `S^n`
/// (the sphere of dimension `n` in `R^{n+1}`), as a log.
pub fn ln_cap_fraction_angle(n: usize, alpha: f64) -> Result<LogScale> {
    if n == 0 {
        return Err(Error::InvalidInput("sphere dimension must be >= 1".into()));
    }
    if alpha.is_nan() {
        return Err(Error::InvalidInput("cap angle is NaN".into()));
    }
    if alpha <= 0.0 {
        return Ok(LogScale::ZERO);
    }
    if alpha >= PI {
        return Ok(LogScale::ONE);
    }
    if alpha > FRAC_PI_2 {
        return Ok(ln_cap_fraction_angle(n, PI - alpha)?.complement());
    }
    if alpha == FRAC_PI_2 {
        return Ok(LogScale::from_ln(-LN_2));
    }
    let (s, c) = alpha.sin_cos();
    ln_cap_fraction_sin2(n, s * s, c * c)
}

/// Same as [`ln_cap_fraction_angle`] but parameterised by `sin^2 alpha` and
/// `cos^2 alpha` for a cap no larger than a hemisphere.
pub fn ln_cap_fraction_sin2(n: usize, sin2: f64, cos2: f64) -> Result<LogScale> {
    let a = n as f64 / 2.0;
    let ib = ln_beta_inc_reg(a, 0.5, sin2, cos2, ln_beta_half(a))?;
    Ok(LogScale::from_ln(ib.ln() - LN_2))
}
