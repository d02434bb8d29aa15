use std::f64::consts::{FRAC_PI_2, PI};

use super::SphereSpec;
use crate::error::{invalid, Result};
use crate::logscale::LogScale;
use crate::special::ln_cap_fraction_sin2;

/// Surface fraction of a cap `C(rho)` on `S_r^n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapMeasure {
    pub n: usize,
    pub r: f64,
    pub rho: f64,
    pub alpha: f64,
    /// Fraction of the whole sphere; `0.0` when it underflows (see `ln_theta`).
    pub theta: f64,
    pub ln_theta: f64,
    pub underflow: bool,
}

impl CapMeasure {
    pub fn log_theta(&self) -> LogScale {
        LogScale::from_ln(self.ln_theta)
    }
}

/// Exact fraction `(1/2) I_{sin^2 alpha}(n/2, 1/2)` of the sphere covered by a
/// cap of half-chord `rho`.
pub fn cap_fraction(spec: &SphereSpec, rho: f64) -> Result<CapMeasure> {
    let alpha = spec.half_angle(rho)?;
    let ratio = (rho / spec.r()).min(1.0);
    let ln = if ratio == 1.0 {
        LogScale::from_value(0.5)
    } else {
        let cos2 = (1.0 - ratio) * (1.0 + ratio);
        ln_cap_fraction_sin2(spec.n(), ratio * ratio, cos2)?
    };
    Ok(CapMeasure {
        n: spec.n(),
        r: spec.r(),
        rho,
        alpha,
        theta: ln.value(),
        ln_theta: ln.ln(),
        underflow: ln.underflows(),
    })
}

/// `ln` of `(2 pi (n-1))^{-1/2} sin^{n-1}(alpha) / cos(alpha)`.
pub fn ln_cap_fraction_upper(n: usize, alpha: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("upper cap bound needs n >= 2, got {n}")));
    }
    if !(alpha > 0.0 && alpha < FRAC_PI_2) {
        return Err(invalid(format!(
            "upper cap bound needs 0 < alpha < pi/2, got {alpha}"
        )));
    }
    let m = (n - 1) as f64;
    Ok(-0.5 * (2.0 * PI * m).ln() + m * alpha.sin().ln() - alpha.cos().ln())
}

/// Upper bound on the fraction of an `alpha`-cap of the unit `(n-1)`-sphere.
pub fn cap_fraction_upper(n: usize, alpha: f64) -> Result<f64> {
    Ok(ln_cap_fraction_upper(n, alpha)?.exp())
}

/// `(tau / delta)^n`, the scaling factor between caps of half-chords `tau`
/// and `delta`. For exact fractions it bounds the ratio from above, not
/// below; see the tests.
pub fn cap_ratio_lower(n: usize, tau: f64, delta: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(invalid(format!("tau must be positive, got {tau}")));
    }
    if !(tau < delta) {
        return Err(invalid(format!("need tau < delta, got {tau} >= {delta}")));
    }
    Ok((n as f64 * (tau / delta).ln()).exp())
}
