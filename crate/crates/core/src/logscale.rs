//! Positive reals carried as natural logarithms.
//!
//! Cap fractions and probability bounds in high dimensions routinely fall
//! below `f64::MIN_POSITIVE`; every consumer that may see such a value takes a
//! [`LogScale`] and only exponentiates on demand.

use std::fmt;
use std::ops::{Div, Mul};

/// A nonnegative real stored as `ln(x)`. `ln = -inf` encodes exactly zero.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogScale(f64);

impl LogScale {
    pub const ZERO: LogScale = LogScale(f64::NEG_INFINITY);
    pub const ONE: LogScale = LogScale(0.0);

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan());
        LogScale(ln)
    }

    /// Panics in debug builds on negative input.
    pub fn from_value(x: f64) -> Self {
        debug_assert!(x >= 0.0);
        LogScale(x.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    /// `exp(ln)`; returns 0 when the value is below the representable range.
    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// True when the value is positive but `value()` would flush to zero
    /// or lose all precision as a subnormal.
    pub fn underflows(self) -> bool {
        !self.is_zero() && self.0 < f64::MIN_POSITIVE.ln()
    }

    pub fn powf(self, p: f64) -> Self {
        if self.is_zero() {
            return if p == 0.0 { Self::ONE } else { Self::ZERO };
        }
        LogScale(self.0 * p)
    }

    /// `1 - x` for `x` in `[0, 1]`, evaluated without cancellation near 0.
    pub fn complement(self) -> Self {
        if self.is_zero() {
            return Self::ONE;
        }
        // ln(1 - e^a) = ln(-expm1(a)), split at ln 2 for accuracy.
        let a = self.0;
        let v = if a > -std::f64::consts::LN_2 {
            (-a.exp_m1()).ln()
        } else {
            (-a.exp()).ln_1p()
        };
        LogScale(v)
    }
}

impl Mul for LogScale {
    type Output = LogScale;
    fn mul(self, rhs: LogScale) -> LogScale {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        LogScale(self.0 + rhs.0)
    }
}

impl Div for LogScale {
    type Output = LogScale;
    fn div(self, rhs: LogScale) -> LogScale {
        LogScale(self.0 - rhs.0)
    }
}

impl fmt::Display for LogScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.underflows() {
            write!(f, "exp({:.6})", self.0)
        } else {
            write!(f, "{:e}", self.value())
        }
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
