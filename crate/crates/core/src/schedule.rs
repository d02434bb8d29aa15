//! Parameter schedules for the covering constructions and the random trial
//! count `N`.

use std::fmt;
use std::str::FromStr;

use crate::capgeom::{cap_fraction, SphereSpec};
use crate::error::{invalid, Error, Result};
use crate::logscale::LogScale;

/// Largest ratio for which `N` is carried as an exact integer.
const EXACT_LIMIT: f64 = 9_007_199_254_740_992.0; // 2^53

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Single-level schedule: `eps = 1/(n ln n)`.
    V1,
    /// Two-level schedule for finite `n`: `eps = 1/(2 n ln n)`.
    V2,
    /// Two-level schedule with exponent `b > 3/2`.
    Asymptotic,
    /// Asymptotic `beta`, `lambda`, `q` with caller-chosen `eps` and `mu`.
    Engineering,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::V1 => "v1",
            Mode::V2 => "v2",
            Mode::Asymptotic => "asymptotic",
            Mode::Engineering => "engineering",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v1" => Ok(Mode::V1),
            "v2" => Ok(Mode::V2),
            "asymptotic" => Ok(Mode::Asymptotic),
            "engineering" => Ok(Mode::Engineering),
            other => Err(invalid(format!("unknown mode {other:?}"))),
        }
    }
}

/// The number of random caps together with the remainder
/// `nu = lambda n ln n - theta N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialCount {
    /// `None` when `N` exceeds 2^53 and is only known through `ln_count`.
    pub exact: Option<u64>,
    pub ln_count: f64,
    /// `None` when `exact` is `None`.
    pub nu: Option<f64>,
    /// Set when the caller fixed `N` instead of deriving it.
    pub forced: bool,
}

impl TrialCount {
    /// The count as a `usize`, for constructions that must materialise it.
    pub fn materialise(&self) -> Result<usize> {
        match self.exact {
            Some(n) if n <= usize::MAX as u64 => Ok(n as usize),
            _ => Err(Error::Construction(format!(
                "trial count exp({:.3}) is too large to sample",
                self.ln_count
            ))),
        }
    }
}

/// `N` with `lambda n ln n / theta - 1 < N <= lambda n ln n / theta`.
pub fn trial_count(lambda: f64, n: usize, theta: LogScale) -> Result<TrialCount> {
    if n < 2 {
        return Err(invalid("trial count needs n >= 2"));
    }
    let nf = n as f64;
    trial_count_from_total(lambda * nf * nf.ln(), theta)
}

/// Same as [`trial_count`] with the target `lambda n ln n` given directly.
pub fn trial_count_from_total(total: f64, theta: LogScale) -> Result<TrialCount> {
    if !(total.is_finite() && total >= 1.0) {
        return Err(invalid(format!("lambda n ln n must be >= 1, got {total}")));
    }
    if theta.is_zero() || theta.ln().is_nan() {
        return Err(invalid("theta must be positive"));
    }
    if theta.ln() >= 0.0 {
        return Err(invalid(format!("theta must be < 1, got {}", theta.value())));
    }
    let ln_ratio = total.ln() - theta.ln();
    if theta.underflows() || ln_ratio > EXACT_LIMIT.ln() {
        return Ok(TrialCount {
            exact: None,
            ln_count: ln_ratio,
            nu: None,
            forced: false,
        });
    }
    let th = theta.value();
    let mut count = (total / th).floor();
    // floor of a rounded quotient can be off by one in either direction
    for _ in 0..4 {
        let nu = total - th * count;
        if nu < 0.0 {
            count -= 1.0;
        } else if nu >= th {
            count += 1.0;
        } else {
            break;
        }
    }
    let nu = total - th * count;
    if !(nu >= 0.0 && nu < th) {
        return Err(Error::Numerical(format!(
            "could not place N in its interval (total={total}, theta={th})"
        )));
    }
    Ok(TrialCount {
        exact: Some(count as u64),
        ln_count: count.ln(),
        nu: Some(nu),
        forced: false,
    })
}

/// One coherent assignment of the schedule symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSet {
    pub mode: Mode,
    pub n: usize,
    pub r: f64,
    pub epsilon: f64,
    pub rho: f64,
    pub beta: Option<f64>,
    pub lambda: f64,
    pub mu: Option<f64>,
    pub d: Option<f64>,
    pub q: Option<f64>,
    pub s: Option<u64>,
    pub b_exponent: Option<f64>,
    /// Half-chord whose cap fraction sizes `N`: `rho` for the single-level
    /// schedule, `d` otherwise.
    pub trial_half_chord: f64,
    /// `ln` of the cap fraction of `trial_half_chord`.
    pub ln_theta_trial: f64,
    pub trials: TrialCount,
}

impl ParamSet {
    pub fn sphere(&self) -> Result<SphereSpec> {
        SphereSpec::new(self.n, self.r)
    }

    pub fn theta_trial(&self) -> LogScale {
        LogScale::from_ln(self.ln_theta_trial)
    }

    /// `mu`, or a schedule error naming the operation that needs it.
    pub fn require_mu(&self, what: &str) -> Result<f64> {
        self.mu
            .ok_or_else(|| Error::Schedule(format!("{what} needs mu, absent in {} mode", self.mode)))
    }

    pub fn require_d(&self, what: &str) -> Result<f64> {
        self.d
            .ok_or_else(|| Error::Schedule(format!("{what} needs d, absent in {} mode", self.mode)))
    }

    pub fn require_s(&self, what: &str) -> Result<u64> {
        self.s
            .ok_or_else(|| Error::Schedule(format!("{what} needs s, absent in {} mode", self.mode)))
    }
}

/// Caller-chosen values for [`params_engineering`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineeringOverrides {
    pub epsilon: f64,
    /// Without `mu` the set only supports the single-level construction and
    /// `N` is sized by the `rho`-cap.
    pub mu: Option<f64>,
    pub b: f64,
    pub trials: Option<u64>,
}

impl EngineeringOverrides {
    pub fn new(epsilon: f64, mu: Option<f64>) -> Self {
        EngineeringOverrides {
            epsilon,
            mu,
            b: 2.0,
            trials: None,
        }
    }
}

fn check_dims(n: usize, r: f64) -> Result<SphereSpec> {
    if n < 3 {
        return Err(invalid(format!("schedules need n >= 3, got {n}")));
    }
    SphereSpec::for_construction(n, r)
}

fn ln_terms(n: usize) -> (f64, f64, f64) {
    let nf = n as f64;
    let ln = nf.ln();
    (nf, ln, ln.ln())
}

fn sized(
    spec: &SphereSpec,
    lambda: f64,
    half_chord: f64,
) -> Result<(f64, TrialCount)> {
    let m = cap_fraction(spec, half_chord)?;
    let trials = trial_count(lambda, spec.n(), m.log_theta())?;
    Ok((m.ln_theta, trials))
}

pub fn params_v1(n: usize, r: f64) -> Result<ParamSet> {
    let spec = check_dims(n, r)?;
    let (nf, ln, lnln) = ln_terms(n);
    let epsilon = 1.0 / (nf * ln);
    let rho = 1.0 - epsilon;
    let lambda = 1.0 + lnln / ln + 2.0 / nf;
    let (ln_theta_trial, trials) = sized(&spec, lambda, rho)?;
    Ok(ParamSet {
        mode: Mode::V1,
        n,
        r,
        epsilon,
        rho,
        beta: None,
        lambda,
        mu: None,
        d: None,
        q: None,
        s: None,
        b_exponent: None,
        trial_half_chord: rho,
        ln_theta_trial,
        trials,
    })
}

/// The closed-form symbols of the finite two-level schedule, without `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct V2Symbols {
    pub epsilon: f64,
    pub rho: f64,
    pub beta: f64,
    pub lambda: f64,
    pub mu: f64,
    pub d: f64,
    pub q: f64,
    pub s: u64,
}

pub fn v2_symbols(n: usize) -> V2Symbols {
    let (nf, ln, lnln) = ln_terms(n);
    let epsilon = 1.0 / (2.0 * nf * ln);
    let beta = 0.5 + 2.0 * lnln / ln;
    let mu = (-beta * ln).exp() / (2.0 * 3f64.sqrt());
    let q = 3.0 * lnln;
    V2Symbols {
        epsilon,
        rho: 1.0 - epsilon,
        beta,
        lambda: beta + 5.0 / (2.0 * ln),
        mu,
        d: 1.0 - 2.0 * epsilon - mu * mu,
        q,
        s: (nf / q).floor() as u64,
    }
}

pub fn params_v2(n: usize, r: f64) -> Result<ParamSet> {
    let spec = check_dims(n, r)?;
    let v = v2_symbols(n);
    let (ln_theta_trial, trials) = sized(&spec, v.lambda, v.d)?;
    Ok(ParamSet {
        mode: Mode::V2,
        n,
        r,
        epsilon: v.epsilon,
        rho: v.rho,
        beta: Some(v.beta),
        lambda: v.lambda,
        mu: Some(v.mu),
        d: Some(v.d),
        q: Some(v.q),
        s: Some(v.s),
        b_exponent: None,
        trial_half_chord: v.d,
        ln_theta_trial,
        trials,
    })
}

struct AsymptoticSymbols {
    beta: f64,
    lambda: f64,
    mu: f64,
    q: f64,
}

fn asymptotic_symbols(n: usize, b: f64) -> Result<AsymptoticSymbols> {
    if !(b > 1.5 && b.is_finite()) {
        return Err(invalid(format!("exponent b must exceed 3/2, got {b}")));
    }
    let (nf, ln, lnln) = ln_terms(n);
    let beta = 0.5 + b * lnln / ln;
    Ok(AsymptoticSymbols {
        beta,
        lambda: beta + 3.0 / (4.0 * ln),
        mu: 1.0 / (2.0 * nf.sqrt() * ln.powf(b)),
        q: lnln * lnln,
    })
}

fn s_of(n: usize, q: f64) -> u64 {
    (n as f64 / q).floor() as u64
}

pub fn params_asymptotic(n: usize, r: f64, b: f64) -> Result<ParamSet> {
    let a = asymptotic_symbols(n, b)?;
    let spec = check_dims(n, r)?;
    let (nf, ln, _) = ln_terms(n);
    let epsilon = 1.0 / (2.0 * nf * ln);
    let d = 1.0 - 2.0 * epsilon - a.mu * a.mu;
    let (ln_theta_trial, trials) = sized(&spec, a.lambda, d)?;
    Ok(ParamSet {
        mode: Mode::Asymptotic,
        n,
        r,
        epsilon,
        rho: 1.0 - epsilon,
        beta: Some(a.beta),
        lambda: a.lambda,
        mu: Some(a.mu),
        d: Some(d),
        q: Some(a.q),
        s: Some(s_of(n, a.q)),
        b_exponent: Some(b),
        trial_half_chord: d,
        ln_theta_trial,
        trials,
    })
}

/// Asymptotic `beta`, `lambda` and `q` with the caller's `eps` and `mu`;
/// `rho = 1 - eps` and `d = 1 - 2 eps - mu^2` keep their structural form.
pub fn params_engineering(n: usize, r: f64, o: EngineeringOverrides) -> Result<ParamSet> {
    let a = asymptotic_symbols(n, o.b)?;
    let spec = check_dims(n, r)?;
    let eps = o.epsilon;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid(format!("epsilon must lie in (0, 1/2), got {eps}")));
    }
    let rho = 1.0 - eps;
    let (mu, d) = match o.mu {
        Some(mu) => {
            if !(mu > eps && mu < rho) {
                return Err(invalid(format!(
                    "engineering mode needs eps < mu < rho, got eps={eps} mu={mu}"
                )));
            }
            if mu + eps > 1.0 {
                return Err(invalid(format!("mu + eps must not exceed 1, got {}", mu + eps)));
            }
            let d = 1.0 - 2.0 * eps - mu * mu;
            if d <= 0.0 {
                return Err(invalid(format!("d = 1 - 2 eps - mu^2 must be positive, got {d}")));
            }
            (Some(mu), Some(d))
        }
        None => (None, None),
    };
    let trial_half_chord = d.unwrap_or(rho);
    let (ln_theta_trial, mut trials) = sized(&spec, a.lambda, trial_half_chord)?;
    if let Some(forced) = o.trials {
        let nf = n as f64;
        let theta = ln_theta_trial.exp();
        trials = TrialCount {
            exact: Some(forced),
            ln_count: (forced as f64).ln(),
            nu: Some(a.lambda * nf * nf.ln() - theta * forced as f64),
            forced: true,
        };
    }
    Ok(ParamSet {
        mode: Mode::Engineering,
        n,
        r,
        epsilon: eps,
        rho,
        beta: Some(a.beta),
        lambda: a.lambda,
        mu,
        d,
        q: Some(a.q),
        s: mu.map(|_| s_of(n, a.q)),
        b_exponent: Some(o.b),
        trial_half_chord,
        ln_theta_trial,
        trials,
    })
}
