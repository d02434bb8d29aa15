//! Closed-form covering density bounds and the numeric certificates used to
//! justify the two-level construction.
//!
//! Every density bound is returned as an absolute density (already
//! multiplied by `n ln n` where the formula has that factor). Quantities that
//! can fall below the `f64` range are returned in log form.

use std::f64::consts::{E, LN_2};
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::logscale::LogScale;
use crate::schedule::{v2_symbols, Mode, ParamSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundFormula {
    /// Best known density for large balls.
    DBall,
    /// Previous best universal bound for spheres.
    DSphe,
    /// Two-level construction bound.
    DSph,
    /// Leading asymptotic terms of the two-level bound.
    SphAs,
    /// Single-level (embedded) construction bound.
    Est0,
    /// The density the single-level construction attains before simplification.
    Eps5Fixpoint,
    /// Claimed refinement, read literally as a coefficient of `n ln n`.
    Ref,
    /// Simplex lower bound `c1 n`.
    Lower,
}

impl BoundFormula {
    pub const ALL: [BoundFormula; 8] = [
        BoundFormula::DBall,
        BoundFormula::DSphe,
        BoundFormula::DSph,
        BoundFormula::SphAs,
        BoundFormula::Est0,
        BoundFormula::Eps5Fixpoint,
        BoundFormula::Ref,
        BoundFormula::Lower,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            BoundFormula::DBall => "d-ball",
            BoundFormula::DSphe => "d-sphe",
            BoundFormula::DSph => "d-sph",
            BoundFormula::SphAs => "sph-as",
            BoundFormula::Est0 => "est0",
            BoundFormula::Eps5Fixpoint => "eps5-fixpoint",
            BoundFormula::Ref => "ref",
            BoundFormula::Lower => "lower",
        }
    }
}

impl fmt::Display for BoundFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for BoundFormula {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundFormula::ALL
            .iter()
            .copied()
            .find(|f| f.id() == s)
            .ok_or_else(|| invalid(format!("unknown bound formula {s:?}")))
    }
}

fn logs(n: f64) -> (f64, f64) {
    let ln = n.ln();
    (ln, ln.ln())
}

/// Bound formulas as functions of a real `n`, so they can be differentiated.
pub fn evaluate_bound_real(formula: BoundFormula, n: f64, c1: Option<f64>) -> Result<f64> {
    let (ln, lnln) = logs(n);
    let nln = n * ln;
    Ok(match formula {
        BoundFormula::DBall => (1.0 + lnln / ln + 5.0 / ln) * nln,
        BoundFormula::DSphe => (1.0 + 2.0 / ln) * (1.0 + lnln / ln + 0.5f64.exp() / nln) * nln,
        BoundFormula::DSph => (0.5 + 2.0 * lnln / ln + 5.0 / ln) * nln,
        BoundFormula::SphAs => 0.5 * nln + 1.5 * n * lnln,
        BoundFormula::Est0 => (1.0 + lnln / ln + 3.0 / ln) * nln,
        BoundFormula::Eps5Fixpoint => {
            let lambda = 1.0 + lnln / ln + 2.0 / n;
            lambda * nln * (1.0 + 1.0 / ln + 1.0 / (ln * ln)) / (1.0 - 1.0 / (n * n))
        }
        BoundFormula::Ref => (0.5 + 2.0 * lnln / ln + 4.0 * lnln / ln) * nln,
        BoundFormula::Lower => {
            let c1 = c1.ok_or_else(|| invalid("the lower bound needs the constant c1"))?;
            c1 * n
        }
    })
}

pub fn evaluate_bound(formula: BoundFormula, n: usize, c1: Option<f64>) -> Result<f64> {
    if n < 3 {
        return Err(invalid(format!("bounds are defined for n >= 3, got {n}")));
    }
    evaluate_bound_real(formula, n as f64, c1)
}

/// Smallest `n` in `[n_lo, n_hi]` with `a(n) < b(n)`.
pub fn crossover_scan(
    a: BoundFormula,
    b: BoundFormula,
    n_lo: usize,
    n_hi: usize,
    c1: Option<f64>,
) -> Result<Option<usize>> {
    if n_lo < 3 {
        return Err(invalid("crossover scan needs n_lo >= 3"));
    }
    if n_lo > n_hi {
        return Err(invalid(format!("empty range {n_lo}..={n_hi}")));
    }
    for n in n_lo..=n_hi {
        if evaluate_bound(a, n, c1)? < evaluate_bound(b, n, c1)? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn less(lhs: f64, rhs: f64) -> Self {
        InequalityCheck {
            lhs,
            rhs,
            holds: lhs < rhs,
        }
    }
}

/// `(1 - 1/(n ln n))^{-n} < 1 + 1/ln n + 1/ln^2 n`.
pub fn epsilon_inequality(n: usize) -> Result<InequalityCheck> {
    if n < 4 {
        return Err(invalid(format!("the inequality is stated for n >= 4, got {n}")));
    }
    let nf = n as f64;
    let ln = nf.ln();
    let lhs = (-nf * (-1.0 / (nf * ln)).ln_1p()).exp();
    Ok(InequalityCheck::less(lhs, 1.0 + 1.0 / ln + 1.0 / (ln * ln)))
}

/// `(1 - 1/(n ln n) - n^{-2 beta})^{-n} < 1 + 1/ln n + 1/ln^2 n` with the
/// finite two-level `beta`.
pub fn expansion_inequality(n: usize) -> Result<InequalityCheck> {
    if n < 3 {
        return Err(invalid("expansion check needs n >= 3"));
    }
    let nf = n as f64;
    let ln = nf.ln();
    let beta = v2_symbols(n).beta;
    let inner = -1.0 / (nf * ln) - (-2.0 * beta * ln).exp();
    let lhs = (-nf * inner.ln_1p()).exp();
    Ok(InequalityCheck::less(lhs, 1.0 + 1.0 / ln + 1.0 / (ln * ln)))
}

/// Product form of the two-level density coefficient, before simplification.
pub fn assembled_coefficient(n: f64) -> f64 {
    let (ln, lnln) = logs(n);
    (0.5 + 2.0 * lnln / ln + 5.0 / (2.0 * ln))
        * (1.0 + 1.0 / ln + 1.0 / (ln * ln))
        * (1.0 + (LN_2 * (1.0 - n / 4.0)).exp())
}

/// Final coefficient `1/2 + 2 ln ln n / ln n + 5 / ln n`.
pub fn final_coefficient(n: f64) -> f64 {
    let (ln, lnln) = logs(n);
    0.5 + 2.0 * lnln / ln + 5.0 / ln
}

/// Product form is below the final coefficient.
pub fn density_assembly(n: usize) -> InequalityCheck {
    let nf = n as f64;
    InequalityCheck::less(assembled_coefficient(nf), final_coefficient(nf))
}

/// Outcome of a numeric moderation check of `f` over `g` on `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moderation {
    /// `(ln f)' >= (ln g)'` at every grid point.
    pub moderates: bool,
    /// `f(a) >= g(a)`.
    pub dominates_at_start: bool,
    /// `f >= g` at every grid point.
    pub dominates_on_grid: bool,
    /// Smallest `(ln f)' - (ln g)'` seen.
    pub min_log_slope_gap: f64,
}

const SLOPE_TOLERANCE: f64 = 1e-8;

/// Central-difference check that `f` moderates `g` on `[a, b]`, with step
/// `(b - a) / 1e6`.
pub fn moderates<F, G>(f: F, g: G, a: f64, b: f64, grid_points: usize) -> Result<Moderation>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if grid_points < 2 {
        return Err(invalid("moderation check needs at least 2 grid points"));
    }
    if !(a < b) {
        return Err(invalid(format!("need a < b, got [{a}, {b}]")));
    }
    let h = (b - a) / 1e6;
    let positive = |name: &str, x: f64, v: f64| -> Result<f64> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(invalid(format!("{name}({x}) = {v} is not positive")))
        }
    };
    let log_slope = |name: &str, func: &dyn Fn(f64) -> f64, x: f64| -> Result<f64> {
        let hi = positive(name, x + h, func(x + h))?;
        let lo = positive(name, x - h, func(x - h))?;
        Ok((hi.ln() - lo.ln()) / (2.0 * h))
    };
    let mut out = Moderation {
        moderates: true,
        dominates_at_start: positive("f", a, f(a))? >= positive("g", a, g(a))?,
        dominates_on_grid: true,
        min_log_slope_gap: f64::INFINITY,
    };
    for i in 0..grid_points {
        let x = a + (b - a) * i as f64 / (grid_points - 1) as f64;
        let (sf, sg) = (log_slope("f", &f, x)?, log_slope("g", &g, x)?);
        let gap = sf - sg;
        out.min_log_slope_gap = out.min_log_slope_gap.min(gap);
        // equal slopes must not fail on difference-quotient rounding
        if gap < -SLOPE_TOLERANCE * (sf.abs() + sg.abs()) {
            out.moderates = false;
        }
        if positive("f", x, f(x))? < positive("g", x, g(x))? {
            out.dominates_on_grid = false;
        }
    }
    Ok(out)
}

/// Bound on the fraction of a small cap left uncovered by one d-close big cap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OmegaBound {
    /// `3 ln^2 n >= n`: the small cap is covered entirely and both forms are 0.
    pub trivial: bool,
    /// `(1/(4 ln n)) (1 - 3 ln^2 n / n)^{(n-1)/2}`.
    pub exact: LogScale,
    /// `(1/(4 ln n)) exp(-(3/2) ln^2 n)`.
    pub relaxed: LogScale,
}

pub fn uncovered_fraction_bound(n: usize) -> Result<OmegaBound> {
    if n < 3 {
        return Err(invalid("omega is defined for n >= 3"));
    }
    let nf = n as f64;
    let ln = nf.ln();
    let t = 3.0 * ln * ln / nf;
    if t >= 1.0 {
        return Ok(OmegaBound {
            trivial: true,
            exact: LogScale::ZERO,
            relaxed: LogScale::ZERO,
        });
    }
    let pre = -(4.0 * ln).ln();
    Ok(OmegaBound {
        trivial: false,
        exact: LogScale::from_ln(pre + 0.5 * (nf - 1.0) * (-t).ln_1p()),
        relaxed: LogScale::from_ln(pre - 1.5 * ln * ln),
    })
}

/// Certificate quantities for centers with few d-close caps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BadCenterBounds {
    /// `ln(e lambda q ln n) / q`.
    pub h_n: f64,
    /// `h_n - (5 - ln 12)/2`.
    pub psi: f64,
    /// `ln` of the bound `exp(n h_n - lambda n ln n)` on the bad-center probability.
    pub ln_p_bound: f64,
    /// `ln` of `2 exp(n psi)`, the bound on `N' / N`.
    pub ln_bad_ratio: f64,
    /// `N' / N < 2^{-n/4}`.
    pub quarter_power_holds: bool,
    /// `psi(n + 1) < psi(n)`.
    pub psi_declines: bool,
    /// `n < 100`: outside the range the certificate is claimed for.
    pub advisory: bool,
}

fn require_two_level(params: &ParamSet) -> Result<(f64, f64)> {
    if params.mode != Mode::V2 {
        return Err(Error::Schedule(format!(
            "center certificates use the v2 schedule, got {}",
            params.mode
        )));
    }
    let q = params.q.ok_or_else(|| Error::Schedule("missing q".into()))?;
    Ok((params.lambda, q))
}

/// `h_n` and `psi` from the finite two-level schedule at a real `n`.
pub fn psi_of(n: f64) -> (f64, f64) {
    let (ln, lnln) = logs(n);
    let beta = 0.5 + 2.0 * lnln / ln;
    let lambda = beta + 5.0 / (2.0 * ln);
    let q = 3.0 * lnln;
    let h = (E * lambda * q * ln).ln() / q;
    (h, h - (5.0 - 12f64.ln()) / 2.0)
}

pub fn phi_of(n: f64) -> f64 {
    let (ln, lnln) = logs(n);
    ln + lnln - 4f64.ln() / (3.0 * lnln) - ln * ln / (2.0 * lnln) + LN_2 - 1.0 / 3.0
}

pub fn bad_center_breakdown(n: usize, params: &ParamSet) -> Result<BadCenterBounds> {
    let (lambda, q) = require_two_level(params)?;
    if params.n != n {
        return Err(invalid(format!("parameters are for n = {}, not {n}", params.n)));
    }
    let nf = n as f64;
    let ln = nf.ln();
    let h_n = (E * lambda * q * ln).ln() / q;
    let psi = h_n - (5.0 - 12f64.ln()) / 2.0;
    let ln_bad_ratio = LN_2 + nf * psi;
    Ok(BadCenterBounds {
        h_n,
        psi,
        ln_p_bound: nf * h_n - lambda * nf * ln,
        ln_bad_ratio,
        quarter_power_holds: ln_bad_ratio < -nf / 4.0 * LN_2,
        psi_declines: psi_of(nf + 1.0).1 < psi,
        advisory: n < 100,
    })
}

/// Certificate quantities for uncovered net centers inside well-covered caps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoodCenterBounds {
    pub phi: f64,
    /// `ln` of `2 exp(n phi)`, the bound on `N'' / N`.
    pub ln_good_ratio: f64,
    /// `N'' / N < 2^{-n/2}`.
    pub half_power_holds: bool,
    pub advisory: bool,
}

pub fn good_center_breakdown(n: usize, params: &ParamSet) -> Result<GoodCenterBounds> {
    require_two_level(params)?;
    if params.n != n {
        return Err(invalid(format!("parameters are for n = {}, not {n}", params.n)));
    }
    let nf = n as f64;
    let phi = phi_of(nf);
    let ln_good_ratio = LN_2 + nf * phi;
    Ok(GoodCenterBounds {
        phi,
        ln_good_ratio,
        half_power_holds: ln_good_ratio < -nf / 2.0 * LN_2,
        advisory: n < 100,
    })
}

/// All bound values and certificates at one `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundBreakdown {
    pub n: usize,
    pub delta_star: f64,
    pub delta_fixpoint: f64,
    pub rogers_ball: f64,
    pub prior_sphere: f64,
    pub new_sphere: f64,
    pub asymptotic: f64,
    pub refined: f64,
    pub lower: Option<f64>,
    pub omega: OmegaBound,
    pub bad: BadCenterBounds,
    pub good: GoodCenterBounds,
}

/// Evaluates everything at `n` with the v2 schedule on a sphere of radius `r`.
pub fn breakdown(params: &ParamSet, c1: Option<f64>) -> Result<BoundBreakdown> {
    let n = params.n;
    let ev = |f| evaluate_bound(f, n, c1);
    Ok(BoundBreakdown {
        n,
        delta_star: ev(BoundFormula::Est0)?,
        delta_fixpoint: ev(BoundFormula::Eps5Fixpoint)?,
        rogers_ball: ev(BoundFormula::DBall)?,
        prior_sphere: ev(BoundFormula::DSphe)?,
        new_sphere: ev(BoundFormula::DSph)?,
        asymptotic: ev(BoundFormula::SphAs)?,
        refined: ev(BoundFormula::Ref)?,
        lower: match c1 {
            Some(_) => Some(ev(BoundFormula::Lower)?),
            None => None,
        },
        omega: uncovered_fraction_bound(n)?,
        bad: bad_center_breakdown(n, params)?,
        good: good_center_breakdown(n, params)?,
    })
}
