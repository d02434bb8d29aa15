//! Coverage certification on nets, Monte Carlo coverage estimates, density
//! measurement and the empirical check of the small-cap uncovered fraction.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::bounds::uncovered_fraction_bound;
use crate::capgeom::{
    cap_fraction, fill_uniform_unit, intersection_geometry, unit_in_cap, AngularBall, SphereSpec,
    ANGLE_TOLERANCE,
};
use crate::construct::Covering;
use crate::error::{invalid, Error, Result};
use crate::index::CapIndex;
use crate::net::CubeNet;
use crate::rng::SeededRng;
use crate::schedule::{Mode, ParamSet};
use crate::special::ln_cap_fraction_angle;

/// Samples drawn from one derived stream.
pub const SHARD_SIZE: u64 = 65_536;
/// Two-sided level of the reported intervals.
pub const CONFIDENCE: f64 = 0.99;
/// Binomial standard deviations allowed above a bound in the lemma check.
pub const LEMMA_SIGMAS: f64 = 4.0;

const NET_BLOCK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VerificationMode {
    Net,
    MonteCarlo,
    LemmaLower,
}

impl VerificationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerificationMode::Net => "net",
            VerificationMode::MonteCarlo => "monte_carlo",
            VerificationMode::LemmaLower => "lemma_lower",
        }
    }
}

impl fmt::Display for VerificationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VerificationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "net" => Ok(VerificationMode::Net),
            "monte_carlo" => Ok(VerificationMode::MonteCarlo),
            "lemma_lower" => Ok(VerificationMode::LemmaLower),
            other => Err(invalid(format!("unknown verification mode '{other}'"))),
        }
    }
}

/// Outcome of one verification. `passed` is always
/// `uncovered_fraction_estimate <= threshold`.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub mode: VerificationMode,
    pub samples_or_net_size: u64,
    pub uncovered_count: u64,
    pub uncovered_fraction_estimate: f64,
    pub confidence_interval: (f64, f64),
    /// Smallest angular slack over the net; `-inf` if some point is in no cap.
    pub margin: Option<f64>,
    pub margin_required: Option<f64>,
    pub density: Option<f64>,
    pub threshold: f64,
    pub passed: bool,
}

impl VerificationReport {
    pub(crate) fn from_counts(
        mode: VerificationMode,
        total: u64,
        uncovered: u64,
        threshold: f64,
    ) -> Result<Self> {
        let estimate = if total == 0 {
            0.0
        } else {
            uncovered as f64 / total as f64
        };
        let interval = if total == 0 {
            (0.0, 1.0)
        } else {
            clopper_pearson(uncovered, total, CONFIDENCE)?
        };
        Ok(VerificationReport {
            mode,
            samples_or_net_size: total,
            uncovered_count: uncovered,
            uncovered_fraction_estimate: estimate,
            confidence_interval: interval,
            margin: None,
            margin_required: None,
            density: None,
            threshold,
            passed: estimate <= threshold,
        })
    }
}

/// Exact two-sided binomial interval for `k` successes in `n` trials.
pub fn clopper_pearson(k: u64, n: u64, confidence: f64) -> Result<(f64, f64)> {
    if n == 0 || k > n {
        return Err(invalid(format!("need 0 <= k <= n and n >= 1, got k = {k}, n = {n}")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    let tail = (1.0 - confidence) / 2.0;
    let (kf, nf) = (k as f64, n as f64);
    let beta = |a: f64, b: f64, p: f64| -> Result<f64> {
        Beta::new(a, b)
            .map(|d| d.inverse_cdf(p))
            .map_err(|e| Error::Numerical(format!("beta quantile: {e}")))
    };
    let lower = if k == 0 {
        0.0
    } else if k == n {
        tail.powf(1.0 / nf)
    } else {
        beta(kf, nf - kf + 1.0, tail)?
    };
    let upper = if k == n {
        1.0
    } else if k == 0 {
        1.0 - tail.powf(1.0 / nf)
    } else {
        beta(kf + 1.0, nf - kf, 1.0 - tail)?
    };
    Ok((lower, upper))
}

/// `|centers| * theta` of the common cap.
pub fn measured_density(cov: &Covering) -> Result<f64> {
    Ok(cov.len() as f64 * cap_fraction(cov.sphere(), cov.half_chord())?.theta)
}

/// `ln` of [`measured_density`]; finite when the cap fraction underflows.
pub fn ln_measured_density(cov: &Covering) -> Result<f64> {
    let m = cap_fraction(cov.sphere(), cov.half_chord())?;
    Ok((cov.len() as f64).ln() + m.ln_theta)
}

/// Counts points of a streamed point set not covered by `idx`.
///
/// With `margin = Some(m)` a point counts as covered only if some cap
/// contains it with angular slack at least `m`, and the minimum best slack is
/// returned too; otherwise plain membership is tested.
fn count_uncovered<F>(idx: &CapIndex, dim: usize, total: u64, margin: Option<f64>, fill: F) -> (u64, Option<f64>)
where
    F: Fn(u64, &mut [f64]) + Sync,
{
    let blocks = total.div_ceil(NET_BLOCK);
    let (count, slack) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut buf = vec![0.0; dim];
            let mut count = 0u64;
            let mut min_slack = f64::INFINITY;
            for i in b * NET_BLOCK..((b + 1) * NET_BLOCK).min(total) {
                fill(i, &mut buf);
                match margin {
                    None => {
                        if idx.first_containing(&buf).is_none() {
                            count += 1;
                        }
                    }
                    Some(m) => {
                        let s = idx.best_slack(&buf).map_or(f64::NEG_INFINITY, |(_, s)| s);
                        min_slack = min_slack.min(s);
                        if s < m - ANGLE_TOLERANCE {
                            count += 1;
                        }
                    }
                }
            }
            (count, min_slack)
        })
        .reduce(|| (0, f64::INFINITY), |a, b| (a.0 + b.0, a.1.min(b.1)));
    (count, margin.map(|_| slack))
}

/// Uncovered points of a cube net under `idx` (plain membership).
pub(crate) fn count_grid_uncovered(idx: &CapIndex, net: &CubeNet) -> (u64, Option<f64>) {
    count_uncovered(idx, net.dim(), net.len(), None, |i, out| net.fill(i, out))
}

fn net_report(cov: &Covering, total: u64, uncovered: u64, slack: Option<f64>, margin: f64) -> Result<VerificationReport> {
    let mut rep = VerificationReport::from_counts(VerificationMode::Net, total, uncovered, 0.0)?;
    rep.margin = slack.map(|s| if total == 0 { 0.0 } else { s });
    rep.margin_required = Some(margin);
    rep.density = Some(measured_density(cov)?);
    Ok(rep)
}

/// Certifies `cov` on the centers of `net`: every net center must lie in
/// some cap of `cov` shrunk by `margin_required`, which must be at least the
/// angular radius of the net caps. Passing implies the unshrunk caps cover
/// the whole sphere.
pub fn verify_net(cov: &Covering, net: &Covering, margin_required: f64) -> Result<VerificationReport> {
    if !cov.sphere().same_sphere(net.sphere()) {
        return Err(Error::SphereMismatch);
    }
    let eta = net.half_angle();
    if !(margin_required >= eta) {
        return Err(invalid(format!(
            "margin {margin_required} is below the net radius {eta}; the certificate would be unsound"
        )));
    }
    let dim = cov.sphere().ambient_dim();
    let idx = cov.index();
    let rows = net.unit_rows();
    let (uncovered, slack) = count_uncovered(&idx, dim, net.len() as u64, Some(margin_required), |i, out| {
        let i = i as usize;
        out.copy_from_slice(&rows[i * dim..(i + 1) * dim]);
    });
    net_report(cov, net.len() as u64, uncovered, slack, margin_required)
}

/// As [`verify_net`], on a cube-facet net whose covering angle must not
/// exceed `margin_required`.
pub fn verify_grid(cov: &Covering, net: &CubeNet, margin_required: f64) -> Result<VerificationReport> {
    if net.dim() != cov.sphere().ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: cov.sphere().ambient_dim(),
            found: net.dim(),
        });
    }
    if !(margin_required >= net.covering_angle()) {
        return Err(invalid(format!(
            "margin {margin_required} is below the net covering angle {}",
            net.covering_angle()
        )));
    }
    let idx = cov.index();
    let (uncovered, slack) = count_uncovered(&idx, net.dim(), net.len(), Some(margin_required), |i, out| net.fill(i, out));
    net_report(cov, net.len(), uncovered, slack, margin_required)
}

/// Sums `per_shard(shard_rng, count)` over shards of [`SHARD_SIZE`] samples.
fn sharded_count<F>(rng: &SeededRng, samples: u64, per_shard: F) -> u64
where
    F: Fn(&mut SeededRng, u64) -> u64 + Sync,
{
    let shards = samples.div_ceil(SHARD_SIZE);
    (0..shards)
        .into_par_iter()
        .map(|s| {
            let count = SHARD_SIZE.min(samples - s * SHARD_SIZE);
            per_shard(&mut rng.shard(s), count)
        })
        .sum()
}

/// Uniform sphere points lying in no cap of `cov`. Advisory only: a zero
/// count does not certify coverage.
pub fn verify_monte_carlo(cov: &Covering, samples: u64, rng: &mut SeededRng) -> Result<VerificationReport> {
    if samples == 0 {
        return Err(invalid("Monte Carlo verification needs at least one sample"));
    }
    let dim = cov.sphere().ambient_dim();
    let idx = cov.index();
    let uncovered = sharded_count(rng, samples, |r, count| {
        let mut buf = vec![0.0; dim];
        (0..count)
            .filter(|_| {
                fill_uniform_unit(r, &mut buf);
                idx.first_containing(&buf).is_none()
            })
            .count() as u64
    });
    let mut rep = VerificationReport::from_counts(VerificationMode::MonteCarlo, samples, uncovered, 0.0)?;
    rep.density = Some(measured_density(cov)?);
    Ok(rep)
}

/// Bound the lemma check compares against, before statistical slack.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaBound {
    /// `eps >= mu`: the small cap must be covered entirely.
    pub trivial: bool,
    pub value: f64,
}

/// Relaxed `omega` under the v2 schedule; otherwise the exact fraction of the
/// boundary cap on `S^{n-1}` with `cos alpha = eps / mu`.
pub fn lemma_bound(params: &ParamSet) -> Result<LemmaBound> {
    let spec = params.sphere()?;
    let mu = params.require_mu("lemma check")?;
    let geo = intersection_geometry(&spec, params.rho, mu, params)?;
    if geo.trivial {
        return Ok(LemmaBound {
            trivial: true,
            value: 0.0,
        });
    }
    let value = if params.mode == Mode::V2 {
        uncovered_fraction_bound(params.n)?.relaxed.value()
    } else {
        ln_cap_fraction_angle(params.n - 1, geo.cos_alpha_floor.acos())?.value()
    };
    Ok(LemmaBound { trivial: false, value })
}

/// Samples uniform points of `C(mu, Z)` with `Z` at the worst admissible
/// angle from `Y` (`r sin angle = d`) and counts those outside `C(rho, Y)`.
pub fn lemma_lower_check(
    spec: &SphereSpec,
    params: &ParamSet,
    samples: u64,
    rng: &mut SeededRng,
) -> Result<VerificationReport> {
    let d = params.require_d("lemma check")?;
    if !(d > 0.0 && d < spec.r()) {
        return Err(invalid(format!("d must lie in (0, r), got {d}")));
    }
    lemma_lower_check_at(spec, params, samples, rng, (d / spec.r()).asin())
}

/// [`lemma_lower_check`] with an explicit angle between `Y` and `Z`. The
/// threshold is the same; beyond the d-close range it carries no guarantee.
pub fn lemma_lower_check_at(
    spec: &SphereSpec,
    params: &ParamSet,
    samples: u64,
    rng: &mut SeededRng,
    placement_angle: f64,
) -> Result<VerificationReport> {
    if !matches!(params.mode, Mode::V2 | Mode::Engineering) {
        return Err(Error::Schedule(format!(
            "the lemma check needs v2 or engineering parameters, got {}",
            params.mode
        )));
    }
    if params.n != spec.n() || !params.sphere()?.same_sphere(spec) {
        return Err(invalid("parameters and sphere disagree"));
    }
    if samples == 0 {
        return Err(invalid("the lemma check needs at least one sample"));
    }
    if !(0.0..=std::f64::consts::PI).contains(&placement_angle) {
        return Err(invalid(format!("placement angle must lie in [0, pi], got {placement_angle}")));
    }
    let mu = params.require_mu("lemma check")?;
    let bound = lemma_bound(params)?;
    let dim = spec.ambient_dim();
    let mut y = vec![0.0; dim];
    y[0] = 1.0;
    let mut z = vec![0.0; dim];
    z[0] = placement_angle.cos();
    z[1] = placement_angle.sin();
    let big = AngularBall::new(spec.half_angle(params.rho)?);
    let alpha_mu = spec.half_angle(mu)?;
    let n = spec.n();
    let outside = sharded_count(rng, samples, |r, count| {
        let mut buf = vec![0.0; dim];
        (0..count)
            .filter(|_| {
                unit_in_cap(&z, alpha_mu, n, r, &mut buf);
                !big.contains_unit(&y, &buf)
            })
            .count() as u64
    });
    let threshold = if bound.trivial {
        0.0
    } else {
        let p = bound.value.min(1.0);
        p + LEMMA_SIGMAS * (p * (1.0 - p) / samples as f64).sqrt()
    };
    VerificationReport::from_counts(VerificationMode::LemmaLower, samples, outside, threshold)
}
