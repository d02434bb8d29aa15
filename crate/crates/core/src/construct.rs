//! Covering constructions: random base coverings, the single-level embedded
//! construction and the two-level construction.

use rayon::prelude::*;

use crate::capgeom::{fill_uniform_unit, SphereSpec, SurfacePoint};
use crate::error::{invalid, Error, Result};
use crate::index::CapIndex;
use crate::net::CubeNet;
use crate::rng::SeededRng;
use crate::schedule::{Mode, ParamSet};
use crate::special::ln_cap_fraction_angle;
use crate::verify::count_grid_uncovered;

/// Rounds of resampling before [`random_base_covering`] gives up.
const BASE_ROUNDS: usize = 5;

/// Where a covering came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub mode: String,
    pub seed: u64,
    pub parents: Vec<String>,
}

impl Provenance {
    pub fn new(mode: impl Into<String>, seed: u64) -> Self {
        Provenance {
            mode: mode.into(),
            seed,
            parents: Vec::new(),
        }
    }
}

/// Equal caps of one half-chord on one sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct Covering {
    sphere: SphereSpec,
    half_chord: f64,
    half_angle: f64,
    centers: Vec<SurfacePoint>,
    pub provenance: Provenance,
}

impl Covering {
    pub fn new(
        sphere: SphereSpec,
        half_chord: f64,
        centers: Vec<SurfacePoint>,
        provenance: Provenance,
    ) -> Result<Self> {
        let half_angle = sphere.half_angle(half_chord)?;
        for c in &centers {
            if !c.sphere().same_sphere(&sphere) {
                return Err(Error::SphereMismatch);
            }
        }
        Ok(Covering {
            sphere,
            half_chord,
            half_angle,
            centers,
            provenance,
        })
    }

    pub fn sphere(&self) -> &SphereSpec {
        &self.sphere
    }

    pub fn half_chord(&self) -> f64 {
        self.half_chord
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    pub fn centers(&self) -> &[SurfacePoint] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Short identifier used to name parents in provenance records.
    pub fn label(&self) -> String {
        format!(
            "{}/seed={}/n={}/r={}/h={}/count={}",
            self.provenance.mode,
            self.provenance.seed,
            self.sphere.n(),
            self.sphere.r(),
            self.half_chord,
            self.len()
        )
    }

    pub(crate) fn unit_rows(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * self.sphere.ambient_dim());
        for c in &self.centers {
            out.extend(c.unit());
        }
        out
    }

    /// Prefilter index over the caps shrunk by `margin` radians.
    pub fn index_shrunk(&self, margin: f64) -> CapIndex {
        CapIndex::new(self.unit_rows(), self.sphere.ambient_dim(), self.half_angle - margin)
    }

    pub fn index(&self) -> CapIndex {
        self.index_shrunk(0.0)
    }
}

fn sample_units(spec: &SphereSpec, count: usize, rng: &mut SeededRng) -> Vec<f64> {
    let dim = spec.ambient_dim();
    let mut out = vec![0.0; count * dim];
    for row in out.chunks_mut(dim) {
        fill_uniform_unit(rng, row);
    }
    out
}

fn points_from_units(spec: &SphereSpec, units: &[f64]) -> Vec<SurfacePoint> {
    units
        .chunks(spec.ambient_dim())
        .map(|u| SurfacePoint::from_unit(*spec, u))
        .collect()
}

/// Number of uniform caps that leave a net of `net_size` points uncovered
/// with probability at most `fail_prob`, when each cap hits a point with
/// probability `exp(ln_theta)`.
pub fn base_sample_size(net_size: u64, fail_prob: f64, ln_theta: f64) -> Result<usize> {
    let miss = -(-ln_theta.exp()).ln_1p();
    if !(miss > 0.0) {
        return Err(Error::Construction("base cap fraction underflows".into()));
    }
    let m = (((net_size as f64).ln() - fail_prob.ln()) / miss).ceil();
    if !(m.is_finite() && m < 1e10) {
        return Err(Error::Construction(format!("base covering would need {m} caps")));
    }
    Ok((m as usize).max(2))
}

/// Random covering of `spec` by caps of half-chord `rho_b`, certified on a
/// cube-facet check-net of angle `alpha_b / 4`.
pub fn random_base_covering(
    spec: &SphereSpec,
    rho_b: f64,
    fail_prob: f64,
    rng: &mut SeededRng,
) -> Result<Covering> {
    if !(fail_prob > 0.0 && fail_prob < 1.0) {
        return Err(invalid(format!("failure probability must lie in (0, 1), got {fail_prob}")));
    }
    let alpha = spec.half_angle(rho_b)?;
    let eta = alpha / 4.0;
    let net = CubeNet::with_angle(spec.n(), eta)?;
    let ln_theta = ln_cap_fraction_angle(spec.n(), alpha - eta)?.ln();
    let mut count = base_sample_size(net.len(), fail_prob, ln_theta)?;
    let mut last_uncovered = 0;
    for _ in 0..BASE_ROUNDS {
        let units = sample_units(spec, count, rng);
        let cov = Covering::new(
            *spec,
            rho_b,
            points_from_units(spec, &units),
            Provenance::new("random-base", rng.seed()),
        )?;
        let idx = CapIndex::new(units, spec.ambient_dim(), alpha - eta);
        last_uncovered = count_grid_uncovered(&idx, &net).0;
        if last_uncovered == 0 {
            return Ok(cov);
        }
        count *= 2;
    }
    Err(Error::Construction(format!(
        "random base covering of S^{} (r = {}, rho = {rho_b}) left {last_uncovered} of {} net points uncovered after {BASE_ROUNDS} rounds",
        spec.n(),
        spec.r(),
        net.len()
    )))
}

/// Maps a covering of `S_r` onto `S_{r factor}`.
pub fn rescale_covering(cov: &Covering, factor: f64) -> Result<Covering> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(invalid(format!("scale factor must be positive, got {factor}")));
    }
    if factor == 1.0 {
        return Ok(cov.clone());
    }
    let sphere = SphereSpec::new(cov.sphere.n(), cov.sphere.r() * factor)?;
    let centers = cov.centers.iter().map(|c| c.scaled(sphere, factor)).collect();
    let mut prov = Provenance::new("rescaled", cov.provenance.seed);
    prov.parents.push(cov.label());
    Covering::new(sphere, cov.half_chord * factor, centers, prov)
}

fn check_base(spec: &SphereSpec, cov: &Covering, half_chord: f64, what: &str) -> Result<()> {
    if !cov.sphere.same_sphere(spec) {
        return Err(Error::SphereMismatch);
    }
    if (cov.half_chord - half_chord).abs() > 1e-12 * half_chord {
        return Err(invalid(format!(
            "{what} has half-chord {}, the parameters need {half_chord}",
            cov.half_chord
        )));
    }
    Ok(())
}

fn check_params(spec: &SphereSpec, params: &ParamSet) -> Result<()> {
    spec.require_construction()?;
    if params.n != spec.n() || !params.sphere()?.same_sphere(spec) {
        return Err(invalid(format!(
            "parameters are for S^{} of radius {}, not S^{} of radius {}",
            params.n,
            params.r,
            spec.n(),
            spec.r()
        )));
    }
    Ok(())
}

/// Indices of the net centers of `eps` not covered by the random caps.
fn uncovered_centers(random: &CapIndex, cov_eps: &Covering) -> Vec<usize> {
    cov_eps
        .centers
        .par_iter()
        .enumerate()
        .filter_map(|(i, u)| random.first_containing(&u.unit()).is_none().then_some(i))
        .collect()
}

/// Output of [`embedded_cover`].
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedResult {
    /// Unit covering `X = {y} u {u_bar}`; the first `y_count` centers are random.
    pub covering: Covering,
    pub y_count: usize,
    /// Indices into the net covering of the centers the random caps missed.
    pub uncovered: Vec<usize>,
    pub uncovered_fraction: f64,
}

/// Single-level construction: `N` random `rho`-caps plus every net center
/// they miss, then every cap is enlarged to half-chord 1.
pub fn embedded_cover(
    spec: &SphereSpec,
    cov_eps: &Covering,
    params: &ParamSet,
    rng: &mut SeededRng,
) -> Result<EmbeddedResult> {
    if !matches!(params.mode, Mode::V1 | Mode::Engineering) {
        return Err(Error::Schedule(format!(
            "the embedded construction takes v1 or engineering parameters, got {}",
            params.mode
        )));
    }
    check_params(spec, params)?;
    check_base(spec, cov_eps, params.epsilon, "the net covering")?;
    let n_trials = params.trials.materialise()?;
    let units = sample_units(spec, n_trials, rng);
    let random = CapIndex::new(units.clone(), spec.ambient_dim(), spec.half_angle(params.rho)?);
    let uncovered = uncovered_centers(&random, cov_eps);

    let mut centers = points_from_units(spec, &units);
    centers.extend(uncovered.iter().map(|&i| cov_eps.centers[i].clone()));
    let mut prov = Provenance::new("embedded", rng.seed());
    prov.parents.push(cov_eps.label());
    let uncovered_fraction = if cov_eps.is_empty() {
        0.0
    } else {
        uncovered.len() as f64 / cov_eps.len() as f64
    };
    Ok(EmbeddedResult {
        covering: Covering::new(*spec, 1.0, centers, prov)?,
        y_count: n_trials,
        uncovered,
        uncovered_fraction,
    })
}

/// Split of the `mu`-net centers by how many d-close random caps they have.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    /// At most `s` d-close random caps.
    pub bad: Vec<usize>,
    pub good: Vec<usize>,
}

pub fn classify_centers(
    cov_mu: &Covering,
    y_centers: &[SurfacePoint],
    params: &ParamSet,
) -> Result<Classification> {
    let d = params.require_d("classification")?;
    let s = params.require_s("classification")? as usize;
    let spec = cov_mu.sphere;
    if let Some(y) = y_centers.iter().find(|y| !y.sphere().same_sphere(&spec)) {
        let _ = y;
        return Err(Error::SphereMismatch);
    }
    if !(d > 0.0 && d < spec.r()) {
        return Err(invalid(format!("d must lie in (0, r), got {d}")));
    }
    let mut units = Vec::with_capacity(y_centers.len() * spec.ambient_dim());
    for y in y_centers {
        units.extend(y.unit());
    }
    let close = CapIndex::new(units, spec.ambient_dim(), (d / spec.r()).asin());
    let bad_flags: Vec<bool> = cov_mu
        .centers
        .par_iter()
        .map(|z| close.count_containing(&z.unit(), s + 1) <= s)
        .collect();
    let mut out = Classification {
        bad: Vec::new(),
        good: Vec::new(),
    };
    for (i, bad) in bad_flags.into_iter().enumerate() {
        if bad {
            out.bad.push(i);
        } else {
            out.good.push(i);
        }
    }
    Ok(out)
}

/// Output of [`two_level_cover`]. Indices refer to the `mu`-net covering
/// unless noted.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoLevelResult {
    /// Unit covering `X = {y} u {z_bar}`; the first `y_count` centers are random.
    pub covering: Covering,
    pub y_count: usize,
    pub bad: Vec<usize>,
    /// `mu`-centers added to patch uncovered `eps`-centers, ascending.
    pub patched: Vec<usize>,
    /// Indices into the `eps`-net of the centers the random caps missed.
    pub uncovered_eps: Vec<usize>,
    pub n_prime_empirical: usize,
    /// Uncovered `eps`-centers lying in at least one good `mu`-cap.
    pub n_double_prime_empirical: usize,
    pub n_bar_empirical: usize,
    /// `{z_bar} within {z'} u {z_bar''}` and `|{z_bar''}| <= |{u_bar''}|`.
    pub set_algebra_holds: bool,
    pub params: ParamSet,
}

impl TwoLevelResult {
    pub fn y_centers(&self) -> &[SurfacePoint] {
        &self.covering.centers()[..self.y_count]
    }

    pub fn final_centers(&self) -> &[SurfacePoint] {
        self.covering.centers()
    }
}

/// Two-level construction: `N` random `rho`-caps; every `eps`-net center
/// they miss is patched by the lowest-index `mu`-cap containing it; all kept
/// caps are then enlarged to half-chord 1.
pub fn two_level_cover(
    spec: &SphereSpec,
    cov_mu: &Covering,
    cov_eps: &Covering,
    params: &ParamSet,
    rng: &mut SeededRng,
) -> Result<TwoLevelResult> {
    if params.mode == Mode::V1 {
        return Err(Error::Schedule("the two-level construction needs mu, d and s".into()));
    }
    check_params(spec, params)?;
    let mu = params.require_mu("two-level construction")?;
    if mu + params.epsilon > 1.0 {
        return Err(invalid(format!(
            "mu + eps = {} exceeds 1; enlarged caps would not cover",
            mu + params.epsilon
        )));
    }
    check_base(spec, cov_mu, mu, "the mu covering")?;
    check_base(spec, cov_eps, params.epsilon, "the eps covering")?;
    let n_trials = params.trials.materialise()?;
    let dim = spec.ambient_dim();

    let units = sample_units(spec, n_trials, rng);
    let random = CapIndex::new(units.clone(), dim, spec.half_angle(params.rho)?);
    let uncovered_eps = uncovered_centers(&random, cov_eps);

    let mu_index = cov_mu.index();
    let owners: Vec<Option<usize>> = uncovered_eps
        .par_iter()
        .map(|&i| mu_index.min_index_containing(&cov_eps.centers[i].unit()))
        .collect();
    let mut patched = Vec::with_capacity(owners.len());
    for (k, owner) in owners.iter().enumerate() {
        match owner {
            Some(z) => patched.push(*z),
            None => {
                return Err(Error::Construction(format!(
                    "eps-center {} lies in no cap of the mu covering",
                    uncovered_eps[k]
                )))
            }
        }
    }
    patched.sort_unstable();
    patched.dedup();

    let y_points = points_from_units(spec, &units);
    let class = classify_centers(cov_mu, &y_points, params)?;

    // uncovered eps-centers inside some good mu-cap
    let mut is_good = vec![false; cov_mu.len()];
    for &g in &class.good {
        is_good[g] = true;
    }
    let good_units: Vec<f64> = class
        .good
        .iter()
        .flat_map(|&g| cov_mu.centers[g].unit())
        .collect();
    let good_index = CapIndex::new(good_units, dim, cov_mu.half_angle);
    let n_double_prime = uncovered_eps
        .par_iter()
        .filter(|&&i| good_index.first_containing(&cov_eps.centers[i].unit()).is_some())
        .count();

    let n_bar = patched.len();
    let patched_bad = patched.iter().filter(|&&z| !is_good[z]).count();
    let patched_good = n_bar - patched_bad;
    let set_algebra_holds = patched_bad <= class.bad.len() && patched_good <= n_double_prime;

    let mut centers = y_points;
    centers.extend(patched.iter().map(|&z| cov_mu.centers[z].clone()));
    let mut prov = Provenance::new("two-level", rng.seed());
    prov.parents.push(cov_mu.label());
    prov.parents.push(cov_eps.label());
    Ok(TwoLevelResult {
        covering: Covering::new(*spec, 1.0, centers, prov)?,
        y_count: n_trials,
        n_prime_empirical: class.bad.len(),
        bad: class.bad,
        patched,
        uncovered_eps,
        n_double_prime_empirical: n_double_prime,
        n_bar_empirical: n_bar,
        set_algebra_holds,
        params: params.clone(),
    })
}
