use super::SphereSpec;
use crate::error::{invalid, Error, Result};
use crate::schedule::ParamSet;

/// Geometry of a small cap `C(mu', Z)` partly covered by a d-close big cap
/// `C(rho, Y)`, at the worst admissible placement `r sin(angle(Y, Z)) = d`.
///
/// `A` is the base center of the small cap, `B` that of the big cap and `N`
/// the center of the base of the uncovered segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntersectionGeometry {
    /// Distance from `A` to the axis through the origin and `Y`.
    pub sigma_a: f64,
    /// `sqrt(rho^2 - mu'^2)`; never smaller than `rho - mu^2`.
    pub d_bn: f64,
    /// `d_bn - sigma_a`; never smaller than `eps`.
    pub d_an: f64,
    /// `d_an / mu'` clamped to `[0, 1]`.
    pub cos_alpha: f64,
    /// `eps / mu'` clamped to `[0, 1]`, the schedule-level floor of `cos_alpha`.
    pub cos_alpha_floor: f64,
    /// Half-angle of the uncovered cap on the boundary sphere of the base.
    pub alpha_uncovered: f64,
    /// `eps >= mu'`: the small cap is covered entirely.
    pub trivial: bool,
}

pub fn intersection_geometry(
    spec: &SphereSpec,
    rho: f64,
    mu_layer: f64,
    params: &ParamSet,
) -> Result<IntersectionGeometry> {
    let mu = params.require_mu("intersection geometry")?;
    let d = params.require_d("intersection geometry")?;
    let eps = params.epsilon;
    let r = spec.r();
    if !(mu_layer > 0.0 && mu_layer <= mu) {
        return Err(invalid(format!("layer half-chord must lie in (0, mu = {mu}], got {mu_layer}")));
    }
    if !(rho > mu_layer && rho < r) {
        return Err(invalid(format!("rho must lie in (mu', r), got {rho}")));
    }
    if 2.0 * rho - 1.0 < mu * mu {
        return Err(Error::Schedule(format!(
            "2 rho - 1 = {} is below mu^2 = {}",
            2.0 * rho - 1.0,
            mu * mu
        )));
    }
    let sigma_a = d * ((r - mu_layer) * (r + mu_layer)).sqrt() / r;
    let d_bn = ((rho - mu_layer) * (rho + mu_layer)).sqrt();
    let d_an = d_bn - sigma_a;
    let trivial = eps >= mu_layer;
    let cos_alpha = (d_an / mu_layer).clamp(0.0, 1.0);
    let cos_alpha_floor = (eps / mu_layer).clamp(0.0, 1.0);
    let alpha_uncovered = if trivial { 0.0 } else { cos_alpha.acos() };
    Ok(IntersectionGeometry {
        sigma_a,
        d_bn,
        d_an,
        cos_alpha,
        cos_alpha_floor,
        alpha_uncovered,
        trivial,
    })
}
