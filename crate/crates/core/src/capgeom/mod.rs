//! Geometry of spherical caps on `S_r^n`.
//!
//! A cap `C(rho, y)` is the set of points of the sphere within central angle
//! `alpha = asin(rho / r)` of the center `y`; equivalently the intersection of
//! the sphere with a ball of radius `rho` around the base center. Membership
//! is closed: boundary points belong to the cap.

mod intersection;
mod measure;
mod sample;

pub use intersection::{intersection_geometry, IntersectionGeometry};
pub use measure::{cap_fraction, cap_fraction_upper, cap_ratio_lower, ln_cap_fraction_upper, CapMeasure};
pub use sample::{uniform_cap_point, uniform_sphere_point};
pub(crate) use sample::{fill_uniform_unit, unit_in_cap};

use crate::error::{invalid, Error, Result};

/// Absolute slack, in radians, granted to the closed angular comparison.
pub const ANGLE_TOLERANCE: f64 = 1e-12;

/// Cosine band around the threshold inside which the stable angle formula is
/// used instead of the raw inner product.
const COS_WINDOW: f64 = 1e-9;

/// Relative tolerance on the radius norm of a surface point.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// The sphere `S_r^n = { z in R^{n+1} : |z| = r }`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereSpec {
    n: usize,
    r: f64,
}

impl SphereSpec {
    pub fn new(n: usize, r: f64) -> Result<Self> {
        if n < 1 {
            return Err(invalid("sphere dimension n must be >= 1"));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(invalid(format!("sphere radius must be positive, got {r}")));
        }
        Ok(SphereSpec { n, r })
    }

    /// A sphere the covering constructions accept: `n >= 3`, `r > 1`.
    pub fn for_construction(n: usize, r: f64) -> Result<Self> {
        let s = Self::new(n, r)?;
        s.require_construction()?;
        Ok(s)
    }

    pub fn require_construction(&self) -> Result<()> {
        if self.n < 3 {
            return Err(invalid(format!("constructions need n >= 3, got {}", self.n)));
        }
        if self.r <= 1.0 {
            return Err(invalid(format!("constructions need r > 1, got {}", self.r)));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Number of coordinates of a point, `n + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    pub fn same_sphere(&self, other: &SphereSpec) -> bool {
        self.n == other.n && (self.r - other.r).abs() <= 1e-12 * self.r.max(other.r)
    }

    /// Half-angle `asin(rho / r)` of a cap with half-chord `rho`.
    pub fn half_angle(&self, half_chord: f64) -> Result<f64> {
        if !(half_chord > 0.0 && half_chord <= self.r) {
            return Err(invalid(format!(
                "half-chord must lie in (0, r = {}], got {half_chord}",
                self.r
            )));
        }
        Ok((half_chord / self.r).min(1.0).asin())
    }
}

/// A point on a sphere. Coordinates are renormalised to radius `r` on
/// construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePoint {
    sphere: SphereSpec,
    coords: Vec<f64>,
}

impl SurfacePoint {
    /// Projects `coords` radially onto the sphere.
    pub fn new(sphere: SphereSpec, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != sphere.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: sphere.ambient_dim(),
                found: coords.len(),
            });
        }
        let norm = norm(&coords);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(invalid("cannot project the zero vector onto the sphere"));
        }
        let scale = sphere.r / norm;
        Ok(SurfacePoint {
            sphere,
            coords: coords.into_iter().map(|c| c * scale).collect(),
        })
    }

    /// Builds a point from coordinates already on the sphere, rejecting them
    /// when the norm is off by more than the relative tolerance.
    pub fn on_sphere(sphere: SphereSpec, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != sphere.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: sphere.ambient_dim(),
                found: coords.len(),
            });
        }
        let nrm = norm(&coords);
        if (nrm - sphere.r).abs() > NORM_TOLERANCE * sphere.r {
            return Err(invalid(format!(
                "point norm {nrm} differs from sphere radius {}",
                sphere.r
            )));
        }
        Ok(SurfacePoint { sphere, coords })
    }

    pub(crate) fn from_unit(sphere: SphereSpec, unit: &[f64]) -> Self {
        debug_assert_eq!(unit.len(), sphere.ambient_dim());
        let nrm = norm(unit);
        let scale = sphere.r / nrm;
        SurfacePoint {
            sphere,
            coords: unit.iter().map(|c| c * scale).collect(),
        }
    }

    /// The point `r * e_axis`.
    pub fn pole(sphere: SphereSpec, axis: usize) -> Result<Self> {
        if axis >= sphere.ambient_dim() {
            return Err(invalid(format!("axis {axis} out of range")));
        }
        let mut coords = vec![0.0; sphere.ambient_dim()];
        coords[axis] = sphere.r;
        Ok(SurfacePoint { sphere, coords })
    }

    pub fn sphere(&self) -> &SphereSpec {
        &self.sphere
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn unit(&self) -> Vec<f64> {
        let nrm = norm(&self.coords);
        self.coords.iter().map(|c| c / nrm).collect()
    }

    pub(crate) fn scaled(&self, sphere: SphereSpec, factor: f64) -> SurfacePoint {
        SurfacePoint {
            sphere,
            coords: self.coords.iter().map(|c| c * factor).collect(),
        }
    }

    /// Central angle to another point on the same sphere.
    pub fn angle_to(&self, other: &SurfacePoint) -> Result<f64> {
        self.check_same_sphere(other)?;
        Ok(central_angle(&self.coords, &other.coords))
    }

    fn check_same_sphere(&self, other: &SurfacePoint) -> Result<()> {
        if self.coords.len() != other.coords.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coords.len(),
                found: other.coords.len(),
            });
        }
        if !self.sphere.same_sphere(&other.sphere) {
            return Err(Error::SphereMismatch);
        }
        Ok(())
    }
}

/// A spherical cap `C(rho, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cap {
    center: SurfacePoint,
    half_chord: f64,
    half_angle: f64,
}

impl Cap {
    pub fn new(center: SurfacePoint, half_chord: f64) -> Result<Self> {
        let half_angle = center.sphere.half_angle(half_chord)?;
        Ok(Cap {
            center,
            half_chord,
            half_angle,
        })
    }

    pub fn center(&self) -> &SurfacePoint {
        &self.center
    }

    pub fn half_chord(&self) -> f64 {
        self.half_chord
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    pub fn sphere(&self) -> &SphereSpec {
        &self.center.sphere
    }
}

/// Closed membership test: `angle(p, center) <= alpha`.
pub fn cap_contains(cap: &Cap, p: &SurfacePoint) -> Result<bool> {
    cap.center.check_same_sphere(p)?;
    let ball = AngularBall::new(cap.half_angle);
    Ok(ball.contains_unit(&cap.center.unit(), &p.unit()))
}

/// `y` and `z` are d-close when their central angle is at most `asin(d / r)`.
pub fn is_d_close(y: &SurfacePoint, z: &SurfacePoint, d: f64, spec: &SphereSpec) -> Result<bool> {
    if !(d > 0.0 && d < spec.r) {
        return Err(invalid(format!("d must lie in (0, r = {}), got {d}", spec.r)));
    }
    if !y.sphere.same_sphere(spec) {
        return Err(Error::SphereMismatch);
    }
    y.check_same_sphere(z)?;
    let ball = AngularBall::new((d / spec.r).asin());
    Ok(ball.contains_unit(&y.unit(), &z.unit()))
}

/// Center `x` of the unit ball whose intersection with the sphere is the
/// unit cap `C(1, y)`; `|x| = sqrt(r^2 - 1)`.
pub fn ball_center(cap: &Cap) -> Result<Vec<f64>> {
    let r = cap.sphere().r;
    if (cap.half_chord - 1.0).abs() > 1e-12 {
        return Err(invalid(format!(
            "ball_center needs a cap of half-chord 1, got {}",
            cap.half_chord
        )));
    }
    if r <= 1.0 {
        return Err(invalid(format!("ball_center needs r > 1, got {r}")));
    }
    let scale = (r * r - 1.0).sqrt() / r;
    Ok(cap.center.coords.iter().map(|c| c * scale).collect())
}

/// Closed angular ball used by every membership test in the crate.
#[derive(Clone, Copy, Debug)]
pub(crate) struct AngularBall {
    alpha: f64,
    cos_alpha: f64,
}

impl AngularBall {
    pub(crate) fn new(alpha: f64) -> Self {
        AngularBall {
            alpha,
            cos_alpha: alpha.cos(),
        }
    }

    pub(crate) fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `a` and `b` must be unit vectors.
    #[inline]
    pub(crate) fn contains_unit(&self, a: &[f64], b: &[f64]) -> bool {
        if self.alpha < 0.0 {
            return false;
        }
        let c = dot(a, b);
        if c > self.cos_alpha + COS_WINDOW {
            true
        } else if c < self.cos_alpha - COS_WINDOW {
            false
        } else {
            central_angle_unit(a, b) <= self.alpha + ANGLE_TOLERANCE
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `2 atan2(|a - b|, |a + b|)` for unit vectors; accurate near 0 and pi.
pub(crate) fn central_angle_unit(a: &[f64], b: &[f64]) -> f64 {
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        diff += (x - y) * (x - y);
        sum += (x + y) * (x + y);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

pub(crate) fn central_angle(a: &[f64], b: &[f64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    let ua: Vec<f64> = a.iter().map(|x| x / na).collect();
    let ub: Vec<f64> = b.iter().map(|x| x / nb).collect();
    central_angle_unit(&ua, &ub)
}

/// The point at central angle `t` from `from` towards `toward`, on the same
/// sphere. Used to build boundary fixtures.
pub fn rotate_toward(from: &SurfacePoint, toward: &SurfacePoint, t: f64) -> Result<SurfacePoint> {
    from.check_same_sphere(toward)?;
    let u = from.unit();
    let w = toward.unit();
    let c = dot(&u, &w);
    let mut v: Vec<f64> = w.iter().zip(&u).map(|(wi, ui)| wi - c * ui).collect();
    let nv = norm(&v);
    if nv < 1e-14 {
        return Err(invalid("rotation direction is parallel to the start point"));
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let (s, co) = t.sin_cos();
    let coords: Vec<f64> = u.iter().zip(&v).map(|(ui, vi)| co * ui + s * vi).collect();
    Ok(SurfacePoint::from_unit(from.sphere, &coords))
}
