use rand::Rng;
use rand_distr::StandardNormal;

use super::{dot, Cap, SphereSpec, SurfacePoint};
use crate::special::ln_cap_fraction_angle;

/// Rejection sampling is used for the polar angle while its acceptance
/// probability stays above this value.
const MIN_ACCEPTANCE: f64 = 0.2;

/// Fills `buf` with a uniformly distributed unit vector.
pub(crate) fn fill_uniform_unit<R: Rng + ?Sized>(rng: &mut R, buf: &mut [f64]) {
    loop {
        let mut ss = 0.0;
        for x in buf.iter_mut() {
            *x = rng.sample(StandardNormal);
            ss += *x * *x;
        }
        if ss > 1e-300 {
            let inv = 1.0 / ss.sqrt();
            buf.iter_mut().for_each(|x| *x *= inv);
            return;
        }
    }
}

pub fn uniform_sphere_point<R: Rng + ?Sized>(spec: &SphereSpec, rng: &mut R) -> SurfacePoint {
    let mut buf = vec![0.0; spec.ambient_dim()];
    fill_uniform_unit(rng, &mut buf);
    SurfacePoint::from_unit(*spec, &buf)
}

pub fn uniform_cap_point<R: Rng + ?Sized>(cap: &Cap, rng: &mut R) -> SurfacePoint {
    let spec = *cap.sphere();
    let axis = cap.center().unit();
    let mut out = vec![0.0; axis.len()];
    unit_in_cap(&axis, cap.half_angle(), spec.n(), rng, &mut out);
    SurfacePoint::from_unit(spec, &out)
}

/// Writes into `out` a unit vector uniform on the cap of half-angle `alpha`
/// around the unit vector `axis`, on the sphere `S^n`.
pub(crate) fn unit_in_cap<R: Rng + ?Sized>(
    axis: &[f64],
    alpha: f64,
    n: usize,
    rng: &mut R,
    out: &mut [f64],
) {
    let t = sample_polar_angle(n, alpha, rng);
    // direction orthogonal to the axis
    loop {
        for x in out.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        let c = dot(out, axis);
        let mut ss = 0.0;
        for (x, a) in out.iter_mut().zip(axis) {
            *x -= c * a;
            ss += *x * *x;
        }
        if ss > 1e-24 {
            let inv = 1.0 / ss.sqrt();
            let (s, co) = t.sin_cos();
            for (x, a) in out.iter_mut().zip(axis) {
                *x = co * a + s * inv * *x;
            }
            return;
        }
    }
}

/// Draws `t` in `[0, alpha]` with density proportional to `sin^{n-1} t`.
pub(crate) fn sample_polar_angle<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> f64 {
    let m = (n - 1) as f64;
    let nf = n as f64;
    if m == 0.0 {
        return alpha * rng.random::<f64>();
    }
    let worst = m * (alpha.sin() / alpha).ln();
    if worst >= MIN_ACCEPTANCE.ln() {
        // proposal density proportional to t^{n-1}
        loop {
            let u: f64 = rng.random();
            let t = alpha * u.powf(1.0 / nf);
            if t == 0.0 {
                return t;
            }
            let accept = m * (t.sin() / t).ln();
            let v: f64 = rng.random();
            if v.ln() <= accept {
                return t;
            }
        }
    }
    inverse_cdf_angle(n, alpha, rng.random())
}

/// Bisection on the normalised cap-fraction CDF.
fn inverse_cdf_angle(n: usize, alpha: f64, u: f64) -> f64 {
    let total = ln_cap_fraction_angle(n, alpha).map(|v| v.ln()).unwrap_or(0.0);
    let target = total + u.max(f64::MIN_POSITIVE).ln();
    let (mut lo, mut hi) = (0.0, alpha);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        let f = ln_cap_fraction_angle(n, mid)
            .map(|v| v.ln())
            .unwrap_or(f64::NEG_INFINITY);
        if f < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * alpha {
            break;
        }
    }
    0.5 * (lo + hi)
}
