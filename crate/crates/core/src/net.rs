//! Deterministic check-nets from the facets of the cube `[-1, 1]^{n+1}`.
//!
//! Each facet is split into `m^n` equal cells; the cell centers, projected
//! radially onto the sphere, are within angle `2 asin(sqrt(n) / (2m))` of
//! every sphere point (radial projection onto the unit ball is
//! non-expanding outside it). Points are generated on demand by index.

use crate::error::{invalid, Error, Result};

/// Largest net the library will stream.
pub const MAX_NET_POINTS: u64 = 200_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubeNet {
    n: usize,
    m: u64,
    per_facet: u64,
}

impl CubeNet {
    /// Net on `S^n` with `m` cells per facet edge.
    pub fn new(n: usize, m: u64) -> Result<Self> {
        if n < 1 || m < 1 {
            return Err(invalid("cube net needs n >= 1 and m >= 1"));
        }
        let per_facet = (m as u128).checked_pow(n as u32).filter(|&v| v <= u64::MAX as u128);
        match per_facet {
            Some(p) => {
                let total = p * 2 * (n as u128 + 1);
                if total > MAX_NET_POINTS as u128 {
                    return Err(Error::Construction(format!(
                        "check-net would have {total} points (limit {MAX_NET_POINTS})"
                    )));
                }
                Ok(CubeNet {
                    n,
                    m,
                    per_facet: p as u64,
                })
            }
            None => Err(Error::Construction(format!(
                "check-net with m = {m} on S^{n} is too large"
            ))),
        }
    }

    /// Smallest net whose covering angle is at most `eta`.
    pub fn with_angle(n: usize, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < std::f64::consts::PI) {
            return Err(invalid(format!("net angle must lie in (0, pi), got {eta}")));
        }
        let m = ((n as f64).sqrt() / (2.0 * (eta / 2.0).sin())).ceil().max(1.0);
        Self::new(n, m as u64)
    }

    pub fn len(&self) -> u64 {
        self.per_facet * 2 * (self.n as u64 + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cells_per_edge(&self) -> u64 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// Bound on the angle from any sphere point to the nearest net point.
    pub fn covering_angle(&self) -> f64 {
        let chord = (self.n as f64).sqrt() / self.m as f64;
        2.0 * (chord / 2.0).min(1.0).asin()
    }

    /// Writes the unit vector of net point `index` into `out`.
    pub fn fill(&self, index: u64, out: &mut [f64]) {
        debug_assert!(index < self.len());
        debug_assert_eq!(out.len(), self.n + 1);
        let facet = index / self.per_facet;
        let mut rest = index % self.per_facet;
        let axis = (facet / 2) as usize;
        let sign = if facet % 2 == 0 { 1.0 } else { -1.0 };
        let step = 2.0 / self.m as f64;
        let mut ss = 1.0;
        for (j, slot) in out.iter_mut().enumerate() {
            if j == axis {
                *slot = sign;
                continue;
            }
            let digit = rest % self.m;
            rest /= self.m;
            *slot = -1.0 + step * (digit as f64 + 0.5);
            ss += *slot * *slot;
        }
        let inv = 1.0 / ss.sqrt();
        out.iter_mut().for_each(|x| *x *= inv);
    }
}
