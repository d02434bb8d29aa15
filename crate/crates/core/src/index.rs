//! Spatial prefilter for "which caps contain this point" queries.
//!
//! Unit centers are projected onto a few fixed orthonormal directions and
//! bucketed in a hash grid whose cell width is the cap chord. Projection is
//! 1-Lipschitz, so every center within the chord of a query lies in one of
//! the `3^k` neighbouring cells; the exact angular test then decides.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::capgeom::{central_angle_unit, dot, fill_uniform_unit, AngularBall};

const MAX_AXES: usize = 4;
const FRAME_SEED: u64 = 0x5eed_f4a3_e000_0001;
/// Fewer bins per axis than this and the grid is not worth building.
const MIN_BINS: f64 = 3.0;

type Key = [i32; MAX_AXES];

pub struct CapIndex {
    dim: usize,
    units: Vec<f64>,
    ball: AngularBall,
    frame: Vec<Vec<f64>>,
    width: f64,
    cells: HashMap<Key, Vec<u32>>,
    offsets: Vec<Key>,
    linear: bool,
}

impl CapIndex {
    /// Index over unit vectors `units` (row-major, `dim` per row) for caps of
    /// angular radius `alpha`.
    pub fn new(units: Vec<f64>, dim: usize, alpha: f64) -> Self {
        assert!(dim > 0 && units.len() % dim == 0);
        assert!(units.len() / dim <= u32::MAX as usize);
        let ball = AngularBall::new(alpha);
        let k = dim.min(MAX_AXES);
        let frame = random_frame(dim, k);
        // chord of the cap plus room for the angular tolerance
        let width = 2.0 * (alpha.max(0.0) / 2.0 + 1e-9).min(std::f64::consts::FRAC_PI_2).sin();
        let linear = 2.0 / width < MIN_BINS || alpha < 0.0;
        let mut idx = CapIndex {
            dim,
            units,
            ball,
            frame,
            width,
            cells: HashMap::new(),
            offsets: neighbour_offsets(k),
            linear,
        };
        if !linear {
            let mut cells: HashMap<Key, Vec<u32>> = HashMap::new();
            for i in 0..idx.len() {
                cells.entry(idx.key(idx.row(i))).or_default().push(i as u32);
            }
            idx.cells = cells;
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.units.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.ball.alpha()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.units[i * self.dim..(i + 1) * self.dim]
    }

    fn key(&self, u: &[f64]) -> Key {
        let mut key = [0i32; MAX_AXES];
        for (slot, axis) in key.iter_mut().zip(&self.frame) {
            *slot = (dot(u, axis) / self.width).floor() as i32;
        }
        key
    }

    /// Calls `visit` on candidate indices, own cell first, until it returns
    /// `false`.
    fn scan(&self, p: &[f64], mut visit: impl FnMut(usize) -> bool) {
        if self.linear {
            for i in 0..self.len() {
                if !visit(i) {
                    return;
                }
            }
            return;
        }
        let base = self.key(p);
        for off in &self.offsets {
            let mut k = base;
            for (a, b) in k.iter_mut().zip(off) {
                *a += b;
            }
            if let Some(list) = self.cells.get(&k) {
                for &i in list {
                    if !visit(i as usize) {
                        return;
                    }
                }
            }
        }
    }

    /// Any center whose cap contains the unit vector `p`.
    pub fn first_containing(&self, p: &[f64]) -> Option<usize> {
        let mut found = None;
        self.scan(p, |i| {
            if self.ball.contains_unit(self.row(i), p) {
                found = Some(i);
                false
            } else {
                true
            }
        });
        found
    }

    /// Lowest index whose cap contains `p`.
    pub fn min_index_containing(&self, p: &[f64]) -> Option<usize> {
        let mut best: Option<usize> = None;
        self.scan(p, |i| {
            if best.is_none_or(|b| i < b) && self.ball.contains_unit(self.row(i), p) {
                best = Some(i);
            }
            true
        });
        best
    }

    /// Number of containing caps, counting stops at `limit`.
    pub fn count_containing(&self, p: &[f64], limit: usize) -> usize {
        let mut count = 0;
        if limit == 0 {
            return 0;
        }
        self.scan(p, |i| {
            if self.ball.contains_unit(self.row(i), p) {
                count += 1;
            }
            count < limit
        });
        count
    }

    /// Largest `alpha - angle` over containing caps, with the witness index.
    pub fn best_slack(&self, p: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        self.scan(p, |i| {
            let row = self.row(i);
            if self.ball.contains_unit(row, p) {
                let slack = self.ball.alpha() - central_angle_unit(row, p);
                if best.is_none_or(|(_, s)| slack > s) {
                    best = Some((i, slack));
                }
            }
            true
        });
        best
    }
}

fn random_frame(dim: usize, k: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(FRAME_SEED);
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(k);
    while frame.len() < k {
        let mut v = vec![0.0; dim];
        fill_uniform_unit(&mut rng, &mut v);
        for f in &frame {
            let c = dot(&v, f);
            v.iter_mut().zip(f).for_each(|(x, y)| *x -= c * y);
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            frame.push(v);
        }
    }
    frame
}

fn neighbour_offsets(k: usize) -> Vec<Key> {
    let mut out = vec![[0i32; MAX_AXES]];
    for axis in 0..k {
        let mut next = Vec::with_capacity(out.len() * 3);
        for d in [0, -1, 1] {
            for o in &out {
                let mut o = *o;
                o[axis] = d;
                next.push(o);
            }
        }
        out = next;
    }
    out
}
