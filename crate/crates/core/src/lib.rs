//! Coverings of the sphere `S_r^n` by equal spherical caps: cap geometry,
//! parameter schedules, density bounds, randomized constructions and
//! coverage verification.

pub mod bounds;
pub mod capgeom;
pub mod construct;
pub mod error;
pub mod index;
pub mod io;
pub mod logscale;
pub mod net;
pub mod rng;
pub mod schedule;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use logscale::LogScale;
pub use rng::SeededRng;
