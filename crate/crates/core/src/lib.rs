//! Numerical laboratory for area-preserving dynamics on the circle, annulus
//! and cylinder.
//!
//! * [`cover`]: lifts, projections and orbit iteration on `ℝ × I`.
//! * [`rotation`]: translation and rotation numbers, displacement, mean
//!   translation, rotation intervals.
//! * [`systems`]: the standard map family, rigid rotations and convex billiards.
//! * [`orbits`]: `(p, q)` periodic orbits by Newton's method and by chord
//!   length maximisation, plus an existence audit over rationals.
//! * [`manifolds`]: stable/unstable manifolds of saddles, rasterised
//!   instability sets, Hausdorff comparison and homoclinic detection.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cover;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod manifolds;
pub mod orbits;
pub mod rotation;
pub mod systems;

pub use cover::{CoverPoint, CylinderPoint, LiftedMap};
pub use error::{Error, Result};
