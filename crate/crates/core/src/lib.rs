//! Convex bodies in low dimension, operators on them, and empirical checks of
//! convex-geometric properties of those operators.

pub mod check;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod measures;
pub mod operators;
pub mod rng;

pub use error::{Error, Result};
pub use geometry::{Body, LinearMap, Point, Subspace};
