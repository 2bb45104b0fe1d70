//! Random polytopes in convex bodies.
//!
//! The crate estimates the expected volume deficit `vol(K) - E(K, n)` of the
//! convex hull of `n` uniform points in a convex body `K`, compares the
//! rescaled deficit with its affine-surface-area limit, and provides the
//! special functions and convolution-body tools needed to check the
//! ingredients of that limit numerically.
//!
//! Module map:
//! - [`bodies`]: convex bodies (ball, ellipsoid, box, simplex, H-polytope)
//! - [`sampling`]: splittable random streams and uniform sampling in bodies
//! - [`hull`]: hull membership, low-dimensional hull volumes, deficits
//! - [`estimator`]: Monte Carlo deficit estimates and convergence tables
//! - [`specialfn`]: gamma, ball volumes, cap volumes, limit constants
//! - [`convolution`]: covariogram, convolution bodies and their checks
//! - [`cli`]: experiment configuration and CSV output
//! - [`verify`]: verification suites behind `stochgeo verify`

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bodies;
pub mod cli;
pub mod convolution;
mod error;
pub mod estimator;
pub mod hull;
pub mod linalg;
pub mod lp;
pub mod sampling;
pub mod specialfn;
pub mod stats;
pub mod verify;

pub use bodies::{ConvexBody, Halfspace, Shape, SurfacePoint, Vector};
pub use error::{Error, Result};
pub use estimator::DeficitEstimate;
pub use hull::{HullSample, Membership};
pub use sampling::StreamKey;
