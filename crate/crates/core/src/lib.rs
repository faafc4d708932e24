//! Numerical potential theory on bounded planar domains.
//!
//! The crate samples subharmonic functions on uniform lattices and provides the
//! machinery needed to test Blaschke-type uniqueness statements numerically:
//! Riesz measures extracted from the discrete Laplacian, Dirichlet solvers and
//! Green's functions, Jensen measures and their potentials, balayage out of a
//! ball, gluing of subharmonic functions, test functions and their
//! continuation through a compact hole, and finally the verdict engine that
//! decides whether a divergent weighted zero sum forces a function to vanish.
//!
//! Points of the plane are represented as [`Point`] (a `Complex64`), which keeps
//! the holomorphic constructions (polynomials, Blaschke products) natural.

pub mod balayage;
pub mod dirichlet;
pub mod error;
pub mod ext;
pub mod formula;
pub mod geometry;
pub mod gluing;
pub mod grid;
pub mod holomorphic;
pub mod jensen;
pub mod kernels;
pub mod testfn;
pub mod uniqueness;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// A point of the plane.
pub type Point = Complex64;

/// Shorthand for building a [`Point`].
#[inline]
pub fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}
