//! Numerical geometry of real hypersurfaces in complex hyperbolic space.
//!
//! The ambient space is normalized to constant holomorphic sectional
//! curvature `-1`. Tangent vectors at a point are coordinate arrays in a
//! fixed orthonormal basis `e_0, ..., e_{2n-1}` with `e_{2i+1} = J e_{2i}`.
//!
//! * [`curvature`]: closed-form curvature tensor and Gauss/Codazzi residuals.
//! * [`solvable`]: the solvable group model `a + z + v`, its Levi-Civita
//!   connection and orbit submanifolds (ruled minimal `W^{2n-k}`, horospheres,
//!   totally geodesic subspaces, equidistants).
//! * [`jacobi`]: normal Jacobi fields, the map travelling along normal
//!   geodesics, focal rank analysis and image shape operators.
//! * [`catalog`]: tube spectra and the list of hypersurfaces with two and
//!   three distinct constant principal curvatures.
//! * [`classifier`]: the constraint system on `(lambda_i, b_i^2)` and its
//!   solution branches.
//! * [`cli`]: the `chgeo` command-line front end.

pub mod catalog;
pub mod classifier;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod jacobi;
pub mod linalg;
pub mod profile;
pub mod rng;
pub mod solvable;
pub mod symbolic;
pub mod verify;

pub use error::{GeoError, Result};

/// Coordinate vector in a fixed orthonormal basis.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix.
pub type Matrix = nalgebra::DMatrix<f64>;
