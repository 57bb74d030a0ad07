//! Spectral laboratory for the linear spatially homogeneous Landau equation
//! with soft potentials (−3 < γ < 0).
//!
//! The crate computes the Maxwellian-convolved collision coefficients,
//! assembles the dissipative linearized collision operator in a Hermite
//! Galerkin basis, evolves it exactly through its spectral decomposition, and
//! measures the analytic-smoothing behaviour of the semigroup (factorial
//! derivative bounds, t^{−m/2} short-time rates, coercivity and commutator
//! constants).
//!
//! Layering, bottom to top:
//! * [`index`], [`spectral`] — multi-indices and coefficient-space calculus;
//! * [`quad`], [`grid`] — quadrature rules and the tensor Gauss–Hermite grid;
//! * [`coeff`], [`deriv`], [`conv`] — collision coefficient field, its exact
//!   derivative tensors, and an independent 3-d convolution cross-check;
//! * [`norms`] — anisotropic dissipation norms;
//! * [`galerkin`], [`evolve`] — operator assembly and semigroup evolution;
//! * [`smoothing`], [`validate`] — smoothing measurements and inequality
//!   validators;
//! * [`report`] — deterministic artifact writing with provenance headers.

pub mod coeff;
pub mod conv;
pub mod deriv;
pub mod error;
pub mod evolve;
pub mod galerkin;
pub mod grid;
pub mod index;
pub mod norms;
pub mod quad;
pub mod report;
pub mod smoothing;
pub mod spectral;
pub mod validate;

pub use error::{LandauError, Result};
