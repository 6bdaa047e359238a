//! Divergence-free radial basis function interpolation of tangent vector
//! fields on the unit sphere.
//!
//! Two solvers share one function space:
//!
//! * [`direct`] assembles the `2n × 2n` tangent-frame system from the
//!   matrix-valued kernel `Q(x) ∇∇ᵀφ Q(y)` and solves it by Cholesky. It is
//!   accurate for moderate shape parameters and breaks down as `ε → 0`.
//! * [`rbfqr`] expands the kernel in divergence-free vector spherical harmonics,
//!   factors the powers of `ε` out analytically, and fits in a basis whose
//!   conditioning does not degrade in the flat limit.
//!
//! [`harness`] drives ε-sweeps comparing the two and handles file I/O.

pub mod error;
pub mod geom;
pub mod harmonics;
pub mod kernels;
pub mod direct;
pub mod linalg;
pub mod rbfqr;
pub mod harness;
mod par;

pub use error::{Error, Result};
