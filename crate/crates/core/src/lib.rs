//! Numerical verification toolkit for isoperimetric bounds on the principal
//! Robin eigenvalue with negative boundary parameter and for Steklov-type
//! boundary-flux energy minimization.
//!
//! The crate is organized bottom-up:
//!
//! * [`special`]: modified Bessel functions `I_nu` for half-integer orders.
//! * [`ball`]: the radial eigenvalue problem on a ball, solved two
//!   independent ways (transcendental equation and ODE shooting).
//! * [`domain`] / [`mesh`]: star-shaped and polygonal planar domains and an
//!   unstructured triangle mesher for them.
//! * [`sparse`]: symmetric sparse matrices with a skyline Cholesky solver.
//! * [`fem`]: P1 finite elements, the Robin eigensolver, and scalar field
//!   integrals.
//! * [`green`]: Green's function with pole, harmonic radius and harmonic
//!   center, superlevel-set geometry, capacity, and radial transplantation.
//! * [`shape`]: boundary perturbations, shape derivatives of the eigenvalue
//!   and of the boundary-flux energy, with finite-difference oracles.
//! * [`steklov`]: boundary-flux energy minimization and its radial
//!   comparison problems.
//! * [`report`]: experiment reports with named checks and CSV/JSON output.
//! * [`verify`]: the end-to-end verification suites used by the CLI and the
//!   acceptance tests.

pub mod ball;
pub mod domain;
pub mod error;
pub mod fem;
pub mod green;
pub mod mesh;
mod quad;
pub mod report;
pub mod shape;
pub mod sparse;
pub mod special;
pub mod steklov;
pub mod verify;

pub use ball::{BallEigenResult, BallProblem};
pub use domain::DomainSpec;
pub use error::{Error, Result};
pub use fem::{EigenResult, ScalarField};
pub use mesh::Mesh;
pub use report::{Check, ExperimentReport};
