//! Fixed points of local maps on conditional simplexes over finite
//! probability spaces.
//!
//! A random point is one real vector per atom of a finite probability
//! space. A conditional simplex is a finite family of random points whose
//! atom slices are affinely independent at every atom; it plays the role
//! a compact convex simplex plays in classical Brouwer theory, except that
//! every construction must commute with gluing along partitions of the
//! atom space (locality). The solver in this crate finds approximate fixed
//! points of local, continuous self-maps by barycentric subdivision and
//! Sperner-style labeling, one atom at a time, so that solving a glued
//! problem is bit-identical to gluing the solutions of its parts.
//!
//! Modules:
//!
//! * [`prob_space`]: atom spaces, random scalars and points, partitions,
//!   sigma combination, the locality check.
//! * [`l0_linalg`]: per-atom inner products, norms, diameters, affine
//!   independence, barycentric coordinates.
//! * [`simplex`]: conditional simplexes, barycentric subdivision, cell
//!   intersection, cell location.
//! * [`labeling`]: the canonical labeling rule, properness, the search for
//!   completely labeled cells, parity audits.
//! * [`solver`]: the subdivision solver, convex bodies and projections,
//!   the intermediate value solver.
//! * [`oracle`]: slow independent checkers (grid search, bisection,
//!   exhaustive Sperner enumeration) and built-in test problems.
//!
//! The crate is `no_std` with `alloc`; enable the `libm` feature instead
//! of the default `std` for freestanding builds.

#![no_std]
#![deny(unsafe_code)]

#[cfg(feature = "std")]
extern crate std;

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("condfix-core needs the `std` feature or the `libm` feature");

pub mod error;
pub mod l0_linalg;
pub mod labeling;
mod math;
pub mod oracle;
pub mod prob_space;
pub mod simplex;
pub mod solver;
pub mod tol;

pub use error::{Error, Result};
pub use l0_linalg::ConvexWeights;
pub use labeling::{CompletelyLabeled, LabelField, LabeledVertexSet};
pub use prob_space::{Partition, ProbSpace, RandomPoint, RandomScalar};
pub use simplex::{ConditionalSimplex, SubdivisionCell};
pub use solver::{
    Certificate, ConvexBody, DomainHint, FixedPointResult, IvtResult, LocalFunction,
    ProjectionOracle, SolverConfig,
};
