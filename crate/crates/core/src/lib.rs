//! Quasi-interpolation into continuous piecewise polynomials from locally
//! constructed weight functions.
//!
//! The crate builds operators that map broken (elementwise) polynomial data of
//! degree `p` or `0` to continuous piecewise polynomials of degree `p + 1`. The
//! weight functions behind each global degree of freedom are found by solving
//! small constrained least-norm problems on element patches. On top of that sit
//! the applications: superconvergent postprocessing of mixed and hybridizable
//! discontinuous Galerkin solutions, projections onto broken polynomials that
//! are bounded in negative norms, and numerical checks of the full-rank facts
//! that make the weight systems solvable.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! CSV output live in the companion `qipp` crate.
#![no_std]
#![allow(clippy::needless_range_loop, clippy::too_many_arguments, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod negproj;
pub mod orthocheck;
pub mod polybasis;
pub mod quasiinterp;
pub mod solvers;
pub mod study;
pub mod weights;

pub use error::{Error, Result};
pub use geometry::{Point, Simplex};
pub use mesh::{Anchor, AnchorTable, Mesh, PatchRef, Seed};
pub use polybasis::{ContinuousField, DiscontinuousField, DofMap, LocalPolynomial, QuadratureRule};
pub use quasiinterp::{Kind, PatchPolicy, QuasiInterpolator};
pub use weights::WeightFunction;
