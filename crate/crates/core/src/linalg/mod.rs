//! Dense helpers, sparse matrices and a sparse Cholesky solver.

mod cholesky;
mod dense;
mod nnls;
mod sparse;

pub use cholesky::{nested_dissection, SparseCholesky};
pub use dense::{angle_to_subspace, kernel_dimension, kkt_solve, nullspace, principal_angle, RANK_TOL};
pub use nnls::{min_norm_nonnegative, nnls};
pub use sparse::{CsrMatrix, Triplets};
