//! Shape functions, quadrature, local polynomial algebra, orthogonal
//! polynomials and coefficient fields.

use alloc::vec::Vec;

mod basis;
mod field;
mod jacobi;
mod orthopoly;
mod poly;
mod quadrature;
mod ring;

pub use basis::{edge_endpoints, reference_basis, ReferenceBasis};
#[allow(unused_imports)]
pub(crate) use field::ElementTable;
pub use field::{
    error_exactness, mass_exactness, project_broken, project_broken_with, ContinuousField, DiscontinuousField, DofId,
    DofMap,
};
pub use jacobi::{
    binomial, factorial, gauss_legendre, jacobi_all, jacobi_eval, jacobi_ring, jacobi_series, pochhammer,
};
pub use orthopoly::{
    element_orthonormal, poly_dim, reference_orthonormal, triangle_orthopoly, triangle_orthopoly_swapped_series,
};
pub use poly::{monomial_exponents, monomial_index, monomial_values, num_monomials, Frame, LocalPolynomial};
pub use quadrature::{quadrature_rule, QuadratureRule, MAX_EXACTNESS};
pub use ring::{Dual, Ring};

use crate::mesh::{Mesh, PatchRef};

/// Barycentric coordinates of element `t` as affine polynomials in `frame`.
pub fn barycentric_polynomials(mesh: &Mesh, t: usize, frame: Frame) -> Vec<LocalPolynomial> {
    let aff = mesh.simplex(t).barycentric_affine();
    (0..3).map(|i| LocalPolynomial::affine_function(mesh.dim(), frame, aff[i][0], aff[i][1], aff[i][2])).collect()
}

/// The shape functions of element `t`, extended as polynomials and expressed
/// in `frame`.
pub fn shape_polynomials(mesh: &Mesh, t: usize, degree: usize, frame: Frame) -> Vec<LocalPolynomial> {
    let lambda = barycentric_polynomials(mesh, t, frame);
    reference_basis(mesh.dim(), degree)
        .evaluate(&lambda, mesh.edge_flips(t))
        .into_iter()
        .map(|mut q| {
            q.raise_degree(degree);
            q
        })
        .collect()
}

/// Re-expresses `poly` in the frame of the domain of `target`.
pub fn extend_polynomial(mesh: &Mesh, poly: &LocalPolynomial, target: &PatchRef) -> LocalPolynomial {
    poly.extend(target.frame(mesh))
}
