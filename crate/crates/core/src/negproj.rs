//! Projections onto broken polynomials of degree `p` that are bounded in
//! negative norms.
//!
//! `Q` is the adjoint of the smoothing map `P = J + B (1 - J)`, where `J` is
//! a quasi-interpolator into `P^{p+1}_c` and `B` corrects the local moments
//! against the shape functions with element bubbles. `Q phi` is the element of
//! `P^p(T)` with `<Q phi, w> = <phi, P w>` for every broken `w` of degree `p`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::geometry::Point;
use crate::linalg::SparseCholesky;
use crate::linalg::{CsrMatrix, Triplets};
use crate::mesh::{refine_uniform, Mesh};
use crate::polybasis::{
    error_exactness, quadrature_rule, reference_basis, reference_orthonormal, DiscontinuousField, DofMap,
};
use crate::quasiinterp::{Kind, PatchPolicy, QuasiInterpolator};
use crate::solvers::poisson_p1_system;
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Reference cross mass `int eta_hat^a_i eta_hat^b_j` between the shape
/// functions of degrees `a` and `b`.
fn reference_cross_mass(a: usize, b: usize) -> DMatrix<f64> {
    let (ba, bb) = (reference_basis(2, a), reference_basis(2, b));
    let rule = quadrature_rule(2, a + b).expect("cross mass rule");
    let mut m = DMatrix::zeros(ba.len(), bb.len());
    for (x, w) in rule.points.iter().zip(&rule.weights) {
        let (va, vb) = (ba.values(*x), bb.values(*x));
        for i in 0..va.len() {
            for j in 0..vb.len() {
                m[(i, j)] += w * va[i] * vb[j];
            }
        }
    }
    m
}

/// Block diagonal matrix from per-element dense blocks.
fn block_diagonal(mesh: &Mesh, rows: usize, cols: usize, block: impl Fn(usize) -> DMatrix<f64>) -> CsrMatrix {
    let mut trip = Triplets::new(rows * mesh.num_elements(), cols * mesh.num_elements());
    for t in 0..mesh.num_elements() {
        let b = block(t);
        for i in 0..rows {
            for j in 0..cols {
                if b[(i, j)] != 0.0 {
                    trip.push(t * rows + i, t * cols + j, b[(i, j)]);
                }
            }
        }
    }
    trip.to_csr()
}

fn signed(m: &DMatrix<f64>, rows: &[f64], cols: &[f64], scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| scale * rows[i] * cols[j] * m[(i, j)])
}

/// Broken cross mass `<eta^a_i, eta^b_j>_T` in the element shape bases.
pub fn cross_mass(mesh: &Mesh, a: usize, b: usize) -> CsrMatrix {
    let m = reference_cross_mass(a, b);
    let (ba, bb) = (reference_basis(2, a), reference_basis(2, b));
    block_diagonal(mesh, ba.len(), bb.len(), |t| {
        let f = mesh.edge_flips(t);
        signed(&m, &ba.flip_signs(f), &bb.flip_signs(f), 2.0 * mesh.simplex(t).measure())
    })
}

fn bubble(x: Point) -> f64 {
    (1.0 - x[0] - x[1]) * x[0] * x[1]
}

/// Duals of the degree-`p` shape functions in the bubble-weighted space
/// `{b_T r : r in P^p(T)}`. On element `T` the dual of shape function `*` is
/// `s_* nu_hat_* / (2|T|)` with the flip sign `s_*`, so one reference set
/// serves every element.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleDualBasis {
    mesh_id: u64,
    p: usize,
    /// `nu_hat_* = b_hat sum_a ortho[(a, *)] o_hat_a`.
    ortho: DMatrix<f64>,
    /// `nu_hat_*` in the reference shape functions of degree `p + 3`.
    shape: DMatrix<f64>,
}

pub fn dual_bubble_basis(mesh: &Mesh, p: usize) -> Result<BubbleDualBasis> {
    if mesh.dim() != 2 {
        return Err(Error::InvalidArgument(format!(
            "bubble duals need a two-dimensional mesh, got dim {}",
            mesh.dim()
        )));
    }
    let basis = reference_basis(2, p);
    let n = basis.len();
    let rule = quadrature_rule(2, 2 * p + 3)?;
    let mut g = DMatrix::zeros(n, n);
    for (x, w) in rule.points.iter().zip(&rule.weights) {
        let o = reference_orthonormal(2, p, &x[0], &x[1]);
        let eta = basis.values(*x);
        let b = bubble(*x);
        for a in 0..n {
            for s in 0..n {
                g[(a, s)] += w * b * o[a] * eta[s];
            }
        }
    }
    let ortho =
        g.transpose().try_inverse().ok_or_else(|| Error::Singular(format!("bubble-weighted Gram of degree {p}")))?;
    // Re-expand in the degree p + 3 shape functions.
    let high = reference_basis(2, p + 3);
    let mass = reference_cross_mass(p + 3, p + 3);
    let rule = quadrature_rule(2, 2 * p + 6)?;
    let mut rhs = DMatrix::zeros(high.len(), n);
    for (x, w) in rule.points.iter().zip(&rule.weights) {
        let o = reference_orthonormal(2, p, &x[0], &x[1]);
        let eta = high.values(*x);
        let b = bubble(*x);
        let nu: Vec<f64> = (0..n).map(|s| b * (0..n).map(|a| ortho[(a, s)] * o[a]).sum::<f64>()).collect();
        for j in 0..high.len() {
            for s in 0..n {
                rhs[(j, s)] += w * eta[j] * nu[s];
            }
        }
    }
    let shape = mass.cholesky().ok_or_else(|| Error::Singular("reference mass".into()))?.solve(&rhs);
    Ok(BubbleDualBasis { mesh_id: mesh.id(), p, ortho, shape })
}

impl BubbleDualBasis {
    pub fn degree(&self) -> usize {
        self.p
    }

    /// Number of duals per element, `dim P^p`.
    pub fn count_per_element(&self) -> usize {
        self.ortho.ncols()
    }

    /// All duals of element `t` at the physical point `x`.
    pub fn evaluate(&self, mesh: &Mesh, t: usize, x: Point) -> Vec<f64> {
        let s = mesh.simplex(t);
        let l = s.barycentric(x);
        let xi = [l[1], l[2]];
        let o = reference_orthonormal(2, self.p, &xi[0], &xi[1]);
        let signs = reference_basis(2, self.p).flip_signs(mesh.edge_flips(t));
        let jac = 2.0 * s.measure();
        let b = bubble(xi);
        (0..self.count_per_element())
            .map(|k| signs[k] * b * (0..o.len()).map(|a| self.ortho[(a, k)] * o[a]).sum::<f64>() / jac)
            .collect()
    }

    /// Coefficients of the duals in the element shape functions of degree
    /// `p + 3`, one column per dual, as a block diagonal matrix.
    pub fn shape_matrix(&self, mesh: &Mesh) -> Result<CsrMatrix> {
        if mesh.id() != self.mesh_id {
            return Err(Error::MeshMismatch);
        }
        let low = reference_basis(2, self.p);
        let high = reference_basis(2, self.p + 3);
        Ok(block_diagonal(mesh, high.len(), low.len(), |t| {
            let f = mesh.edge_flips(t);
            signed(&self.shape, &high.flip_signs(f), &low.flip_signs(f), 1.0 / (2.0 * mesh.simplex(t).measure()))
        }))
    }
}

/// `B v = sum_T sum_* <v, eta_*>_T nu_*` for broken `v` of degree
/// `input_degree`, as a map into broken fields of degree `p + 3`.
#[allow(non_snake_case)]
pub fn build_Bp(mesh: &Mesh, p: usize, input_degree: usize) -> Result<CsrMatrix> {
    let duals = dual_bubble_basis(mesh, p)?;
    Ok(duals.shape_matrix(mesh)?.matmul(&cross_mass(mesh, p, input_degree)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Built on `J0`; the smoothed functions vanish on the boundary.
    ZeroBoundary,
    /// Built on `J`.
    Free,
}

#[derive(Debug, Clone)]
pub struct NegativeProjection {
    mesh_id: u64,
    p: usize,
    variant: Variant,
    /// `P` from broken degree `p` to broken degree `p + 3`.
    smoother: CsrMatrix,
    /// Inverse broken mass of degree `p`.
    mass_inverse: CsrMatrix,
}

/// Gather matrix from a continuous space to its broken coefficients.
fn gather(mesh: &Mesh, dofs: &DofMap) -> CsrMatrix {
    let n = dofs.basis.len();
    let mut trip = Triplets::new(n * mesh.num_elements(), dofs.len());
    for t in 0..mesh.num_elements() {
        for (i, g) in dofs.element_dofs(mesh, t).into_iter().enumerate() {
            trip.push(t * n + i, g, 1.0);
        }
    }
    trip.to_csr()
}

/// Broken mass inverse of degree `p`, block diagonal.
fn mass_inverse(mesh: &Mesh, p: usize) -> Result<CsrMatrix> {
    let m = reference_cross_mass(p, p);
    let inv = m.cholesky().ok_or_else(|| Error::Singular("reference mass".into()))?.inverse();
    let basis = reference_basis(2, p);
    Ok(block_diagonal(mesh, basis.len(), basis.len(), |t| {
        let s = basis.flip_signs(mesh.edge_flips(t));
        signed(&inv, &s, &s, 1.0 / (2.0 * mesh.simplex(t).measure()))
    }))
}

pub fn build_negative_projection(mesh: &Mesh, p: usize, variant: Variant) -> Result<NegativeProjection> {
    let kind = match variant {
        Variant::ZeroBoundary => Kind::J0,
        Variant::Free => Kind::J,
    };
    let qi = QuasiInterpolator::build(mesh, p, kind, PatchPolicy::Default)?;
    let jmat = gather(mesh, qi.target()).matmul(qi.operator_matrix());
    // Embedding of degree p + 1 into degree p + 3 shape coefficients.
    let embed = mass_inverse(mesh, p + 3)?.matmul(&cross_mass(mesh, p + 3, p + 1));
    let bp = dual_bubble_basis(mesh, p)?.shape_matrix(mesh)?;
    let moments = cross_mass(mesh, p, p).add(1.0, &cross_mass(mesh, p, p + 1).matmul(&jmat), -1.0);
    let smoother = embed.matmul(&jmat).add(1.0, &bp.matmul(&moments), 1.0);
    Ok(NegativeProjection { mesh_id: mesh.id(), p, variant, smoother, mass_inverse: mass_inverse(mesh, p)? })
}

impl NegativeProjection {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// `P` as a matrix from broken degree `p` to broken degree `p + 3`.
    pub fn smoother(&self) -> &CsrMatrix {
        &self.smoother
    }

    /// `Q` as a matrix acting on broken coefficients of degree `input_degree`.
    pub fn matrix(&self, mesh: &Mesh, input_degree: usize) -> Result<CsrMatrix> {
        if mesh.id() != self.mesh_id {
            return Err(Error::MeshMismatch);
        }
        let loads = cross_mass(mesh, self.p + 3, input_degree);
        Ok(self.mass_inverse.matmul(&self.smoother.transpose().matmul(&loads)))
    }

    fn field_from_moments(&self, mesh: &Mesh, moments: &[f64]) -> Result<DiscontinuousField> {
        let c = self.mass_inverse.mul_vec(&self.smoother.tr_mul_vec(moments));
        DiscontinuousField::from_coefficients(mesh, self.p, c)
    }

    pub fn apply(&self, mesh: &Mesh, phi: &DiscontinuousField) -> Result<DiscontinuousField> {
        phi.check_mesh(mesh)?;
        if mesh.id() != self.mesh_id {
            return Err(Error::MeshMismatch);
        }
        let moments = cross_mass(mesh, self.p + 3, phi.degree()).mul_vec(phi.coefficients());
        self.field_from_moments(mesh, &moments)
    }

    /// `Q phi` for a function, with moments by quadrature.
    pub fn apply_fn(&self, mesh: &Mesh, f: impl Fn(Point) -> f64) -> Result<DiscontinuousField> {
        if mesh.id() != self.mesh_id {
            return Err(Error::MeshMismatch);
        }
        let high = reference_basis(2, self.p + 3);
        let n = high.len();
        let rule = quadrature_rule(2, error_exactness(self.p + 3))?;
        let tab: Vec<Vec<f64>> = rule.points.iter().map(|x| high.values(*x)).collect();
        let mut moments = vec![0.0; n * mesh.num_elements()];
        for t in 0..mesh.num_elements() {
            let signs = high.flip_signs(mesh.edge_flips(t));
            for (q, (x, w)) in rule.mapped(&mesh.simplex(t)).enumerate() {
                let fx = f(x);
                for i in 0..n {
                    moments[t * n + i] += w * fx * signs[i] * tab[q][i];
                }
            }
        }
        self.field_from_moments(mesh, &moments)
    }
}

/// Discrete surrogate of `||g||_{H^-1}`: `sqrt(<g, w>)` with `w` the conforming
/// `P1` Dirichlet solution for the load `g` on `mesh` refined `extra_levels`
/// times. `g(t, x)` is evaluated with `t` an element of the coarse mesh.
pub fn negative_norm_surrogate(
    mesh: &Mesh,
    g: impl Fn(usize, Point) -> f64,
    extra_levels: usize,
    exactness: usize,
) -> Result<f64> {
    let mut fine = mesh.clone();
    let mut ancestor: Vec<usize> = (0..mesh.num_elements()).collect();
    for _ in 0..extra_levels {
        fine = refine_uniform(&fine);
        ancestor =
            (0..fine.num_elements()).map(|t| ancestor[fine.parent(t).expect("refined mesh has parents")]).collect();
    }
    let (a, b, interior) = poisson_p1_system(&fine, |t, x| g(ancestor[t], x), exactness)?;
    if interior.is_empty() {
        return Ok(0.0);
    }
    let w = SparseCholesky::factor(&a)?.solve(&b);
    let s = DVector::from_vec(b).dot(&DVector::from_vec(w));
    Ok(s.max(0.0).sqrt())
}
