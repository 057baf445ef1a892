//! Biorthogonal weight functions from local least-norm problems.
//!
//! A weight `phi` for a global degree of freedom `*` lives on a patch of
//! elements, is a broken polynomial of degree `w` there, and satisfies
//! `<phi, q_b> = delta_{*, b}` for every shape function `q_b` of its anchor
//! element `T*`, extended as a polynomial over the patch domain. Among all such
//! functions the one of least `L2` norm is taken.
//!
//! Inside a patch the weight is stored per element in the element's
//! `L2`-orthonormal basis, so the broken mass matrix is the identity.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::geometry::{Point, Simplex};
use crate::linalg::{kernel_dimension, kkt_solve, min_norm_nonnegative, RANK_TOL};
use crate::mesh::{element_patch, Mesh, PatchRef, Seed};
use crate::polybasis::{
    element_orthonormal, mass_exactness, monomial_values, num_monomials, quadrature_rule, reference_basis,
    reference_orthonormal, shape_polynomials, DofId, DofMap, Frame, QuadratureRule,
};
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// A weight function supported on a patch.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    pub dof: DofId,
    pub patch: Arc<PatchRef>,
    /// Polynomial degree `w` on each element.
    pub degree: usize,
    pub anchor_element: usize,
    /// Orthonormal-basis coefficients, one block of `dim P^w` per patch element
    /// in the order of `patch.elements`.
    pub coeffs: Vec<f64>,
}

impl WeightFunction {
    pub fn block_size(&self) -> usize {
        self.coeffs.len() / self.patch.len()
    }

    /// Coefficient block on element `t`, if `t` is in the patch.
    pub fn block(&self, t: usize) -> Option<&[f64]> {
        let k = self.patch.elements.binary_search(&t).ok()?;
        let n = self.block_size();
        Some(&self.coeffs[k * n..(k + 1) * n])
    }

    /// Value at `x` in element `t`; zero off the patch.
    pub fn evaluate(&self, mesh: &Mesh, t: usize, x: Point) -> f64 {
        let Some(c) = self.block(t) else { return 0.0 };
        let s = mesh.simplex(t);
        let v = element_orthonormal(&s, self.degree, &s.barycentric(x));
        v.iter().zip(c).map(|(a, b)| a * b).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Largest absolute value over the points of a reference rule mapped to
    /// every patch element, plus the element vertices.
    pub fn sup_norm(&self, mesh: &Mesh) -> f64 {
        let rule = quadrature_rule(mesh.dim(), 2 * self.degree + 2).expect("rule");
        let mut m: f64 = 0.0;
        for &t in &self.patch.elements {
            let s = mesh.simplex(t);
            for (x, _) in rule.mapped(&s) {
                m = m.max(self.evaluate(mesh, t, x).abs());
            }
            for x in &s.vertices[..s.num_vertices()] {
                m = m.max(self.evaluate(mesh, t, *x).abs());
            }
        }
        m
    }

    /// `<self, f>` over the patch with a rule of the given exactness.
    pub fn pair_with(&self, mesh: &Mesh, f: impl Fn(usize, Point) -> f64, exactness: usize) -> Result<f64> {
        let rule = quadrature_rule(mesh.dim(), exactness)?;
        let mut s = 0.0;
        for &t in &self.patch.elements {
            for (x, w) in rule.mapped(&mesh.simplex(t)) {
                s += w * self.evaluate(mesh, t, x) * f(t, x);
            }
        }
        Ok(s)
    }
}

/// Orthonormal test functions of degree `w` at the points of a reference rule.
struct OrthoTable {
    values: Vec<Vec<f64>>,
}

impl OrthoTable {
    fn new(dim: usize, w: usize, rule: &QuadratureRule) -> Self {
        Self { values: rule.points.iter().map(|x| reference_orthonormal(dim, w, &x[0], &x[1])).collect() }
    }
}

fn reference_scale(s: &Simplex) -> f64 {
    if s.dim == 1 {
        s.measure()
    } else {
        2.0 * s.measure()
    }
}

/// Constraint matrix `B[m, (T, a)] = <o_{T,a}, mu_m>` between the patch
/// monomials `mu_m` of degree `target` in `frame` and the orthonormal basis of
/// `P^w(T)` on each patch element.
fn monomial_constraints(mesh: &Mesh, patch: &PatchRef, frame: Frame, w: usize, target: usize) -> DMatrix<f64> {
    let dim = mesh.dim();
    let rule = quadrature_rule(dim, w + target).expect("rule");
    let tab = OrthoTable::new(dim, w, &rule);
    let nw = num_monomials(dim, w);
    let k = num_monomials(dim, target);
    let mut b = DMatrix::zeros(k, patch.len() * nw);
    let mut mono = Vec::with_capacity(k);
    for (i, &t) in patch.elements.iter().enumerate() {
        let s = mesh.simplex(t);
        let scale = 1.0 / reference_scale(&s).sqrt();
        for (q, (x, wq)) in rule.mapped(&s).enumerate() {
            monomial_values(dim, target, frame.local(x), &mut mono);
            for a in 0..nw {
                let o = wq * tab.values[q][a] * scale;
                for m in 0..k {
                    b[(m, i * nw + a)] += o * mono[m];
                }
            }
        }
    }
    b
}

/// Rows are the shape functions of element `t` of degree `target`, as
/// monomial coefficients in `frame`.
fn shape_coefficients(mesh: &Mesh, t: usize, target: usize, frame: Frame) -> DMatrix<f64> {
    let q = shape_polynomials(mesh, t, target, frame);
    let k = num_monomials(mesh.dim(), target);
    DMatrix::from_fn(q.len(), k, |i, m| q[i].coefficients()[m])
}

/// `B[j, k] = <mu_k, chi_j>` with `mu_k` the monomials of degree `trial`
/// in the patch frame and `chi_j` the shape functions of degree `test` on each
/// patch element, element blocks in patch order.
pub fn gram_matrix(mesh: &Mesh, patch: &PatchRef, trial: usize, test: usize) -> DMatrix<f64> {
    let dim = mesh.dim();
    let frame = patch.frame(mesh);
    let rule = quadrature_rule(dim, trial + test).expect("rule");
    let basis = reference_basis(dim, test);
    let vals: Vec<Vec<f64>> = rule.points.iter().map(|x| basis.values(*x)).collect();
    let nt = basis.len();
    let k = num_monomials(dim, trial);
    let mut b = DMatrix::zeros(patch.len() * nt, k);
    let mut mono = Vec::with_capacity(k);
    for (i, &t) in patch.elements.iter().enumerate() {
        let signs = basis.flip_signs(mesh.edge_flips(t));
        for (q, (x, wq)) in rule.mapped(&mesh.simplex(t)).enumerate() {
            monomial_values(dim, trial, frame.local(x), &mut mono);
            for j in 0..nt {
                let c = wq * vals[q][j] * signs[j];
                for m in 0..k {
                    b[(i * nt + j, m)] += c * mono[m];
                }
            }
        }
    }
    b
}

/// Vicinity growth: the first of `omega_z, omega(Omega_z), ...` on which
/// broken constants separate `P^{p+1}`.
pub fn grow_vicinity(mesh: &Mesh, z: usize, p: usize) -> Result<PatchRef> {
    let mut patch = element_patch(mesh, Seed::Vertex(z), 1)?;
    loop {
        let b = gram_matrix(mesh, &patch, p + 1, 0);
        if kernel_dimension(&b, RANK_TOL) == 0 {
            return Ok(patch);
        }
        let next = patch.grow(mesh);
        if next.len() == patch.len() {
            return Err(Error::VicinityExhausted { vertex: z });
        }
        patch = next;
    }
}

/// Least-norm weight for one degree of freedom from the full saddle system
/// `[M B^T; B 0] [phi; lambda] = [0; e]`.
pub fn solve_weight(
    mesh: &Mesh,
    dof: DofId,
    patch: &PatchRef,
    anchor_element: usize,
    weight_degree: usize,
    target_degree: usize,
) -> Result<WeightFunction> {
    let dim = mesh.dim();
    if !patch.contains(anchor_element) {
        return Err(Error::InvalidArgument(format!("anchor element {anchor_element} is not in the patch")));
    }
    let dofs = DofMap::new(mesh, target_degree);
    let local = dofs.element_dofs(mesh, anchor_element);
    let pos = local.iter().position(|&i| i == dofs.index(dof)).ok_or_else(|| {
        Error::InvalidArgument(format!("{dof:?} is not a degree of freedom of element {anchor_element}"))
    })?;

    let frame = patch.frame(mesh);
    let nw = num_monomials(dim, weight_degree);
    let n = patch.len() * nw;
    // Mass matrix of the broken test space; the identity up to round-off.
    let rule = quadrature_rule(dim, mass_exactness(weight_degree))?;
    let tab = OrthoTable::new(dim, weight_degree, &rule);
    let mut m = DMatrix::zeros(n, n);
    // With o = o_hat / sqrt(jac) and physical weights w_hat * jac, the
    // Jacobian cancels and every element block is the reference one.
    let mut block = DMatrix::zeros(nw, nw);
    for (q, wq) in rule.weights.iter().enumerate() {
        for a in 0..nw {
            for c in 0..nw {
                block[(a, c)] += wq * tab.values[q][a] * tab.values[q][c];
            }
        }
    }
    for i in 0..patch.len() {
        m.view_mut((i * nw, i * nw), (nw, nw)).copy_from(&block);
    }
    let mono = monomial_constraints(mesh, patch, frame, weight_degree, target_degree);
    let kernel = kernel_dimension(&mono.transpose(), RANK_TOL);
    if kernel != 0 {
        return Err(Error::NontrivialKernel { vertex: seed_vertex(patch), order: patch.order, kernel });
    }
    let c = shape_coefficients(mesh, anchor_element, target_degree, frame);
    let b = &c * mono;
    let mut g = DMatrix::zeros(local.len(), 1);
    g[(pos, 0)] = 1.0;
    let (phi, _) = kkt_solve(&m, &b, &DMatrix::zeros(n, 1), &g)?;
    Ok(WeightFunction {
        dof,
        patch: Arc::new(patch.clone()),
        degree: weight_degree,
        anchor_element,
        coeffs: phi.column(0).iter().copied().collect(),
    })
}

fn seed_vertex(patch: &PatchRef) -> usize {
    match &patch.seed {
        Seed::Vertex(v) => *v,
        _ => usize::MAX,
    }
}

/// Least-norm duals of the patch monomials: column `m` of `psi` is the
/// least-norm broken function with `<psi_m, mu_k> = delta_{mk}`. Weights for
/// any anchor element in the patch follow by a change of basis.
#[derive(Debug, Clone)]
pub struct PatchDual {
    pub patch: Arc<PatchRef>,
    pub frame: Frame,
    pub weight_degree: usize,
    pub target_degree: usize,
    pub psi: DMatrix<f64>,
}

pub fn patch_dual(mesh: &Mesh, patch: Arc<PatchRef>, weight_degree: usize, target_degree: usize) -> Result<PatchDual> {
    let frame = patch.frame(mesh);
    let bt = monomial_constraints(mesh, &patch, frame, weight_degree, target_degree).transpose();
    let k = bt.ncols();
    if bt.nrows() < k {
        return Err(Error::NontrivialKernel {
            vertex: seed_vertex(&patch),
            order: patch.order,
            kernel: k - bt.nrows(),
        });
    }
    // B^T = Q R, so B^T (B B^T)^{-1} = Q R^{-T}.
    let qr = bt.qr();
    let r = qr.r();
    let rmax = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let deficient = (0..k).filter(|&i| r[(i, i)].abs() <= RANK_TOL * rmax).count();
    if deficient > 0 {
        return Err(Error::NontrivialKernel { vertex: seed_vertex(&patch), order: patch.order, kernel: deficient });
    }
    let rinv_t = r.transpose().try_inverse().ok_or_else(|| Error::Singular("triangular factor".into()))?;
    let psi = qr.q() * rinv_t;
    Ok(PatchDual { patch, frame, weight_degree, target_degree, psi })
}

impl PatchDual {
    /// Weights for all shape functions of `anchor_element`, one column each,
    /// in local shape-function order.
    pub fn weights_for(&self, mesh: &Mesh, anchor_element: usize) -> Result<DMatrix<f64>> {
        let c = shape_coefficients(mesh, anchor_element, self.target_degree, self.frame);
        let cinv = c
            .try_inverse()
            .ok_or_else(|| Error::Singular(format!("shape coefficients of element {anchor_element}")))?;
        Ok(&self.psi * cinv)
    }
}

/// Nonnegative barycentric weights `alpha_{z,T}` with `sum alpha s_T = z`,
/// `sum alpha = 1`, least Euclidean norm among all such; returned in the order
/// of `mesh.vertex_elements(z)`.
pub fn lowest_order_vertex_weights(mesh: &Mesh, z: usize) -> Result<Vec<(usize, f64)>> {
    if mesh.is_boundary_vertex(z) {
        return Err(Error::InvalidArgument(format!("vertex {z} is on the boundary")));
    }
    let els = mesh.vertex_elements(z);
    let zc = mesh.vertices()[z];
    let h = els.iter().map(|&t| mesh.simplex(t).diameter()).fold(0.0, f64::max);
    let dim = mesh.dim();
    let mut a = DMatrix::zeros(dim + 1, els.len());
    for (k, &t) in els.iter().enumerate() {
        let s = mesh.simplex(t).centroid();
        for d in 0..dim {
            a[(d, k)] = (s[d] - zc[d]) / h;
        }
        a[(dim, k)] = 1.0;
    }
    let mut b = DVector::zeros(dim + 1);
    b[dim] = 1.0;
    let alpha = min_norm_nonnegative(&a, &b, 1e-13)?;
    Ok(els.iter().copied().zip(alpha.iter().copied()).collect())
}

/// The piecewise-constant weight `alpha_{z,T} / |T|` on `omega_z`.
pub fn lowest_order_weight(mesh: &Mesh, z: usize) -> Result<WeightFunction> {
    let alpha = lowest_order_vertex_weights(mesh, z)?;
    let patch = element_patch(mesh, Seed::Vertex(z), 1)?;
    let by: BTreeMap<usize, f64> = alpha.into_iter().collect();
    // phi|_T = alpha / |T| = c * o_T with o_T = 1/sqrt(|T|).
    let coeffs = patch.elements.iter().map(|t| by[t] / mesh.simplex(*t).measure().sqrt()).collect();
    Ok(WeightFunction {
        dof: DofId::Vertex(z),
        anchor_element: patch.elements[0],
        patch: Arc::new(patch),
        degree: 0,
        coeffs,
    })
}

/// Largest deviation from biorthogonality of `weight` against the extended
/// shape functions of its anchor element, evaluated pointwise with a rule of
/// the given exactness.
pub fn biorthogonality_defect(
    mesh: &Mesh,
    weight: &WeightFunction,
    target_degree: usize,
    exactness: usize,
) -> Result<f64> {
    let frame = weight.patch.frame(mesh);
    let q = shape_polynomials(mesh, weight.anchor_element, target_degree, frame);
    let dofs = DofMap::new(mesh, target_degree);
    let local = dofs.element_dofs(mesh, weight.anchor_element);
    let me = dofs.index(weight.dof);
    let rule = quadrature_rule(mesh.dim(), exactness)?;
    let mut pairings = vec![0.0; q.len()];
    for &t in &weight.patch.elements {
        for (x, w) in rule.mapped(&mesh.simplex(t)) {
            let phi = w * weight.evaluate(mesh, t, x);
            for (acc, qi) in pairings.iter_mut().zip(&q) {
                *acc += phi * qi.evaluate(x);
            }
        }
    }
    let mut worst: f64 = 0.0;
    for (v, &gi) in pairings.iter().zip(&local) {
        let e = if gi == me { 1.0 } else { 0.0 };
        worst = worst.max((v - e).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, jittered_delaunay_mesh, refine_uniform, AnchorTable, Entity};
    use alloc::vec;

    fn vertex_weight(mesh: &Mesh, z: usize, p: usize) -> WeightFunction {
        let patch = element_patch(mesh, Seed::Vertex(z), 1).unwrap();
        let t = mesh.vertex_elements(z)[0];
        solve_weight(mesh, DofId::Vertex(z), &patch, t, p, p + 1).unwrap()
    }

    #[test]
    fn gram_shapes_and_ranks() {
        let m = generate_structured(2, 3).unwrap();
        let single = PatchRef { elements: vec![4], seed: Seed::Element(4), order: 1 };
        let g = gram_matrix(&m, &single, 0, 0);
        assert_eq!(g.shape(), (1, 1));
        assert!((g[(0, 0)] - m.simplex(4).measure()).abs() < 1e-15);

        let z = m.interior_vertices()[0];
        let wz = element_patch(&m, Seed::Vertex(z), 1).unwrap();
        let g = gram_matrix(&m, &wz, 1, 0);
        assert_eq!(g.ncols(), 3);
        assert_eq!(3 - kernel_dimension(&g, RANK_TOL), 3);

        let line = generate_structured(1, 10).unwrap();
        for p in 0..4 {
            let els: Vec<usize> = (3..3 + p + 2).collect();
            let patch = PatchRef { seed: Seed::Region(els.clone()), elements: els, order: 1 };
            let g = gram_matrix(&line, &patch, p + 1, 0);
            assert_eq!(g.shape(), (p + 2, p + 2));
            assert_eq!(kernel_dimension(&g, RANK_TOL), 0);
        }
    }

    #[test]
    fn vicinity_growth() {
        let m = generate_structured(2, 8).unwrap();
        for z in m.interior_vertices() {
            let w = grow_vicinity(&m, z, 0).unwrap();
            assert_eq!(w, element_patch(&m, Seed::Vertex(z), 1).unwrap());
            assert!(grow_vicinity(&m, z, 1).unwrap().order <= 2);
        }
        let line = generate_structured(1, 16).unwrap();
        let w = grow_vicinity(&line, 8, 2).unwrap();
        assert_eq!(w.len(), 4);
        // Three intervals cannot separate cubics from broken constants.
        let tiny = generate_structured(1, 3).unwrap();
        assert_eq!(grow_vicinity(&tiny, 1, 3).unwrap_err(), Error::VicinityExhausted { vertex: 1 });
    }

    #[test]
    fn weights_are_biorthogonal() {
        let m = jittered_delaunay_mesh(4, 3).unwrap();
        for p in 0..4 {
            for z in m.interior_vertices().into_iter().take(3) {
                let w = vertex_weight(&m, z, p);
                let defect = biorthogonality_defect(&m, &w, p + 1, 2 * p + 8).unwrap();
                assert!(defect < 1e-10, "p={p} z={z} defect={defect}");
            }
        }
    }

    #[test]
    fn saddle_first_block_residual() {
        let m = generate_structured(2, 4).unwrap();
        let z = m.interior_vertices()[2];
        let patch = element_patch(&m, Seed::Vertex(z), 1).unwrap();
        let frame = patch.frame(&m);
        let t = m.vertex_elements(z)[0];
        let b = shape_coefficients(&m, t, 3, frame) * monomial_constraints(&m, &patch, frame, 2, 3);
        let n = b.ncols();
        let mut g = DMatrix::zeros(b.nrows(), 1);
        g[(0, 0)] = 1.0;
        let id = DMatrix::identity(n, n);
        let (phi, lambda) = kkt_solve(&id, &b, &DMatrix::zeros(n, 1), &g).unwrap();
        let btl = b.transpose() * lambda;
        assert!((&phi + &btl).norm() <= 1e-10 * btl.norm());
    }

    #[test]
    fn permuted_unknowns_give_the_same_weight() {
        let m = jittered_delaunay_mesh(4, 9).unwrap();
        let z = m.interior_vertices()[4];
        let patch = element_patch(&m, Seed::Vertex(z), 1).unwrap();
        let frame = patch.frame(&m);
        let t = m.vertex_elements(z)[1];
        let b = shape_coefficients(&m, t, 2, frame) * monomial_constraints(&m, &patch, frame, 1, 2);
        let n = b.ncols();
        let perm: Vec<usize> = (0..n).rev().collect();
        let bp = DMatrix::from_fn(b.nrows(), n, |i, j| b[(i, perm[j])]);
        let mut g = DMatrix::zeros(b.nrows(), 1);
        g[(1, 0)] = 1.0;
        let id = DMatrix::identity(n, n);
        let (x, _) = kkt_solve(&id, &b, &DMatrix::zeros(n, 1), &g).unwrap();
        let (y, _) = kkt_solve(&id, &bp, &DMatrix::zeros(n, 1), &g).unwrap();
        for j in 0..n {
            assert!((x[(perm[j], 0)] - y[(j, 0)]).abs() < 1e-10);
        }
    }

    #[test]
    fn patch_dual_matches_saddle_solve() {
        let m = jittered_delaunay_mesh(5, 1).unwrap();
        let anchors = AnchorTable::new(&m);
        let dofs = DofMap::new(&m, 3);
        for t in [0, 7, 20] {
            let an = anchors.get(Entity::Element(t));
            let patch = Arc::new(element_patch(&m, Seed::Vertex(an.vertex), an.order).unwrap());
            let dual = patch_dual(&m, patch.clone(), 2, 3).unwrap();
            let phi = dual.weights_for(&m, t).unwrap();
            for (k, &g) in dofs.element_dofs(&m, t).iter().enumerate() {
                let w = solve_weight(&m, dofs.id(g), &patch, t, 2, 3).unwrap();
                for (a, b) in w.coeffs.iter().zip(phi.column(k).iter()) {
                    assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
                }
            }
        }
    }

    #[test]
    fn sup_norm_scales_with_patch_measure() {
        let mut m = generate_structured(2, 2).unwrap();
        let mut first = None;
        for _ in 0..4 {
            let z = m.interior_vertices()[m.interior_vertices().len() / 2];
            let w = vertex_weight(&m, z, 1);
            let c = w.sup_norm(&m) * w.patch.measure(&m);
            let c0 = *first.get_or_insert(c);
            assert!(c <= 10.0 * c0 && c >= c0 / 10.0);
            m = refine_uniform(&m);
        }
    }

    #[test]
    fn lowest_order_weights() {
        let m = generate_structured(2, 4).unwrap();
        let z = 2 * 5 + 2;
        let a = lowest_order_vertex_weights(&m, z).unwrap();
        assert_eq!(a.len(), 6);
        assert!(a.iter().all(|(_, v)| (v - 1.0 / 6.0).abs() < 1e-12));
        let j = jittered_delaunay_mesh(5, 4).unwrap();
        for z in j.interior_vertices() {
            let a = lowest_order_vertex_weights(&j, z).unwrap();
            let sum: f64 = a.iter().map(|x| x.1).sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(a.iter().all(|x| x.1 >= 0.0));
            let mut c = [0.0; 2];
            for &(t, v) in &a {
                let s = j.simplex(t).centroid();
                c[0] += v * s[0];
                c[1] += v * s[1];
            }
            let zc = j.vertices()[z];
            let diam = element_patch(&j, Seed::Vertex(z), 1).unwrap().frame(&j).scale;
            assert!(crate::geometry::distance(c, zc) < 1e-12 * diam);
            // Both constructions reproduce the vertex value of P^1 shape functions.
            let w = lowest_order_weight(&j, z).unwrap();
            let ls = vertex_weight(&j, z, 0);
            for phi in [&w, &ls] {
                let t = phi.anchor_element;
                let frame = phi.patch.frame(&j);
                let q = shape_polynomials(&j, t, 1, frame);
                for (i, &v) in j.element(t).iter().enumerate() {
                    let e = if v == z { 1.0 } else { 0.0 };
                    let val = phi.pair_with(&j, |_, x| q[i].evaluate(x), 4).unwrap();
                    assert!((val - e).abs() < 1e-12);
                }
            }
        }
    }
}
