//! Discrete Poisson solvers on triangulations of convex domains with
//! homogeneous Dirichlet data: lowest-order Raviart-Thomas mixed elements,
//! a hybridizable discontinuous Galerkin scheme and conforming `P1`.
//!
//! The convention throughout is `-div grad u = f`. The mixed flux is
//! `sigma = grad u`, the HDG flux is `q = -grad u`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::geometry::{Point, Simplex};
use crate::linalg::{CsrMatrix, SparseCholesky, Triplets};
use crate::mesh::Mesh;
use crate::polybasis::{
    element_orthonormal, error_exactness, gauss_legendre, jacobi_eval, poly_dim, project_broken_with, quadrature_rule,
    ContinuousField, DiscontinuousField, DofId, DofMap, Dual,
};
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

fn require_2d(mesh: &Mesh) -> Result<()> {
    if mesh.dim() != 2 {
        return Err(Error::InvalidArgument(format!("solver needs a two-dimensional mesh, got dim {}", mesh.dim())));
    }
    Ok(())
}

/// Unit normal of global edge `e`, outward for element `t`.
fn outward_normal(mesh: &Mesh, t: usize, e: usize) -> Point {
    let [a, b] = mesh.edges()[e];
    let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
    let d = [pb[0] - pa[0], pb[1] - pa[1]];
    let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let n = [d[1] / len, -d[0] / len];
    let c = mesh.simplex(t).centroid();
    if (pa[0] - c[0]) * n[0] + (pa[1] - c[1]) * n[1] > 0.0 {
        n
    } else {
        [-n[0], -n[1]]
    }
}

/// `+1` when the global normal of edge `e` (its direction rotated clockwise)
/// points out of element `t`.
fn edge_sign(mesh: &Mesh, t: usize, e: usize) -> f64 {
    let [a, b] = mesh.edges()[e];
    let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
    let n = outward_normal(mesh, t, e);
    if n[0] * (pb[1] - pa[1]) - n[1] * (pb[0] - pa[0]) > 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn edge_length(mesh: &Mesh, e: usize) -> f64 {
    let [a, b] = mesh.edges()[e];
    crate::geometry::distance(mesh.vertices()[a], mesh.vertices()[b])
}

// ---------------------------------------------------------------------------
// Raviart-Thomas

/// Lowest-order mixed solution: the normal flux of `sigma` on every edge
/// (w.r.t. the global edge normal) and one value of `u` per element.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedSolution {
    mesh_id: u64,
    pub sigma: Vec<f64>,
    pub u: Vec<f64>,
}

/// Local basis `psi_i = |e_i| (x - P_i) / (2|T|)` of `RT0(T)`; `psi_i . n` is
/// one on local edge `i` (opposite vertex `i`) and zero on the others.
fn rt0_local(simplex: &Simplex, lens: [f64; 3], x: Point) -> [[f64; 2]; 3] {
    let two = 2.0 * simplex.measure();
    let mut out = [[0.0; 2]; 3];
    for i in 0..3 {
        let p = simplex.vertices[i];
        out[i] = [lens[i] * (x[0] - p[0]) / two, lens[i] * (x[1] - p[1]) / two];
    }
    out
}

fn rt0_mass(simplex: &Simplex, lens: [f64; 3]) -> DMatrix<f64> {
    let rule = quadrature_rule(2, 2).expect("degree two rule");
    let mut m = DMatrix::zeros(3, 3);
    for (x, w) in rule.mapped(simplex) {
        let psi = rt0_local(simplex, lens, x);
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] += w * (psi[i][0] * psi[j][0] + psi[i][1] * psi[j][1]);
            }
        }
    }
    m
}

struct Rt0Element {
    edges: [usize; 3],
    signs: [f64; 3],
    lens: [f64; 3],
    mass: DMatrix<f64>,
}

fn rt0_element(mesh: &Mesh, t: usize) -> Rt0Element {
    let edges = mesh.element_edges(t);
    let s = mesh.simplex(t);
    let lens = [edge_length(mesh, edges[0]), edge_length(mesh, edges[1]), edge_length(mesh, edges[2])];
    let signs = [edge_sign(mesh, t, edges[0]), edge_sign(mesh, t, edges[1]), edge_sign(mesh, t, edges[2])];
    Rt0Element { edges, signs, lens, mass: rt0_mass(&s, lens) }
}

fn element_loads(mesh: &Mesh, f: &impl Fn(Point) -> f64) -> Result<Vec<f64>> {
    let rule = quadrature_rule(2, error_exactness(0))?;
    Ok((0..mesh.num_elements()).map(|t| rule.mapped(&mesh.simplex(t)).map(|(x, w)| w * f(x)).sum()).collect())
}

/// The unhybridized saddle-point system `[[M, B^T], [B, 0]] (sigma, u) = (0, -F)`
/// with edges first, then elements.
pub fn mixed_system(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Result<(CsrMatrix, Vec<f64>)> {
    require_2d(mesh)?;
    let (ne, nt) = (mesh.num_edges(), mesh.num_elements());
    let mut a = Triplets::new(ne + nt, ne + nt);
    for t in 0..nt {
        let el = rt0_element(mesh, t);
        for i in 0..3 {
            for j in 0..3 {
                a.push(el.edges[i], el.edges[j], el.signs[i] * el.signs[j] * el.mass[(i, j)]);
            }
            a.push(el.edges[i], ne + t, el.signs[i] * el.lens[i]);
            a.push(ne + t, el.edges[i], el.signs[i] * el.lens[i]);
        }
    }
    let mut rhs = vec![0.0; ne];
    rhs.extend(element_loads(mesh, &f)?.into_iter().map(|v| -v));
    Ok((a.to_csr(), rhs))
}

/// Lowest-order Raviart-Thomas discretization, solved by hybridization: the
/// normal continuity of `sigma` is enforced by multipliers on interior edges,
/// the local unknowns are eliminated and the symmetric positive definite
/// multiplier system is factored.
pub fn solve_mixed_rt0(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Result<MixedSolution> {
    require_2d(mesh)?;
    let nt = mesh.num_elements();
    let loads = element_loads(mesh, &f)?;
    let mut lambda_index = vec![usize::MAX; mesh.num_edges()];
    let mut nl = 0;
    for e in mesh.interior_edges() {
        lambda_index[e] = nl;
        nl += 1;
    }
    // Per element: sigma = P lambda + q_load, u = w . lambda + u_load.
    struct Local {
        el: Rt0Element,
        p: DMatrix<f64>,
        q: DVector<f64>,
        w: DVector<f64>,
        u0: f64,
    }
    let mut locals = Vec::with_capacity(nt);
    let mut k = Triplets::new(nl, nl);
    let mut rhs = vec![0.0; nl];
    for t in 0..nt {
        let el = rt0_element(mesh, t);
        let minv = el.mass.clone().try_inverse().ok_or_else(|| Error::Singular(format!("RT0 mass of element {t}")))?;
        let c = DVector::from_row_slice(&el.lens);
        let mc = &minv * &c;
        let s = c.dot(&mc);
        // M sigma = diag(c) lambda - c u and c^T sigma = -F.
        let w = mc.component_mul(&c) / s;
        let u0 = loads[t] / s;
        let p = &minv * DMatrix::from_diagonal(&c) - &mc * w.transpose();
        let q = -&mc * u0;
        // Continuity rows: sum over elements of |e_i| sigma_i.
        let kt = DMatrix::from_diagonal(&c) * &p;
        for i in 0..3 {
            let gi = lambda_index[el.edges[i]];
            if gi == usize::MAX {
                continue;
            }
            rhs[gi] -= el.lens[i] * q[i];
            for j in 0..3 {
                let gj = lambda_index[el.edges[j]];
                if gj != usize::MAX {
                    k.push(gi, gj, kt[(i, j)]);
                }
            }
        }
        locals.push(Local { el, p, q, w, u0 });
    }
    let lambda = if nl > 0 { SparseCholesky::factor(&k.to_csr())?.solve(&rhs) } else { Vec::new() };
    let mut sigma = vec![0.0; mesh.num_edges()];
    let mut u = vec![0.0; nt];
    for (t, loc) in locals.iter().enumerate() {
        let lam = DVector::from_iterator(
            3,
            loc.el.edges.iter().map(|&e| if lambda_index[e] == usize::MAX { 0.0 } else { lambda[lambda_index[e]] }),
        );
        let sig = &loc.p * &lam + &loc.q;
        u[t] = loc.w.dot(&lam) + loc.u0;
        for i in 0..3 {
            // Both neighbours agree up to solver precision; average them.
            let e = loc.el.edges[i];
            sigma[e] += loc.el.signs[i] * sig[i] / mesh.edge_elements(e).len() as f64;
        }
    }
    Ok(MixedSolution { mesh_id: mesh.id(), sigma, u })
}

impl MixedSolution {
    fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.mesh_id != mesh.id() {
            return Err(Error::MeshMismatch);
        }
        Ok(())
    }

    /// `sigma` at a point of element `t`.
    pub fn flux(&self, mesh: &Mesh, t: usize, x: Point) -> Point {
        let el = rt0_element(mesh, t);
        let psi = rt0_local(&mesh.simplex(t), el.lens, x);
        let mut out = [0.0; 2];
        for i in 0..3 {
            let c = el.signs[i] * self.sigma[el.edges[i]];
            out[0] += c * psi[i][0];
            out[1] += c * psi[i][1];
        }
        out
    }

    /// `div sigma` on element `t` (a constant).
    pub fn divergence(&self, mesh: &Mesh, t: usize) -> f64 {
        let el = rt0_element(mesh, t);
        let area = mesh.simplex(t).measure();
        (0..3).map(|i| el.signs[i] * self.sigma[el.edges[i]] * el.lens[i]).sum::<f64>() / area
    }

    /// Elementwise mean of `sigma`.
    pub fn mean_flux(&self, mesh: &Mesh, t: usize) -> Point {
        self.flux(mesh, t, mesh.simplex(t).centroid())
    }

    /// `u` as a piecewise constant field.
    pub fn u_field(&self, mesh: &Mesh) -> Result<DiscontinuousField> {
        self.check_mesh(mesh)?;
        DiscontinuousField::from_coefficients(mesh, 0, self.u.clone())
    }

    /// Stacked unknowns in the ordering of [`mixed_system`].
    pub fn stacked(&self) -> Vec<f64> {
        let mut v = self.sigma.clone();
        v.extend_from_slice(&self.u);
        v
    }
}

/// Local `P1` reconstruction with gradient equal to the elementwise mean of
/// `sigma` and mean equal to `u`.
pub fn stenberg_postprocess(mesh: &Mesh, mixed: &MixedSolution) -> Result<DiscontinuousField> {
    mixed.check_mesh(mesh)?;
    let data: Vec<(Point, Point)> =
        (0..mesh.num_elements()).map(|t| (mesh.simplex(t).centroid(), mixed.mean_flux(mesh, t))).collect();
    project_broken_with(mesh, 1, 2, |t, x| {
        let (c, g) = data[t];
        mixed.u[t] + g[0] * (x[0] - c[0]) + g[1] * (x[1] - c[1])
    })
}

// ---------------------------------------------------------------------------
// HDG

/// Hybridizable DG solution of degree `p`. `uhat` holds `p + 1` coefficients
/// per edge in the `L2(e)`-orthonormal Legendre basis along the global edge
/// direction; boundary blocks are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct HDGSolution {
    pub p: usize,
    pub tau: f64,
    pub qx: DiscontinuousField,
    pub qy: DiscontinuousField,
    pub u: DiscontinuousField,
    pub uhat: Vec<f64>,
}

/// Orthonormal Legendre polynomials on an edge of length `len` at parameter `s in [0, 1]`.
fn edge_legendre(p: usize, len: f64, s: f64) -> Vec<f64> {
    (0..=p).map(|k| ((2 * k + 1) as f64 / len).sqrt() * jacobi_eval(k, 0.0, 0.0, 2.0 * s - 1.0)).collect()
}

fn orthonormal_at(simplex: &Simplex, p: usize, x: Point) -> Vec<f64> {
    let l = simplex.barycentric(x);
    element_orthonormal(simplex, p, &l)
}

fn orthonormal_with_gradients(simplex: &Simplex, p: usize, x: Point) -> Vec<Dual> {
    let aff = simplex.barycentric_affine();
    let l = simplex.barycentric(x);
    let lambda: Vec<Dual> = (0..3).map(|i| Dual::new(l[i], [aff[i][1], aff[i][2]])).collect();
    element_orthonormal(simplex, p, &lambda)
}

/// Points, weights and edge parameters of a Gauss rule on global edge `e`.
fn edge_points(mesh: &Mesh, e: usize, n: usize) -> Vec<(Point, f64, f64)> {
    let [a, b] = mesh.edges()[e];
    let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
    let len = edge_length(mesh, e);
    let (xs, ws) = gauss_legendre(n);
    xs.iter()
        .zip(&ws)
        .map(|(&xi, &w)| {
            let s = 0.5 * (xi + 1.0);
            ([pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])], 0.5 * w * len, s)
        })
        .collect()
}

struct HdgLocal {
    a_inv: DMatrix<f64>,
    c: DMatrix<f64>,
    b: DVector<f64>,
}

/// Local matrices in the unknowns `(q_x, q_y, u)` (orthonormal basis of
/// `P^p(T)` each) and the trace unknowns of the three edges. The `u` rows are
/// negated so that the local matrix is symmetric.
fn hdg_local(mesh: &Mesh, t: usize, p: usize, tau: f64, f: &impl Fn(Point) -> f64) -> Result<HdgLocal> {
    let s = mesh.simplex(t);
    let n = poly_dim(2, p);
    let m = p + 1;
    let mut a = DMatrix::zeros(3 * n, 3 * n);
    for i in 0..2 * n {
        a[(i, i)] = 1.0;
    }
    let rule = quadrature_rule(2, 2 * p)?;
    for (x, w) in rule.mapped(&s) {
        let o = orthonormal_with_gradients(&s, p, x);
        for i in 0..n {
            for j in 0..n {
                // -(o_j, d_x o_i) couples q_x row i with u column j.
                let gx = -w * o[j].value * o[i].grad[0];
                let gy = -w * o[j].value * o[i].grad[1];
                a[(i, 2 * n + j)] += gx;
                a[(2 * n + j, i)] += gx;
                a[(n + i, 2 * n + j)] += gy;
                a[(2 * n + j, n + i)] += gy;
            }
        }
    }
    let mut c = DMatrix::zeros(3 * n, 3 * m);
    for (le, &e) in mesh.element_edges(t).iter().enumerate() {
        let nrm = outward_normal(mesh, t, e);
        let len = edge_length(mesh, e);
        for (x, w, sp) in edge_points(mesh, e, p + 2) {
            let o = orthonormal_at(&s, p, x);
            let l = edge_legendre(p, len, sp);
            for i in 0..n {
                for j in 0..n {
                    a[(2 * n + i, 2 * n + j)] -= tau * w * o[i] * o[j];
                }
                for k in 0..m {
                    c[(i, le * m + k)] += w * nrm[0] * o[i] * l[k];
                    c[(n + i, le * m + k)] += w * nrm[1] * o[i] * l[k];
                    c[(2 * n + i, le * m + k)] += tau * w * o[i] * l[k];
                }
            }
        }
    }
    let mut b = DVector::zeros(3 * n);
    let load = quadrature_rule(2, error_exactness(p))?;
    for (x, w) in load.mapped(&s) {
        let o = orthonormal_at(&s, p, x);
        let fx = f(x);
        for i in 0..n {
            b[2 * n + i] -= w * fx * o[i];
        }
    }
    let a_inv = a.try_inverse().ok_or_else(|| Error::Singular(format!("HDG local matrix of element {t}")))?;
    Ok(HdgLocal { a_inv, c, b })
}

/// Hybridizable DG with numerical flux `q.n + tau (u - uhat)`, condensed
/// onto the interior edge traces.
pub fn solve_hdg(mesh: &Mesh, f: impl Fn(Point) -> f64, p: usize, tau: f64) -> Result<HDGSolution> {
    require_2d(mesh)?;
    if p < 1 {
        return Err(Error::InvalidArgument(format!("HDG degree must be at least 1, got {p}")));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("stabilization must be positive, got {tau}")));
    }
    let (nt, m, n) = (mesh.num_elements(), p + 1, poly_dim(2, p));
    let mut trace_index = vec![usize::MAX; mesh.num_edges()];
    let mut ntr = 0;
    for e in mesh.interior_edges() {
        trace_index[e] = ntr;
        ntr += 1;
    }
    let global = |e: usize, k: usize| if trace_index[e] == usize::MAX { None } else { Some(trace_index[e] * m + k) };
    let mut k = Triplets::new(ntr * m, ntr * m);
    let mut rhs = vec![0.0; ntr * m];
    let mut locals = Vec::with_capacity(nt);
    for t in 0..nt {
        let loc = hdg_local(mesh, t, p, tau, &f)?;
        // (tau I + C^T A^-1 C) lambda = C^T A^-1 b on the element.
        let ct_ainv = loc.c.transpose() * &loc.a_inv;
        let kt = &ct_ainv * &loc.c;
        let rt = &ct_ainv * &loc.b;
        let edges = mesh.element_edges(t);
        for (li, &ei) in edges.iter().enumerate() {
            for ki in 0..m {
                let Some(gi) = global(ei, ki) else { continue };
                rhs[gi] += rt[li * m + ki];
                k.push(gi, gi, tau);
                for (lj, &ej) in edges.iter().enumerate() {
                    for kj in 0..m {
                        if let Some(gj) = global(ej, kj) {
                            k.push(gi, gj, kt[(li * m + ki, lj * m + kj)]);
                        }
                    }
                }
            }
        }
        locals.push(loc);
    }
    let lambda = if ntr > 0 { SparseCholesky::factor(&k.to_csr())?.solve(&rhs) } else { Vec::new() };
    let mut uhat = vec![0.0; mesh.num_edges() * m];
    for e in 0..mesh.num_edges() {
        for kk in 0..m {
            if let Some(g) = global(e, kk) {
                uhat[e * m + kk] = lambda[g];
            }
        }
    }
    let mut ortho = Vec::with_capacity(nt);
    for (t, loc) in locals.iter().enumerate() {
        let edges = mesh.element_edges(t);
        let lam = DVector::from_iterator(3 * m, (0..3 * m).map(|i| uhat[edges[i / m] * m + i % m]));
        ortho.push(&loc.a_inv * (&loc.b - &loc.c * lam));
    }
    let component = |off: usize| {
        project_broken_with(mesh, p, 2 * p, |t, x| {
            let o = orthonormal_at(&mesh.simplex(t), p, x);
            (0..n).map(|i| ortho[t][off + i] * o[i]).sum()
        })
    };
    Ok(HDGSolution { p, tau, qx: component(0)?, qy: component(n)?, u: component(2 * n)?, uhat })
}

impl HDGSolution {
    /// Trace value at parameter `s` along global edge `e`.
    pub fn trace(&self, mesh: &Mesh, e: usize, s: f64) -> f64 {
        let m = self.p + 1;
        let l = edge_legendre(self.p, edge_length(mesh, e), s);
        (0..m).map(|k| self.uhat[e * m + k] * l[k]).sum()
    }

    /// `max_T |<qhat.n, 1>_{dT} - <f, 1>_T|`.
    pub fn conservation_defect(&self, mesh: &Mesh, f: impl Fn(Point) -> f64) -> Result<f64> {
        self.u.check_mesh(mesh)?;
        let rule = quadrature_rule(2, error_exactness(self.p))?;
        let mut worst: f64 = 0.0;
        for t in 0..mesh.num_elements() {
            let mut flux = 0.0;
            for &e in &mesh.element_edges(t) {
                let nrm = outward_normal(mesh, t, e);
                for (x, w, s) in edge_points(mesh, e, self.p + 2) {
                    let qn = self.qx.evaluate(mesh, t, x) * nrm[0] + self.qy.evaluate(mesh, t, x) * nrm[1];
                    flux += w * (qn + self.tau * (self.u.evaluate(mesh, t, x) - self.trace(mesh, e, s)));
                }
            }
            let load: f64 = rule.mapped(&mesh.simplex(t)).map(|(x, w)| w * f(x)).sum();
            worst = worst.max((flux - load).abs());
        }
        Ok(worst)
    }
}

// ---------------------------------------------------------------------------
// Conforming P1

/// Stiffness matrix and load vector on the interior vertices, with the
/// vertex ids of the unknowns.
pub fn poisson_p1_system(
    mesh: &Mesh,
    f: impl Fn(usize, Point) -> f64,
    exactness: usize,
) -> Result<(CsrMatrix, Vec<f64>, Vec<usize>)> {
    require_2d(mesh)?;
    let interior = mesh.interior_vertices();
    let mut index = vec![usize::MAX; mesh.num_vertices()];
    for (i, &v) in interior.iter().enumerate() {
        index[v] = i;
    }
    let rule = quadrature_rule(2, exactness)?;
    let mut a = Triplets::new(interior.len(), interior.len());
    let mut b = vec![0.0; interior.len()];
    for t in 0..mesh.num_elements() {
        let s = mesh.simplex(t);
        let aff = s.barycentric_affine();
        let area = s.measure();
        let verts = mesh.element(t);
        for i in 0..3 {
            let gi = index[verts[i]];
            if gi == usize::MAX {
                continue;
            }
            for j in 0..3 {
                let gj = index[verts[j]];
                if gj != usize::MAX {
                    a.push(gi, gj, area * (aff[i][1] * aff[j][1] + aff[i][2] * aff[j][2]));
                }
            }
            b[gi] += rule.mapped(&s).map(|(x, w)| w * f(t, x) * s.barycentric(x)[i]).sum::<f64>();
        }
    }
    Ok((a.to_csr(), b, interior))
}

/// Conforming `P1` Galerkin solution of `-div grad w = f`, `w = 0` on the
/// boundary. `f` is given per element so broken fields can be passed as
/// `|t, x| g.evaluate(mesh, t, x)`; the load is integrated with the given
/// quadrature exactness.
pub fn solve_poisson_p1(mesh: &Mesh, f: impl Fn(usize, Point) -> f64, exactness: usize) -> Result<ContinuousField> {
    let (a, b, interior) = poisson_p1_system(mesh, f, exactness)?;
    let x = if interior.is_empty() { Vec::new() } else { SparseCholesky::factor(&a)?.solve(&b) };
    let dofs = DofMap::new(mesh, 1);
    let mut values = vec![0.0; dofs.len()];
    for (&v, xv) in interior.iter().zip(&x) {
        values[dofs.index(DofId::Vertex(v))] = *xv;
    }
    ContinuousField::from_values(mesh, 1, values, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, jittered_delaunay_mesh, refine_uniform};
    use crate::polybasis::project_broken;
    use core::f64::consts::PI;

    fn u_exact(x: Point) -> f64 {
        (PI * x[0]).sin() * (PI * x[1]).sin()
    }

    fn f_exact(x: Point) -> f64 {
        2.0 * PI * PI * u_exact(x)
    }

    fn rate(e: &[f64]) -> f64 {
        (e[e.len() - 2] / e[e.len() - 1]).log2()
    }

    #[test]
    fn hybridized_mixed_solves_the_saddle_system() {
        let m = jittered_delaunay_mesh(5, 4).unwrap();
        let sol = solve_mixed_rt0(&m, f_exact).unwrap();
        let (a, rhs) = mixed_system(&m, f_exact).unwrap();
        let r = a.mul_vec(&sol.stacked());
        let res: f64 = r.iter().zip(&rhs).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let nb: f64 = rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(res <= 1e-10 * nb, "{res}");
        for t in 0..m.num_elements() {
            let mean_f: f64 = element_loads(&m, &f_exact).unwrap()[t] / m.simplex(t).measure();
            assert!((sol.divergence(&m, t) + mean_f).abs() < 1e-10 * (1.0 + mean_f.abs()));
        }
    }

    #[test]
    fn mixed_saddle_inertia() {
        let m = generate_structured(2, 3).unwrap();
        let (a, _) = mixed_system(&m, |_| 1.0).unwrap();
        assert!(a.asymmetry() < 1e-14);
        let ev = a.to_dense().symmetric_eigenvalues();
        assert_eq!(ev.iter().filter(|&&l| l < -1e-12).count(), m.num_elements());
        assert_eq!(ev.iter().filter(|&&l| l.abs() <= 1e-12).count(), 0);
    }

    #[test]
    fn mixed_rates_and_stenberg() {
        let mut mesh = generate_structured(2, 4).unwrap();
        let (mut eu, mut esc, mut est) = (vec![], vec![], vec![]);
        for _ in 0..4 {
            let sol = solve_mixed_rt0(&mesh, f_exact).unwrap();
            let uf = sol.u_field(&mesh).unwrap();
            eu.push(uf.l2_distance(&mesh, u_exact, 12).unwrap());
            let mut pu = project_broken(&mesh, 0, u_exact).unwrap();
            pu.axpy(-1.0, &uf).unwrap();
            esc.push(pu.l2_norm(&mesh).unwrap());
            let st = stenberg_postprocess(&mesh, &sol).unwrap();
            est.push(st.l2_distance(&mesh, u_exact, 12).unwrap());
            let means = st.project(&mesh, 0).unwrap();
            for t in 0..mesh.num_elements() {
                assert!((means.block(t)[0] - sol.u[t]).abs() < 1e-12);
            }
            mesh = refine_uniform(&mesh);
        }
        assert!((rate(&eu) - 1.0).abs() < 0.15, "{eu:?}");
        assert!((rate(&esc) - 2.0).abs() < 0.2, "{esc:?}");
        assert!((rate(&est) - 2.0).abs() < 0.2, "{est:?}");
    }

    #[test]
    fn stenberg_of_trivial_data_is_constant() {
        let m = generate_structured(2, 3).unwrap();
        let sol = MixedSolution { mesh_id: m.id(), sigma: vec![0.0; m.num_edges()], u: vec![0.7; m.num_elements()] };
        let st = stenberg_postprocess(&m, &sol).unwrap();
        assert!(st.l2_distance(&m, |_| 0.7, 4).unwrap() < 1e-13);
    }

    #[test]
    fn hdg_conservation_and_traces() {
        let m = jittered_delaunay_mesh(4, 9).unwrap();
        for p in 1..4 {
            let sol = solve_hdg(&m, f_exact, p, 1.0).unwrap();
            assert!(sol.conservation_defect(&m, f_exact).unwrap() < 1e-9);
            for e in 0..m.num_edges() {
                if m.is_boundary_edge(e) {
                    assert!(sol.uhat[e * (p + 1)..(e + 1) * (p + 1)].iter().all(|v| *v == 0.0));
                }
            }
        }
    }

    #[test]
    fn hdg_rejects_bad_parameters() {
        let m = generate_structured(2, 2).unwrap();
        assert!(matches!(solve_hdg(&m, |_| 1.0, 1, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(solve_hdg(&m, |_| 1.0, 1, -1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(solve_hdg(&m, |_| 1.0, 0, 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn hdg_mean_supercloseness() {
        for p in 1..3 {
            let mut mesh = generate_structured(2, 4).unwrap();
            let mut e = vec![];
            for _ in 0..3 {
                let sol = solve_hdg(&mesh, f_exact, p, 1.0).unwrap();
                let mut d = project_broken(&mesh, 0, u_exact).unwrap();
                d.axpy(-1.0, &sol.u.project(&mesh, 0).unwrap()).unwrap();
                e.push(d.l2_norm(&mesh).unwrap());
                mesh = refine_uniform(&mesh);
            }
            assert!(rate(&e) > (p + 2) as f64 - 0.2, "p={p} {e:?}");
        }
    }

    #[test]
    fn poisson_p1() {
        let m = generate_structured(2, 4).unwrap();
        let (a, _, _) = poisson_p1_system(&m, |_, _| 1.0, 4).unwrap();
        assert!(a.asymmetry() < 1e-14);
        let w = solve_poisson_p1(&m, |_, _| 0.0, 4).unwrap();
        assert!(w.values.iter().all(|v| *v == 0.0));
        let mut mesh = m;
        let mut e = vec![];
        for _ in 0..4 {
            let w = solve_poisson_p1(&mesh, |_, x| f_exact(x), 12).unwrap();
            e.push(w.l2_distance(&mesh, u_exact, 12).unwrap());
            mesh = refine_uniform(&mesh);
        }
        assert!((rate(&e) - 2.0).abs() < 0.15, "{e:?}");
    }
}
