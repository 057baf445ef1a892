//! Hierarchical shape functions in barycentric form.
//!
//! Degree `p >= 1` on a triangle:
//! * vertex functions `lambda_i`;
//! * on the edge opposite local vertex `e`, with endpoints `a, b` ordered so
//!   that `a` has the smaller global vertex id,
//!   `4 lambda_a lambda_b P^{(1,1)}_{j-1}(lambda_b - lambda_a) / j`, `j = 1..p-1`;
//! * interior functions
//!   `27 lambda_0 lambda_1 lambda_2 P_a(lambda_1 - lambda_0) P_b(2 lambda_2 - 1)`, `a + b <= p - 3`.
//!
//! On an interval the interior functions use the edge formula. Degree 0 is the
//! single constant.

use alloc::vec::Vec;

use super::jacobi::jacobi_all;
use super::ring::{Dual, Ring};
use crate::geometry::{Point, Simplex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceBasis {
    pub dim: usize,
    pub degree: usize,
}

/// Local edge `e` of a triangle joins local vertices `(e+1) % 3` and `(e+2) % 3`.
pub const fn edge_endpoints(e: usize) -> (usize, usize) {
    ((e + 1) % 3, (e + 2) % 3)
}

pub fn reference_basis(dim: usize, degree: usize) -> ReferenceBasis {
    ReferenceBasis { dim, degree }
}

impl ReferenceBasis {
    pub fn num_vertex_functions(&self) -> usize {
        if self.degree == 0 {
            0
        } else {
            self.dim + 1
        }
    }

    /// Functions per edge (`N_p`); zero in one dimension.
    pub fn num_edge_functions(&self) -> usize {
        if self.dim == 1 {
            0
        } else {
            self.degree.saturating_sub(1)
        }
    }

    /// Interior functions (`M_p`); for degree 0 the constant counts as interior.
    pub fn num_interior_functions(&self) -> usize {
        match (self.dim, self.degree) {
            (_, 0) => 1,
            (1, p) => p - 1,
            (_, p) if p >= 3 => (p - 1) * (p - 2) / 2,
            _ => 0,
        }
    }

    pub fn len(&self) -> usize {
        self.num_vertex_functions() + (self.dim + 1) * self.num_edge_functions() + self.num_interior_functions()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All shape functions from barycentric coordinates given in any ring.
    /// `flip[e]` swaps the endpoints of local edge `e`.
    pub fn evaluate<R: Ring>(&self, lambda: &[R], flip: [bool; 3]) -> Vec<R> {
        let p = self.degree;
        let one = lambda[0].constant_like(1.0);
        let mut out = Vec::with_capacity(self.len());
        if p == 0 {
            out.push(one);
            return out;
        }
        out.extend(lambda[..self.dim + 1].iter().cloned());
        if self.dim == 1 {
            if p >= 2 {
                let t = lambda[1].clone() - lambda[0].clone();
                let bub = lambda[0].clone() * lambda[1].clone() * 4.0;
                for (j, k) in jacobi_all(p - 2, 1.0, 1.0, &t).into_iter().enumerate() {
                    out.push(bub.clone() * k * (1.0 / (j + 1) as f64));
                }
            }
            return out;
        }
        if p >= 2 {
            for e in 0..3 {
                let (mut a, mut b) = edge_endpoints(e);
                if flip[e] {
                    core::mem::swap(&mut a, &mut b);
                }
                let t = lambda[b].clone() - lambda[a].clone();
                let bub = lambda[a].clone() * lambda[b].clone() * 4.0;
                for (j, k) in jacobi_all(p - 2, 1.0, 1.0, &t).into_iter().enumerate() {
                    out.push(bub.clone() * k * (1.0 / (j + 1) as f64));
                }
            }
        }
        if p >= 3 {
            let bub = lambda[0].clone() * lambda[1].clone() * lambda[2].clone() * 27.0;
            let u = lambda[1].clone() - lambda[0].clone();
            let v = lambda[2].affine(2.0, -1.0);
            let lu = jacobi_all(p - 3, 0.0, 0.0, &u);
            let lv = jacobi_all(p - 3, 0.0, 0.0, &v);
            for s in 0..=p - 3 {
                for b in 0..=s {
                    out.push(bub.clone() * lu[s - b].clone() * lv[b].clone());
                }
            }
        }
        out
    }

    /// Reversing an edge maps `t` to `-t` in the edge kernels, so flipped
    /// shape functions are the unflipped ones times these signs.
    pub fn flip_signs(&self, flip: [bool; 3]) -> Vec<f64> {
        let mut s = alloc::vec![1.0; self.len()];
        let n = self.num_edge_functions();
        let off = self.num_vertex_functions();
        for e in 0..3 {
            if flip[e] {
                for j in (1..n).step_by(2) {
                    s[off + e * n + j] = -1.0;
                }
            }
        }
        s
    }

    /// Values on the reference simplex (no edge flips).
    pub fn values(&self, xi: Point) -> Vec<f64> {
        let lambda = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
        let lambda = if self.dim == 1 { [1.0 - xi[0], xi[0], 0.0] } else { lambda };
        self.evaluate(&lambda, [false; 3])
    }

    /// Values on a physical element at physical point `x`.
    pub fn element_values(&self, simplex: &Simplex, flip: [bool; 3], x: Point) -> Vec<f64> {
        self.evaluate(&simplex.barycentric(x), flip)
    }

    /// Values and physical gradients on an element.
    pub fn element_duals(&self, simplex: &Simplex, flip: [bool; 3], x: Point) -> Vec<Dual> {
        let aff = simplex.barycentric_affine();
        let mut lambda = [Dual::default(); 3];
        for i in 0..self.dim + 1 {
            lambda[i] = Dual::new(aff[i][0] + aff[i][1] * x[0] + aff[i][2] * x[1], [aff[i][1], aff[i][2]]);
        }
        self.evaluate(&lambda, flip)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_polynomial_dimension() {
        for p in 0..8 {
            assert_eq!(reference_basis(2, p).len(), (p + 1) * (p + 2) / 2);
            assert_eq!(reference_basis(1, p).len(), p + 1);
        }
        let b = reference_basis(2, 3);
        assert_eq!((b.num_vertex_functions(), b.num_edge_functions(), b.num_interior_functions()), (3, 2, 1));
    }

    #[test]
    fn vertex_functions_form_identity() {
        let b = reference_basis(2, 4);
        for (i, v) in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]].iter().enumerate() {
            let vals = b.values(*v);
            for j in 0..vals.len() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((vals[j] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn edge_and_interior_traces() {
        let b = reference_basis(2, 5);
        let n = b.num_edge_functions();
        for s in [0.1, 0.37, 0.8] {
            // Points on local edges 0, 1, 2.
            let on_edge = [[1.0 - s, s], [0.0, s], [s, 0.0]];
            for (e, x) in on_edge.iter().enumerate() {
                let vals = b.values(*x);
                for e2 in 0..3 {
                    for j in 0..n {
                        let v = vals[3 + e2 * n + j];
                        if e2 != e {
                            assert!(v.abs() < 1e-15);
                        }
                    }
                }
                for v in &vals[3 + 3 * n..] {
                    assert!(v.abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn linearly_independent_on_reference() {
        use nalgebra::DMatrix;
        let b = reference_basis(2, 5);
        let q = crate::polybasis::quadrature_rule(2, 10).unwrap();
        let n = b.len();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (x, w) in q.points.iter().zip(&q.weights) {
            let v = b.values(*x);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += w * v[i] * v[j];
                }
            }
        }
        assert!(m.cholesky().is_some());
    }

    #[test]
    fn flips_are_sign_changes() {
        let s = Simplex::triangle([0.1, 0.2], [1.0, 0.3], [0.4, 1.1]);
        let b = reference_basis(2, 6);
        let flip = [true, false, true];
        let x = [0.45, 0.5];
        let a = b.element_values(&s, flip, x);
        let u = b.element_values(&s, [false; 3], x);
        let sg = b.flip_signs(flip);
        for i in 0..a.len() {
            assert!((a[i] - sg[i] * u[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn duals_carry_gradients() {
        let s = Simplex::triangle([0.1, 0.2], [1.0, 0.3], [0.4, 1.1]);
        let b = reference_basis(2, 4);
        let x = [0.45, 0.5];
        let d = b.element_duals(&s, [true, false, true], x);
        let h = 1e-6;
        let vp = b.element_values(&s, [true, false, true], [x[0] + h, x[1]]);
        let vm = b.element_values(&s, [true, false, true], [x[0] - h, x[1]]);
        for i in 0..d.len() {
            assert!((d[i].grad[0] - (vp[i] - vm[i]) / (2.0 * h)).abs() < 1e-7);
        }
    }
}
