//! Orthogonal polynomials on the reference triangle and orthonormal element
//! bases built from them.

use alloc::vec::Vec;

use super::jacobi::{factorial, jacobi_all, jacobi_eval, pochhammer};
use super::ring::Ring;
use crate::geometry::Simplex;
#[allow(unused_imports)]
use num_traits::Float;

/// `P_{n,k}(x, y) = P_{n-k}^{(0,2k+1)}(1-2x) (1-x)^k P_k(1 - 2y/(1-x))`.
pub fn triangle_orthopoly(n: usize, k: usize, x: f64, y: f64) -> f64 {
    assert!(k <= n, "k must not exceed n");
    jacobi_eval(n - k, 0.0, 2.0 * k as f64 + 1.0, 1.0 - 2.0 * x) * scaled_legendre(k, &x, &y).pop().unwrap()
}

/// `p_{n,k}(x, y) = P_{n,k}(y, x)` from its double hypergeometric series.
pub fn triangle_orthopoly_swapped_series(n: usize, k: usize, x: f64, y: f64) -> f64 {
    let mut outer = 0.0;
    let mut ym = 1.0;
    for m in 0..=n - k {
        let cm = pochhammer(k as f64 - n as f64, m) * pochhammer((n + k + 2) as f64, m) / (factorial(m) * factorial(m));
        let mut inner = 0.0;
        for j in 0..=k {
            let cj = pochhammer(-(k as f64), j) * pochhammer(k as f64 + 1.0, j) / (factorial(j) * factorial(j));
            inner += cj * x.powi(j as i32) * (1.0 - y).powi((k - j) as i32);
        }
        outer += cm * ym * inner;
        ym *= y;
    }
    outer
}

/// `(1-x)^k P_k(1 - 2y/(1-x))` for `k = 0..=kmax`, without the division.
fn scaled_legendre<R: Ring>(kmax: usize, x: &R, y: &R) -> Vec<R> {
    let v = x.affine(-1.0, 1.0);
    let u = v.clone() - y.clone() * 2.0;
    let v2 = v.clone() * v;
    let mut q = Vec::with_capacity(kmax + 1);
    q.push(x.constant_like(1.0));
    if kmax >= 1 {
        q.push(u.clone());
    }
    for k in 1..kmax {
        let kf = k as f64;
        let next =
            (u.clone() * q[k].clone() * (2.0 * kf + 1.0) - v2.clone() * q[k - 1].clone() * kf) * (1.0 / (kf + 1.0));
        q.push(next);
    }
    q
}

/// Number of polynomials of total degree at most `degree` in `dim` variables.
pub fn poly_dim(dim: usize, degree: usize) -> usize {
    super::num_monomials(dim, degree)
}

/// Orthonormal basis of `P^degree` on the reference simplex, ordered by
/// `(n, k)` with `n = 0..=degree`, `k = 0..=n`, evaluated at reference
/// coordinates in any ring.
pub fn reference_orthonormal<R: Ring>(dim: usize, degree: usize, x: &R, y: &R) -> Vec<R> {
    let mut out = Vec::with_capacity(poly_dim(dim, degree));
    if dim == 1 {
        let t = x.affine(2.0, -1.0);
        for (n, p) in jacobi_all(degree, 0.0, 0.0, &t).into_iter().enumerate() {
            out.push(p * (2.0 * n as f64 + 1.0).sqrt());
        }
        return out;
    }
    let q = scaled_legendre(degree, x, y);
    let t = x.affine(-2.0, 1.0);
    let outer: Vec<Vec<R>> = (0..=degree).map(|k| jacobi_all(degree - k, 0.0, 2.0 * k as f64 + 1.0, &t)).collect();
    for n in 0..=degree {
        for k in 0..=n {
            let norm = ((2 * k + 1) as f64 * (2 * n + 2) as f64).sqrt();
            out.push(outer[k][n - k].clone() * q[k].clone() * norm);
        }
    }
    out
}

/// Orthonormal basis of `P^degree(T)` in the `L2(T)` inner product, evaluated
/// from barycentric coordinates of `simplex` given in any ring.
pub fn element_orthonormal<R: Ring>(simplex: &Simplex, degree: usize, lambda: &[R]) -> Vec<R> {
    let scale = match simplex.dim {
        1 => 1.0 / simplex.measure().sqrt(),
        _ => 1.0 / (2.0 * simplex.measure()).sqrt(),
    };
    let y = if simplex.dim == 1 { lambda[1].constant_like(0.0) } else { lambda[2].clone() };
    reference_orthonormal(simplex.dim, degree, &lambda[1], &y).into_iter().map(|v| v * scale).collect()
}
