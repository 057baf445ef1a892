//! Polynomials in shifted and scaled monomials.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use super::ring::Ring;
use crate::geometry::{distance, Point, Simplex};

/// Local coordinates `(x - center) / scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub center: Point,
    pub scale: f64,
}

impl Frame {
    pub const UNIT: Frame = Frame { center: [0.0, 0.0], scale: 1.0 };

    pub fn new(center: Point, scale: f64) -> Self {
        Self { center, scale }
    }

    /// Measure-weighted centroid and diameter of a union of simplices.
    pub fn of_simplices(simplices: &[Simplex]) -> Self {
        let mut area = 0.0;
        let mut c = [0.0; 2];
        let mut pts: Vec<Point> = Vec::new();
        for s in simplices {
            let m = s.measure();
            let g = s.centroid();
            area += m;
            c[0] += m * g[0];
            c[1] += m * g[1];
            pts.extend_from_slice(&s.vertices[..s.num_vertices()]);
        }
        if area > 0.0 {
            c[0] /= area;
            c[1] /= area;
        }
        let mut diam: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                diam = diam.max(distance(pts[i], pts[j]));
            }
        }
        Self { center: c, scale: if diam > 0.0 { diam } else { 1.0 } }
    }

    pub fn local(&self, x: Point) -> Point {
        [(x[0] - self.center[0]) / self.scale, (x[1] - self.center[1]) / self.scale]
    }
}

pub fn num_monomials(dim: usize, degree: usize) -> usize {
    match dim {
        1 => degree + 1,
        _ => (degree + 1) * (degree + 2) / 2,
    }
}

/// Exponents `(a, b)` in graded order, so lower degrees form a prefix.
pub fn monomial_exponents(dim: usize, degree: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(num_monomials(dim, degree));
    for s in 0..=degree {
        if dim == 1 {
            out.push((s, 0));
        } else {
            for b in 0..=s {
                out.push((s - b, b));
            }
        }
    }
    out
}

pub fn monomial_index(dim: usize, a: usize, b: usize) -> usize {
    match dim {
        1 => a,
        _ => {
            let s = a + b;
            s * (s + 1) / 2 + b
        }
    }
}

/// Values of all monomials up to `degree` at local coordinates `xi`.
pub fn monomial_values(dim: usize, degree: usize, xi: Point, out: &mut Vec<f64>) {
    out.clear();
    let mut px = vec![1.0; degree + 1];
    let mut py = vec![1.0; degree + 1];
    for i in 1..=degree {
        px[i] = px[i - 1] * xi[0];
        py[i] = py[i - 1] * xi[1];
    }
    for s in 0..=degree {
        if dim == 1 {
            out.push(px[s]);
        } else {
            for b in 0..=s {
                out.push(px[s - b] * py[b]);
            }
        }
    }
}

/// A polynomial stored as coefficients of `xi^a zeta^b` where
/// `(xi, zeta) = frame.local(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPolynomial {
    dim: usize,
    degree: usize,
    frame: Frame,
    coeffs: Vec<f64>,
}

impl LocalPolynomial {
    pub fn zero(dim: usize, degree: usize, frame: Frame) -> Self {
        Self { dim, degree, frame, coeffs: vec![0.0; num_monomials(dim, degree)] }
    }

    pub fn constant(dim: usize, frame: Frame, c: f64) -> Self {
        Self { dim, degree: 0, frame, coeffs: vec![c] }
    }

    pub fn from_coefficients(dim: usize, degree: usize, frame: Frame, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), num_monomials(dim, degree), "coefficient count");
        Self { dim, degree, frame, coeffs }
    }

    /// The affine function `a + b x + c y` in physical coordinates.
    pub fn affine_function(dim: usize, frame: Frame, a: f64, b: f64, c: f64) -> Self {
        let [cx, cy] = frame.center;
        let l = frame.scale;
        let mut coeffs = vec![a + b * cx + c * cy, b * l];
        if dim == 2 {
            coeffs.push(c * l);
        }
        Self { dim, degree: 1, frame, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn evaluate(&self, x: Point) -> f64 {
        let mut buf = Vec::with_capacity(self.coeffs.len());
        monomial_values(self.dim, self.degree, self.frame.local(x), &mut buf);
        buf.iter().zip(&self.coeffs).map(|(m, c)| m * c).sum()
    }

    /// Evaluates at ring-valued local coordinates.
    pub fn evaluate_in<R: Ring>(&self, xi: &R, zeta: &R) -> R {
        let mut px = vec![xi.constant_like(1.0)];
        let mut py = vec![xi.constant_like(1.0)];
        for i in 1..=self.degree {
            px.push(px[i - 1].clone() * xi.clone());
            py.push(py[i - 1].clone() * zeta.clone());
        }
        let mut acc = xi.constant_like(0.0);
        for (k, &(a, b)) in monomial_exponents(self.dim, self.degree).iter().enumerate() {
            if self.coeffs[k] != 0.0 {
                acc = acc + px[a].clone() * py[b].clone() * self.coeffs[k];
            }
        }
        acc
    }

    /// The same polynomial re-expressed in `target`. Polynomials have global
    /// support, so this is the canonical extension from one domain to a larger one.
    pub fn extend(&self, target: Frame) -> LocalPolynomial {
        let s = target.scale / self.frame.scale;
        let xi = LocalPolynomial {
            dim: self.dim,
            degree: 1,
            frame: target,
            coeffs: if self.dim == 1 {
                vec![(target.center[0] - self.frame.center[0]) / self.frame.scale, s]
            } else {
                vec![(target.center[0] - self.frame.center[0]) / self.frame.scale, s, 0.0]
            },
        };
        let zeta = LocalPolynomial {
            dim: self.dim,
            degree: 1,
            frame: target,
            coeffs: if self.dim == 1 {
                vec![0.0, 0.0]
            } else {
                vec![(target.center[1] - self.frame.center[1]) / self.frame.scale, 0.0, s]
            },
        };
        let mut out = self.evaluate_in(&xi, &zeta);
        out.raise_degree(self.degree);
        out.truncate(self.degree);
        out
    }

    /// Pads with zero coefficients up to `degree`.
    pub fn raise_degree(&mut self, degree: usize) {
        if degree > self.degree {
            self.coeffs.resize(num_monomials(self.dim, degree), 0.0);
            self.degree = degree;
        }
    }

    /// Drops all terms above `degree`.
    pub fn truncate(&mut self, degree: usize) {
        if degree < self.degree {
            self.coeffs.truncate(num_monomials(self.dim, degree));
            self.degree = degree;
        }
    }

    /// L2 inner product over a union of simplices with a reference rule.
    pub fn l2_inner(&self, other: &LocalPolynomial, simplices: &[Simplex], rule: &super::QuadratureRule) -> f64 {
        let mut s = 0.0;
        for simplex in simplices {
            for (x, w) in rule.mapped(simplex) {
                s += w * self.evaluate(x) * other.evaluate(x);
            }
        }
        s
    }

    fn combine(mut self, other: &LocalPolynomial, sign: f64) -> LocalPolynomial {
        debug_assert_eq!(self.frame, other.frame, "polynomials in different frames");
        self.raise_degree(other.degree);
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += sign * o;
        }
        self
    }
}

impl Add for LocalPolynomial {
    type Output = LocalPolynomial;
    fn add(self, o: LocalPolynomial) -> LocalPolynomial {
        self.combine(&o, 1.0)
    }
}

impl Sub for LocalPolynomial {
    type Output = LocalPolynomial;
    fn sub(self, o: LocalPolynomial) -> LocalPolynomial {
        self.combine(&o, -1.0)
    }
}

impl Mul for LocalPolynomial {
    type Output = LocalPolynomial;
    fn mul(self, o: LocalPolynomial) -> LocalPolynomial {
        debug_assert_eq!(self.frame, o.frame, "polynomials in different frames");
        let degree = self.degree + o.degree;
        let mut out = LocalPolynomial::zero(self.dim, degree, self.frame);
        let ea = monomial_exponents(self.dim, self.degree);
        let eb = monomial_exponents(o.dim, o.degree);
        for (i, &(a1, b1)) in ea.iter().enumerate() {
            let ci = self.coeffs[i];
            if ci == 0.0 {
                continue;
            }
            for (j, &(a2, b2)) in eb.iter().enumerate() {
                out.coeffs[monomial_index(self.dim, a1 + a2, b1 + b2)] += ci * o.coeffs[j];
            }
        }
        out
    }
}

impl Mul<f64> for LocalPolynomial {
    type Output = LocalPolynomial;
    fn mul(mut self, s: f64) -> LocalPolynomial {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
        self
    }
}

impl Ring for LocalPolynomial {
    fn constant_like(&self, c: f64) -> Self {
        LocalPolynomial::constant(self.dim, self.frame, c)
    }
}
