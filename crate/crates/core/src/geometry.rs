//! Simplices in one and two dimensions.

#[allow(unused_imports)]
use num_traits::Float;

/// A point in the plane. One-dimensional meshes store `x` and keep `y = 0`.
pub type Point = [f64; 2];

/// An interval (`dim == 1`, first two vertices used) or a triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simplex {
    pub dim: usize,
    pub vertices: [Point; 3],
}

impl Simplex {
    pub fn interval(a: f64, b: f64) -> Self {
        Self { dim: 1, vertices: [[a, 0.0], [b, 0.0], [0.0, 0.0]] }
    }

    pub fn triangle(a: Point, b: Point, c: Point) -> Self {
        Self { dim: 2, vertices: [a, b, c] }
    }

    pub fn num_vertices(&self) -> usize {
        self.dim + 1
    }

    /// Signed measure: signed area for triangles (positive when counterclockwise),
    /// signed length for intervals.
    pub fn signed_measure(&self) -> f64 {
        let [a, b, c] = self.vertices;
        match self.dim {
            1 => b[0] - a[0],
            _ => 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])),
        }
    }

    pub fn measure(&self) -> f64 {
        self.signed_measure().abs()
    }

    pub fn centroid(&self) -> Point {
        let n = self.num_vertices() as f64;
        let mut c = [0.0; 2];
        for v in &self.vertices[..self.num_vertices()] {
            c[0] += v[0] / n;
            c[1] += v[1] / n;
        }
        c
    }

    pub fn diameter(&self) -> f64 {
        let nv = self.num_vertices();
        let mut d: f64 = 0.0;
        for i in 0..nv {
            for j in i + 1..nv {
                d = d.max(distance(self.vertices[i], self.vertices[j]));
            }
        }
        d
    }

    /// Affine coefficients `[a, b, c]` with `lambda_i(x, y) = a + b x + c y`.
    pub fn barycentric_affine(&self) -> [[f64; 3]; 3] {
        let [v0, v1, _] = self.vertices;
        match self.dim {
            1 => {
                let len = v1[0] - v0[0];
                [[v1[0] / len, -1.0 / len, 0.0], [-v0[0] / len, 1.0 / len, 0.0], [0.0; 3]]
            }
            _ => {
                let twice = 2.0 * self.signed_measure();
                let mut out = [[0.0; 3]; 3];
                for i in 0..3 {
                    let p = self.vertices[(i + 1) % 3];
                    let q = self.vertices[(i + 2) % 3];
                    // lambda_i vanishes on the edge p-q and equals one at vertex i.
                    out[i] = [(p[0] * q[1] - q[0] * p[1]) / twice, (p[1] - q[1]) / twice, (q[0] - p[0]) / twice];
                }
                out
            }
        }
    }

    pub fn barycentric(&self, x: Point) -> [f64; 3] {
        let aff = self.barycentric_affine();
        let mut l = [0.0; 3];
        for i in 0..self.num_vertices() {
            l[i] = aff[i][0] + aff[i][1] * x[0] + aff[i][2] * x[1];
        }
        l
    }

    /// Maps reference coordinates (the unit interval or the unit triangle with
    /// vertices (0,0), (1,0), (0,1)) to physical coordinates.
    pub fn map_from_reference(&self, xi: Point) -> Point {
        let [a, b, c] = self.vertices;
        match self.dim {
            1 => [a[0] + xi[0] * (b[0] - a[0]), 0.0],
            _ => [
                a[0] + xi[0] * (b[0] - a[0]) + xi[1] * (c[0] - a[0]),
                a[1] + xi[0] * (b[1] - a[1]) + xi[1] * (c[1] - a[1]),
            ],
        }
    }

    /// Minimum interior angle in degrees (triangles only).
    pub fn min_angle_degrees(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..3 {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % 3];
            let r = self.vertices[(i + 2) % 3];
            let u = [q[0] - p[0], q[1] - p[1]];
            let v = [r[0] - p[0], r[1] - p[1]];
            let cos = (u[0] * v[0] + u[1] * v[1]) / (norm(u) * norm(v));
            m = m.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
        }
        m
    }
}

pub fn distance(a: Point, b: Point) -> f64 {
    norm([a[0] - b[0], a[1] - b[1]])
}

pub fn norm(a: Point) -> f64 {
    (a[0] * a[0] + a[1] * a[1]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barycentric_reproduces_vertices() {
        let s = Simplex::triangle([0.2, 0.1], [1.3, 0.4], [0.5, 1.7]);
        for i in 0..3 {
            let l = s.barycentric(s.vertices[i]);
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((l[j] - expect).abs() < 1e-14);
            }
        }
        let l = s.barycentric(s.centroid());
        assert!(l.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-14));
    }

    #[test]
    fn interval_barycentric() {
        let s = Simplex::interval(0.5, 2.5);
        assert_eq!(s.measure(), 2.0);
        let l = s.barycentric([1.0, 0.0]);
        assert!((l[0] - 0.75).abs() < 1e-15 && (l[1] - 0.25).abs() < 1e-15);
    }
}
