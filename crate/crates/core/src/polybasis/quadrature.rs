use alloc::vec::Vec;

use super::jacobi::gauss_legendre;
use crate::geometry::{Point, Simplex};
use crate::{Error, Result};

/// Largest exactness degree the collapsed Gauss rules are built for.
pub const MAX_EXACTNESS: usize = 60;

/// Quadrature on the reference simplex: the unit interval, or the triangle
/// with vertices (0,0), (1,0), (0,1).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

/// Gauss-Legendre on the interval, collapsed (Duffy) Gauss-Legendre product on
/// the triangle.
pub fn quadrature_rule(dim: usize, exactness: usize) -> Result<QuadratureRule> {
    if exactness > MAX_EXACTNESS {
        return Err(Error::QuadratureRange { requested: exactness, max: MAX_EXACTNESS });
    }
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidArgument(alloc::format!("dimension {dim}")));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    if dim == 1 {
        let (x, w) = gauss_legendre(exactness / 2 + 1);
        for (x, w) in x.iter().zip(&w) {
            points.push([0.5 * (x + 1.0), 0.0]);
            weights.push(0.5 * w);
        }
    } else {
        // x = s, y = (1 - s) t with Jacobian (1 - s); the s-direction carries
        // one extra degree from the Jacobian.
        let (xs, ws) = gauss_legendre((exactness + 2).div_ceil(2));
        let (xt, wt) = gauss_legendre((exactness + 1).div_ceil(2).max(1));
        for (s, a) in xs.iter().zip(&ws) {
            let s = 0.5 * (s + 1.0);
            for (t, b) in xt.iter().zip(&wt) {
                let t = 0.5 * (t + 1.0);
                points.push([s, (1.0 - s) * t]);
                weights.push(0.25 * a * b * (1.0 - s));
            }
        }
    }
    Ok(QuadratureRule { dim, points, weights, exactness })
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Physical points and weights on `simplex`.
    pub fn mapped<'a>(&'a self, simplex: &'a Simplex) -> impl Iterator<Item = (Point, f64)> + 'a {
        let scale = match self.dim {
            1 => simplex.measure(),
            _ => 2.0 * simplex.measure(),
        };
        self.points.iter().zip(&self.weights).map(move |(xi, w)| (simplex.map_from_reference(*xi), w * scale))
    }
}
