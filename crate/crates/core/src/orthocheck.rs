//! Numerical checks of the full-rank property behind the weight systems.
//!
//! For a set of triangles `S` and a degree `n` we look at polynomials `q` of
//! degree `n` on the union with `<q, r>_T = 0` for all `r in P^{n-1}(T)` and
//! every `T in S`. On two triangles sharing an edge this space is trivial
//! except on a few exceptional configurations where it is a line; on a full
//! vertex patch it is always trivial.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::geometry::{Point, Simplex};
use crate::linalg::{angle_to_subspace, kernel_dimension, nullspace, RANK_TOL};
use crate::mesh::{element_patch, Mesh, Seed};
use crate::polybasis::{
    element_orthonormal, jacobi_eval, monomial_index, monomial_values, num_monomials, quadrature_rule,
    triangle_orthopoly_swapped_series, Frame,
};
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Which edge of the reference triangle the neighbour is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Neighbour `conv{(1,0), (0,0), (-c/(d-c), 1/(d-c))}` below the edge on the x-axis.
    Horizontal,
    /// Neighbour `conv{(0,0), (0,1), (1/(d-c), -c/(d-c))}` left of the edge on the y-axis.
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTriangleConfig {
    pub family: Family,
    pub c: f64,
    pub d: f64,
    pub n: usize,
}

impl TwoTriangleConfig {
    pub fn new(family: Family, c: f64, d: f64, n: usize) -> Result<Self> {
        if !(d - c < 0.0) {
            return Err(Error::Degenerate(format!("d - c = {} must be negative", d - c)));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("degree n must be at least 1".into()));
        }
        Ok(Self { family, c, d, n })
    }

    /// The reference triangle and its neighbour, both positively oriented.
    pub fn triangles(&self) -> [Simplex; 2] {
        let r = self.d - self.c;
        let reference = Simplex::triangle([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
        let other = match self.family {
            Family::Horizontal => Simplex::triangle([1.0, 0.0], [0.0, 0.0], [-self.c / r, 1.0 / r]),
            Family::Vertical => Simplex::triangle([0.0, 0.0], [0.0, 1.0], [1.0 / r, -self.c / r]),
        };
        [reference, other]
    }
}

/// `c (d - 1) (1 - (d - c)) (1 + (d - c))`.
pub fn determinant_proxy(c: f64, d: f64) -> f64 {
    c * (d - 1.0) * (1.0 - (d - c)) * (1.0 + (d - c))
}

/// Constraint matrix of the orthogonality conditions, with unknowns the
/// monomial coefficients of `q` in `frame`.
pub fn constraint_matrix(simplices: &[Simplex], n: usize, frame: Frame) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("degree n must be at least 1".into()));
    }
    let rule = quadrature_rule(2, 2 * n + 2)?;
    let nm = num_monomials(2, n);
    let nt = num_monomials(2, n - 1);
    let mut a = DMatrix::zeros(nt * simplices.len(), nm);
    let mut mono = Vec::with_capacity(nm);
    for (k, s) in simplices.iter().enumerate() {
        for (x, w) in rule.mapped(s) {
            monomial_values(2, n, frame.local(x), &mut mono);
            let o = element_orthonormal(s, n - 1, &s.barycentric(x));
            for r in 0..nt {
                for j in 0..nm {
                    a[(k * nt + r, j)] += w * o[r] * mono[j];
                }
            }
        }
    }
    Ok(a)
}

/// Dimension of the joint orthogonal space on arbitrary triangles.
pub fn nullspace_dimension(simplices: &[Simplex], n: usize) -> Result<usize> {
    let frame = Frame::of_simplices(simplices);
    Ok(kernel_dimension(&constraint_matrix(simplices, n, frame)?, RANK_TOL))
}

/// Nullspace of a two-triangle configuration: its dimension and an
/// orthonormal basis of monomial coefficient vectors in [`joint_frame`].
pub fn joint_nullspace(config: &TwoTriangleConfig) -> Result<(usize, DMatrix<f64>)> {
    let tris = config.triangles();
    let a = constraint_matrix(&tris, config.n, joint_frame(config))?;
    let basis = nullspace(&a, RANK_TOL);
    Ok((basis.ncols(), basis))
}

/// The frame in which [`joint_nullspace`] reports coefficients.
pub fn joint_frame(config: &TwoTriangleConfig) -> Frame {
    Frame::of_simplices(&config.triangles())
}

/// Monomial coefficients in `frame` of a polynomial of degree `n` given by
/// point values, fitted on the triangles.
pub fn coefficients_in_frame(
    f: impl Fn(Point) -> f64,
    simplices: &[Simplex],
    n: usize,
    frame: Frame,
) -> Result<Vec<f64>> {
    let rule = quadrature_rule(2, 2 * n)?;
    let nm = num_monomials(2, n);
    let mut g = DMatrix::zeros(nm, nm);
    let mut b = DVector::zeros(nm);
    let mut mono = Vec::with_capacity(nm);
    for s in simplices {
        for (x, w) in rule.mapped(s) {
            monomial_values(2, n, frame.local(x), &mut mono);
            let fx = f(x);
            for i in 0..nm {
                b[i] += w * fx * mono[i];
                for j in 0..nm {
                    g[(i, j)] += w * mono[i] * mono[j];
                }
            }
        }
    }
    let lu = g.lu();
    let c = lu.solve(&b).ok_or_else(|| Error::Singular("monomial Gram".into()))?;
    Ok(c.iter().copied().collect())
}

/// `P_n^{(0,1)}(t)`.
fn p01(n: usize, t: f64) -> f64 {
    jacobi_eval(n, 0.0, 1.0, t)
}

fn q2(c: f64, x: f64, y: f64) -> f64 {
    let p = |k| triangle_orthopoly_swapped_series(2, k, x, y);
    40.0 * p(2) + 24.0 * (c - 1.0) * p(1) + (3.0 * c * c - 6.0 * c + 8.0) * p(0)
}

/// The spanning polynomial of the exceptional one-dimensional cases, where
/// a closed form is known.
pub fn predicted_span(config: &TwoTriangleConfig) -> Option<impl Fn(Point) -> f64> {
    const EPS: f64 = 1e-12;
    let (n, c, d) = (config.n, config.c, config.d);
    let vertical = config.family == Family::Vertical;
    enum Case {
        Axis,
        Diagonal,
        Quadratic,
    }
    let case = if c.abs() < EPS {
        Case::Axis
    } else if (d - 1.0).abs() < EPS {
        Case::Diagonal
    } else if n == 2 && (d - c + 1.0).abs() < EPS {
        Case::Quadratic
    } else {
        return None;
    };
    Some(move |x: Point| {
        let (a, b) = if vertical { (x[1], x[0]) } else { (x[0], x[1]) };
        match case {
            Case::Axis => p01(n, 1.0 - 2.0 * a),
            Case::Diagonal => p01(n, 2.0 * (a + b) - 1.0),
            Case::Quadratic => q2(c, a, b),
        }
    })
}

/// Dimension of `{q in P^n(Omega_z) : <q, P^{n-1}(T)> = 0 for T in omega_z}`.
pub fn patch_nullspace(mesh: &Mesh, z: usize, n: usize) -> Result<usize> {
    let patch = element_patch(mesh, Seed::Vertex(z), 1)?;
    nullspace_dimension(&patch.simplices(mesh), n)
}

/// One line of the verification table.
#[derive(Debug, Clone, PartialEq)]
pub struct AppendixRow {
    pub case: String,
    pub family: Family,
    pub c: f64,
    pub d: f64,
    pub n: usize,
    pub dimension: usize,
    /// Principal angle to the predicted span, when one is known.
    pub angle: Option<f64>,
    /// For the `(c, d) = (1, 0)` line: `|coefficient of x^n|` relative to the
    /// largest coefficient of the spanning vector.
    pub leading: Option<f64>,
    /// Dimension expected from the exceptional-case analysis.
    pub expected: usize,
}

impl AppendixRow {
    pub fn passes(&self) -> bool {
        self.dimension == self.expected && self.angle.is_none_or(|a| a <= 1e-8) && self.leading.is_none_or(|l| l > 1e-8)
    }
}

/// Whether `(c, d)` lies within `margin` of an exceptional locus.
pub fn near_exceptional(c: f64, d: f64, margin: f64) -> bool {
    c.abs() < margin || (d - 1.0).abs() < margin || (d - c + 1.0).abs() < margin
}

/// `grid x grid` parameter pairs with `d - c < 0`, nudged away from the
/// exceptional loci.
pub fn generic_grid(grid: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        for j in 0..grid {
            let mut c = -1.6 + 3.3 * (i as f64 + 0.5) / grid as f64;
            let mut delta = -0.2 - 2.6 * (j as f64 + 0.5) / grid as f64;
            if (delta + 1.0).abs() < 0.05 {
                delta -= 0.1;
            }
            while near_exceptional(c, c + delta, 0.05) {
                c += 0.037;
            }
            out.push((c, c + delta));
        }
    }
    out
}

fn row(case: &str, config: TwoTriangleConfig, expected: usize) -> Result<AppendixRow> {
    let (dimension, basis) = joint_nullspace(&config)?;
    let tris = config.triangles();
    let frame = joint_frame(&config);
    let angle = match predicted_span(&config) {
        Some(f) if dimension > 0 => Some(angle_to_subspace(&basis, &coefficients_in_frame(f, &tris, config.n, frame)?)),
        _ => None,
    };
    let leading = if case == "c=1,d=0" && dimension == 1 {
        // Back to global monomials: only the x^n coefficient scales by 1/scale^n.
        let (a, b) = if config.family == Family::Vertical { (0, config.n) } else { (config.n, 0) };
        let v = basis.column(0);
        let lead = v[monomial_index(2, a, b)].abs();
        Some(lead / v.amax())
    } else {
        None
    };
    Ok(AppendixRow {
        case: case.into(),
        family: config.family,
        c: config.c,
        d: config.d,
        n: config.n,
        dimension,
        angle,
        leading,
        expected,
    })
}

/// Generic grid and exceptional cases for both families at degree `n`.
pub fn appendix_table(n: usize, grid: usize) -> Result<Vec<AppendixRow>> {
    let mut rows = Vec::new();
    for family in [Family::Horizontal, Family::Vertical] {
        for (c, d) in generic_grid(grid) {
            rows.push(row("generic", TwoTriangleConfig::new(family, c, d, n)?, usize::from(n == 1))?);
        }
        rows.push(row("c=0", TwoTriangleConfig::new(family, 0.0, -0.6, n)?, 1)?);
        rows.push(row("d=1", TwoTriangleConfig::new(family, 1.5, 1.0, n)?, 1)?);
        if n == 2 {
            rows.push(row("n=2,d=c-1", TwoTriangleConfig::new(family, 0.5, -0.5, n)?, 1)?);
        }
        if n > 2 {
            rows.push(row("c=1,d=0", TwoTriangleConfig::new(family, 1.0, 0.0, n)?, 1)?);
            rows.push(row("d=c-1", TwoTriangleConfig::new(family, 0.5, -0.5, n)?, 0)?);
        }
    }
    Ok(rows)
}

/// Rank deficiency on a `(c, d)` grid against the determinant proxy:
/// `(c, d, dimension, proxy)` per point. The grid includes points on the loci.
pub fn proxy_sweep(n: usize, steps: usize) -> Result<Vec<(f64, f64, usize, f64)>> {
    let mut out = Vec::new();
    for i in 0..=steps {
        for j in 1..=steps {
            // Half-unit lattice so that every locus is hit exactly.
            let c = -2.0 + 4.0 * i as f64 / steps as f64;
            let d = c - 3.0 * j as f64 / steps as f64;
            let config = TwoTriangleConfig::new(Family::Horizontal, c, d, n)?;
            out.push((c, d, joint_nullspace(&config)?.0, determinant_proxy(c, d)));
        }
    }
    Ok(out)
}

/// Expected rank deficiency of a horizontal two-triangle configuration of
/// degree `n >= 2`.
pub fn expected_deficiency(c: f64, d: f64, n: usize) -> bool {
    const EPS: f64 = 1e-12;
    if c.abs() < EPS || (d - 1.0).abs() < EPS {
        return true;
    }
    if (d - c + 1.0).abs() < EPS {
        return n == 2 || [0.0, 1.0, 2.0].iter().any(|v| (c - v).abs() < EPS);
    }
    false
}
