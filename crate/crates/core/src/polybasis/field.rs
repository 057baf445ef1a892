//! Global numbering and coefficient containers.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::basis::{reference_basis, ReferenceBasis};
use super::quadrature::{quadrature_rule, QuadratureRule};
use crate::geometry::Point;
use crate::mesh::Mesh;
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// A global degree of freedom of the continuous space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DofId {
    Vertex(usize),
    /// Edge id and mode `0..N`.
    Edge(usize, usize),
    /// Element id and mode `0..M`.
    Element(usize, usize),
}

/// Numbering of `P^p_c`: vertices first, then edge modes, then element modes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    pub basis: ReferenceBasis,
    nv: usize,
    ne: usize,
    nt: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh, degree: usize) -> Self {
        Self {
            basis: reference_basis(mesh.dim(), degree),
            nv: mesh.num_vertices(),
            ne: mesh.num_edges(),
            nt: mesh.num_elements(),
        }
    }

    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    fn nvf(&self) -> usize {
        if self.basis.num_vertex_functions() > 0 {
            self.nv
        } else {
            0
        }
    }

    pub fn len(&self) -> usize {
        self.nvf() + self.ne * self.basis.num_edge_functions() + self.nt * self.basis.num_interior_functions()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, id: DofId) -> usize {
        let n = self.basis.num_edge_functions();
        let m = self.basis.num_interior_functions();
        match id {
            DofId::Vertex(v) => v,
            DofId::Edge(e, j) => self.nvf() + e * n + j,
            DofId::Element(t, k) => self.nvf() + self.ne * n + t * m + k,
        }
    }

    pub fn id(&self, index: usize) -> DofId {
        let n = self.basis.num_edge_functions();
        let m = self.basis.num_interior_functions();
        let nvf = self.nvf();
        if index < nvf {
            DofId::Vertex(index)
        } else if index < nvf + self.ne * n {
            let r = index - nvf;
            DofId::Edge(r / n, r % n)
        } else {
            let r = index - nvf - self.ne * n;
            DofId::Element(r / m, r % m)
        }
    }

    /// Global indices of the local shape functions of element `t`, in the
    /// local order of [`ReferenceBasis::evaluate`].
    pub fn element_dofs(&self, mesh: &Mesh, t: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.basis.len());
        if self.basis.num_vertex_functions() > 0 {
            out.extend(mesh.element(t).iter().map(|&v| self.index(DofId::Vertex(v))));
        }
        let n = self.basis.num_edge_functions();
        if n > 0 {
            for e in mesh.element_edges(t) {
                for j in 0..n {
                    out.push(self.index(DofId::Edge(e, j)));
                }
            }
        }
        for k in 0..self.basis.num_interior_functions() {
            out.push(self.index(DofId::Element(t, k)));
        }
        out
    }

    pub fn is_boundary(&self, mesh: &Mesh, index: usize) -> bool {
        match self.id(index) {
            DofId::Vertex(v) => mesh.is_boundary_vertex(v),
            DofId::Edge(e, _) => mesh.is_boundary_edge(e),
            DofId::Element(..) => false,
        }
    }
}

/// Default exactness for mass and Gram assemblies of degree `p` data.
pub fn mass_exactness(p: usize) -> usize {
    2 * (p + 2)
}

/// Default exactness for errors against smooth functions.
pub fn error_exactness(p: usize) -> usize {
    (2 * p + 6).max(12)
}

/// Element blocks of `P^p(T)` coefficients in the mapped shape-function basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscontinuousField {
    mesh_id: u64,
    degree: usize,
    block: usize,
    coeffs: Vec<f64>,
}

impl DiscontinuousField {
    pub fn zeros(mesh: &Mesh, degree: usize) -> Self {
        let block = reference_basis(mesh.dim(), degree).len();
        Self { mesh_id: mesh.id(), degree, block, coeffs: vec![0.0; block * mesh.num_elements()] }
    }

    pub fn from_coefficients(mesh: &Mesh, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let mut f = Self::zeros(mesh, degree);
        if coeffs.len() != f.coeffs.len() {
            return Err(Error::InvalidArgument(alloc::format!(
                "expected {} coefficients, got {}",
                f.coeffs.len(),
                coeffs.len()
            )));
        }
        f.coeffs = coeffs;
        Ok(f)
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn block_size(&self) -> usize {
        self.block
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn block(&self, t: usize) -> &[f64] {
        &self.coeffs[t * self.block..(t + 1) * self.block]
    }

    pub fn block_mut(&mut self, t: usize) -> &mut [f64] {
        &mut self.coeffs[t * self.block..(t + 1) * self.block]
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.mesh_id == mesh.id() {
            Ok(())
        } else {
            Err(Error::MeshMismatch)
        }
    }

    /// Value at physical point `x` of element `t`.
    pub fn evaluate(&self, mesh: &Mesh, t: usize, x: Point) -> f64 {
        let b = reference_basis(mesh.dim(), self.degree);
        let v = b.element_values(&mesh.simplex(t), mesh.edge_flips(t), x);
        v.iter().zip(self.block(t)).map(|(a, c)| a * c).sum()
    }

    /// `||self - f||` over the mesh.
    pub fn l2_distance(&self, mesh: &Mesh, f: impl Fn(Point) -> f64, exactness: usize) -> Result<f64> {
        self.check_mesh(mesh)?;
        let rule = quadrature_rule(mesh.dim(), exactness)?;
        let tab = ElementTable::new(mesh.dim(), self.degree, &rule);
        let mut s = 0.0;
        for t in 0..mesh.num_elements() {
            let simplex = mesh.simplex(t);
            let signs = tab.basis.flip_signs(mesh.edge_flips(t));
            for (q, (x, w)) in rule.mapped(&simplex).enumerate() {
                let uh: f64 = tab.values[q].iter().zip(&signs).zip(self.block(t)).map(|((v, s), c)| v * s * c).sum();
                s += w * (f(x) - uh).powi(2);
            }
        }
        Ok(s.sqrt())
    }

    pub fn l2_norm(&self, mesh: &Mesh) -> Result<f64> {
        self.l2_distance(mesh, |_| 0.0, mass_exactness(self.degree))
    }

    /// `<self, other>` over the mesh; degrees may differ.
    pub fn inner(&self, mesh: &Mesh, other: &DiscontinuousField) -> Result<f64> {
        self.check_mesh(mesh)?;
        other.check_mesh(mesh)?;
        let rule = quadrature_rule(mesh.dim(), self.degree + other.degree)?;
        let ta = ElementTable::new(mesh.dim(), self.degree, &rule);
        let tb = ElementTable::new(mesh.dim(), other.degree, &rule);
        let mut s = 0.0;
        for t in 0..mesh.num_elements() {
            let flips = mesh.edge_flips(t);
            let (sa, sb) = (ta.basis.flip_signs(flips), tb.basis.flip_signs(flips));
            for (q, (_, w)) in rule.mapped(&mesh.simplex(t)).enumerate() {
                let a: f64 = ta.values[q].iter().zip(&sa).zip(self.block(t)).map(|((v, s), c)| v * s * c).sum();
                let b: f64 = tb.values[q].iter().zip(&sb).zip(other.block(t)).map(|((v, s), c)| v * s * c).sum();
                s += w * a * b;
            }
        }
        Ok(s)
    }

    /// Elementwise L2 projection onto `P^p`.
    pub fn project(&self, mesh: &Mesh, p: usize) -> Result<DiscontinuousField> {
        self.check_mesh(mesh)?;
        let rule = quadrature_rule(mesh.dim(), self.degree + p)?;
        let src = ElementTable::new(mesh.dim(), self.degree, &rule);
        let this = self;
        project_with_table(
            mesh,
            p,
            &rule,
            |t, q, _x, signs_src: &[f64]| {
                src.values[q].iter().zip(signs_src).zip(this.block(t)).map(|((v, s), c)| v * s * c).sum()
            },
            Some(&src),
        )
    }

    pub fn scale(&mut self, s: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
    }

    /// `self + a * other` on the same mesh and degree.
    pub fn axpy(&mut self, a: f64, other: &DiscontinuousField) -> Result<()> {
        if self.mesh_id != other.mesh_id || self.degree != other.degree {
            return Err(Error::MeshMismatch);
        }
        self.coeffs.iter_mut().zip(&other.coeffs).for_each(|(x, y)| *x += a * y);
        Ok(())
    }
}

/// Values of the unflipped shape functions at the points of a rule and the
/// inverse of the reference mass matrix.
pub(crate) struct ElementTable {
    pub basis: ReferenceBasis,
    pub values: Vec<Vec<f64>>,
    pub mass_inverse: DMatrix<f64>,
}

impl ElementTable {
    pub fn new(dim: usize, degree: usize, rule: &QuadratureRule) -> Self {
        let basis = reference_basis(dim, degree);
        let values: Vec<Vec<f64>> = rule.points.iter().map(|x| basis.values(*x)).collect();
        // The reference mass matrix needs exactness 2p; use its own rule.
        let mrule = quadrature_rule(dim, 2 * degree).expect("mass quadrature");
        let n = basis.len();
        let mut m = DMatrix::zeros(n, n);
        for (x, w) in mrule.points.iter().zip(&mrule.weights) {
            let v = basis.values(*x);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += w * v[i] * v[j];
                }
            }
        }
        let mass_inverse = m.cholesky().expect("reference mass matrix is SPD").inverse();
        Self { basis, values, mass_inverse }
    }
}

fn reference_scale(dim: usize, measure: f64) -> f64 {
    if dim == 1 {
        measure
    } else {
        2.0 * measure
    }
}

/// Shared projection loop; `sample(t, q, x, source_signs)` returns the source
/// value at quadrature point `q` of element `t`.
fn project_with_table<F>(
    mesh: &Mesh,
    p: usize,
    rule: &QuadratureRule,
    sample: F,
    src: Option<&ElementTable>,
) -> Result<DiscontinuousField>
where
    F: Fn(usize, usize, Point, &[f64]) -> f64,
{
    let tab = ElementTable::new(mesh.dim(), p, rule);
    let mut out = DiscontinuousField::zeros(mesh, p);
    let n = tab.basis.len();
    let mut b = DVector::zeros(n);
    for t in 0..mesh.num_elements() {
        let simplex = mesh.simplex(t);
        let flips = mesh.edge_flips(t);
        let signs = tab.basis.flip_signs(flips);
        let src_signs = src.map(|s| s.basis.flip_signs(flips)).unwrap_or_default();
        let jac = reference_scale(mesh.dim(), simplex.measure());
        b.fill(0.0);
        for (q, (x, w)) in rule.mapped(&simplex).enumerate() {
            let f = sample(t, q, x, &src_signs);
            for i in 0..n {
                b[i] += w * f * tab.values[q][i];
            }
        }
        let c = &tab.mass_inverse * &b;
        for (i, v) in out.block_mut(t).iter_mut().enumerate() {
            *v = c[i] * signs[i] / jac;
        }
    }
    Ok(out)
}

/// Elementwise L2 projection `Pi^p` of a function given per element.
pub fn project_broken_with(
    mesh: &Mesh,
    p: usize,
    exactness: usize,
    f: impl Fn(usize, Point) -> f64,
) -> Result<DiscontinuousField> {
    let rule = quadrature_rule(mesh.dim(), exactness)?;
    project_with_table(mesh, p, &rule, |t, _, x, _| f(t, x), None)
}

/// `Pi^p f` with the default error exactness.
pub fn project_broken(mesh: &Mesh, p: usize, f: impl Fn(Point) -> f64) -> Result<DiscontinuousField> {
    project_broken_with(mesh, p, error_exactness(p), |_, x| f(x))
}

/// Coefficients of `P^p_c` indexed by a [`DofMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousField {
    mesh_id: u64,
    pub dofs: DofMap,
    pub values: Vec<f64>,
    pub boundary_constrained: bool,
}

impl ContinuousField {
    pub fn zeros(mesh: &Mesh, degree: usize, boundary_constrained: bool) -> Self {
        let dofs = DofMap::new(mesh, degree);
        Self { mesh_id: mesh.id(), values: vec![0.0; dofs.len()], dofs, boundary_constrained }
    }

    pub fn from_values(mesh: &Mesh, degree: usize, values: Vec<f64>, boundary_constrained: bool) -> Result<Self> {
        let mut f = Self::zeros(mesh, degree, boundary_constrained);
        if values.len() != f.values.len() {
            return Err(Error::InvalidArgument(alloc::format!(
                "expected {} values, got {}",
                f.values.len(),
                values.len()
            )));
        }
        f.values = values;
        Ok(f)
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    pub fn degree(&self) -> usize {
        self.dofs.degree()
    }

    pub fn evaluate(&self, mesh: &Mesh, t: usize, x: Point) -> f64 {
        let v = self.dofs.basis.element_values(&mesh.simplex(t), mesh.edge_flips(t), x);
        self.dofs.element_dofs(mesh, t).iter().zip(&v).map(|(&i, b)| self.values[i] * b).sum()
    }

    /// The same function as a broken field; element blocks are gathered, since
    /// the element basis is the restriction of the global one.
    pub fn to_broken(&self, mesh: &Mesh) -> Result<DiscontinuousField> {
        if self.mesh_id != mesh.id() {
            return Err(Error::MeshMismatch);
        }
        let mut out = DiscontinuousField::zeros(mesh, self.degree());
        for t in 0..mesh.num_elements() {
            let idx = self.dofs.element_dofs(mesh, t);
            for (c, &i) in out.block_mut(t).iter_mut().zip(&idx) {
                *c = self.values[i];
            }
        }
        Ok(out)
    }

    pub fn l2_distance(&self, mesh: &Mesh, f: impl Fn(Point) -> f64, exactness: usize) -> Result<f64> {
        self.to_broken(mesh)?.l2_distance(mesh, f, exactness)
    }
}
