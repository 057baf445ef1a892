//! Quasi-interpolation operators `J0`, `J`, `I0`, `I` into `P^{p+1}_c`.
//!
//! Coefficient `*` of the image of `v` is `<v, phi_*>`. `J`-kinds use weights
//! of degree `p` on the anchor patches, `I`-kinds piecewise constant weights on
//! larger vicinities. The `0` variants only have rows for degrees of freedom
//! off the boundary, so their images vanish on it.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::geometry::Point;
use crate::linalg::{CsrMatrix, Triplets};
use crate::mesh::{element_patch, AnchorTable, Entity, Mesh, Seed};
use crate::polybasis::{
    error_exactness, num_monomials, project_broken_with, quadrature_rule, reference_basis, reference_orthonormal,
    ContinuousField, DiscontinuousField, DofId, DofMap,
};
use crate::weights::{grow_vicinity, patch_dual, WeightFunction};
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    J0,
    J,
    I0,
    I,
}

impl Kind {
    /// Whether boundary degrees of freedom are dropped.
    pub fn zero_trace(self) -> bool {
        matches!(self, Kind::J0 | Kind::I0)
    }

    /// Whether the weights are piecewise constant.
    pub fn piecewise_constant(self) -> bool {
        matches!(self, Kind::I0 | Kind::I)
    }
}

/// Vicinity order for piecewise constant weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PatchPolicy {
    /// Order `p + 1`.
    #[default]
    Default,
    /// Order `p` when `p >= 2`, otherwise as `Default`.
    Small,
}

impl PatchPolicy {
    pub fn order(self, p: usize) -> usize {
        match self {
            PatchPolicy::Small if p >= 2 => p,
            _ => p + 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuasiInterpolator {
    mesh_id: u64,
    kind: Kind,
    policy: PatchPolicy,
    p: usize,
    target: DofMap,
    weights: Vec<WeightFunction>,
    matrix: CsrMatrix,
    mesh_constant: usize,
    max_order: usize,
}

impl QuasiInterpolator {
    pub fn build(mesh: &Mesh, p: usize, kind: Kind, policy: PatchPolicy) -> Result<Self> {
        let anchors = AnchorTable::new(mesh);
        let target = DofMap::new(mesh, p + 1);
        let w = if kind.piecewise_constant() { 0 } else { p };

        // Patch order around each interior vertex.
        let mut vicinity = vec![1usize; mesh.num_vertices()];
        if kind.piecewise_constant() {
            for z in mesh.interior_vertices() {
                vicinity[z] = policy.order(p).max(grow_vicinity(mesh, z, p)?.order);
            }
        }

        // (anchor vertex, order) -> anchor element -> target dofs
        let mut groups: BTreeMap<(usize, usize), BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
        for i in 0..target.len() {
            if kind.zero_trace() && target.is_boundary(mesh, i) {
                continue;
            }
            let entity = match target.id(i) {
                DofId::Vertex(v) => Entity::Vertex(v),
                DofId::Edge(e, _) => Entity::Edge(e),
                DofId::Element(t, _) => Entity::Element(t),
            };
            let an = anchors.get(entity);
            let order = an.order.max(vicinity[an.vertex]);
            let t = anchors.designated_element(entity);
            groups.entry((an.vertex, order)).or_default().entry(t).or_default().push(i);
        }

        let gram = SourceGram::new(mesh.dim(), w);
        let nw = num_monomials(mesh.dim(), w);
        let block = reference_basis(mesh.dim(), w).len();
        let mut weights: Vec<WeightFunction> = Vec::with_capacity(target.len());
        let mut trip = Triplets::new(target.len(), block * mesh.num_elements());
        let mut max_order = 0;
        for ((z, order), by_element) in groups {
            max_order = max_order.max(order);
            let patch = Arc::new(element_patch(mesh, Seed::Vertex(z), order)?);
            let dual = patch_dual(mesh, patch.clone(), w, p + 1)?;
            for (t, rows) in by_element {
                let phi = dual.weights_for(mesh, t)?;
                let local = target.element_dofs(mesh, t);
                for i in rows {
                    let k = local.iter().position(|&g| g == i).expect("dof of its anchor element");
                    let coeffs: Vec<f64> = phi.column(k).iter().copied().collect();
                    for (e, &s) in patch.elements.iter().enumerate() {
                        let r = gram.row(mesh, s, &coeffs[e * nw..(e + 1) * nw]);
                        for (j, v) in r.into_iter().enumerate() {
                            trip.push(i, s * block + j, v);
                        }
                    }
                    weights.push(WeightFunction {
                        dof: target.id(i),
                        patch: patch.clone(),
                        degree: w,
                        anchor_element: t,
                        coeffs,
                    });
                }
            }
        }
        weights.sort_by_key(|wf| target.index(wf.dof));
        Ok(Self {
            mesh_id: mesh.id(),
            kind,
            policy,
            p,
            target,
            weights,
            matrix: trip.to_csr(),
            mesh_constant: anchors.max_order,
            max_order,
        })
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn policy(&self) -> PatchPolicy {
        self.policy
    }

    /// The `p` of the operator; images have degree `p + 1`.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Degree of the weights and of the broken input the matrix acts on.
    pub fn source_degree(&self) -> usize {
        if self.kind.piecewise_constant() {
            0
        } else {
            self.p
        }
    }

    pub fn target(&self) -> &DofMap {
        &self.target
    }

    pub fn weights(&self) -> &[WeightFunction] {
        &self.weights
    }

    pub fn weight(&self, dof: DofId) -> Option<&WeightFunction> {
        let i = self.target.index(dof);
        self.weights.binary_search_by_key(&i, |w| self.target.index(w.dof)).ok().map(|k| &self.weights[k])
    }

    /// Mesh constant `R` of the anchors.
    pub fn mesh_constant(&self) -> usize {
        self.mesh_constant
    }

    /// Largest patch order over all weights.
    pub fn max_patch_order(&self) -> usize {
        self.max_order
    }

    /// Rows index the target [`DofMap`], columns the broken coefficients of
    /// degree [`source_degree`](Self::source_degree).
    pub fn operator_matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn apply(&self, mesh: &Mesh, field: &DiscontinuousField) -> Result<ContinuousField> {
        if field.mesh_id() != self.mesh_id || mesh.id() != self.mesh_id {
            return Err(Error::MeshMismatch);
        }
        let w = self.source_degree();
        let values = if field.degree() == w {
            self.matrix.mul_vec(field.coefficients())
        } else {
            self.matrix.mul_vec(field.project(mesh, w)?.coefficients())
        };
        ContinuousField::from_values(mesh, self.p + 1, values, self.kind.zero_trace())
    }

    /// Applies the operator to a function, projected first onto broken
    /// polynomials of the source degree.
    pub fn apply_fn(&self, mesh: &Mesh, f: impl Fn(Point) -> f64) -> Result<ContinuousField> {
        let w = self.source_degree();
        let src = project_broken_with(mesh, w, error_exactness(self.p), |_, x| f(x))?;
        self.apply(mesh, &src)
    }
}

/// `G[i, a] = <eta_hat_i, o_hat_a>` on the reference element between the
/// shape functions and the orthonormal basis of the same degree.
struct SourceGram {
    g: DMatrix<f64>,
    dim: usize,
    degree: usize,
}

impl SourceGram {
    fn new(dim: usize, degree: usize) -> Self {
        let rule = quadrature_rule(dim, 2 * degree).expect("rule");
        let basis = reference_basis(dim, degree);
        let n = basis.len();
        let mut g = DMatrix::zeros(n, n);
        for (x, wq) in rule.points.iter().zip(&rule.weights) {
            let eta = basis.values(*x);
            let o = reference_orthonormal(dim, degree, &x[0], &x[1]);
            for i in 0..n {
                for a in 0..n {
                    g[(i, a)] += wq * eta[i] * o[a];
                }
            }
        }
        Self { g, dim, degree }
    }

    /// `<eta_i^T, phi|_T>` for the orthonormal coefficients `c` of `phi` on `t`.
    fn row(&self, mesh: &Mesh, t: usize, c: &[f64]) -> Vec<f64> {
        let s = mesh.simplex(t);
        let jac = if self.dim == 1 { s.measure() } else { 2.0 * s.measure() };
        let signs = reference_basis(self.dim, self.degree).flip_signs(mesh.edge_flips(t));
        let sj = jac.sqrt();
        (0..self.g.nrows()).map(|i| sj * signs[i] * (0..c.len()).map(|a| self.g[(i, a)] * c[a]).sum::<f64>()).collect()
    }
}
