//! Conforming simplicial meshes of the unit interval and the unit square.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::geometry::{Point, Simplex};
use crate::{Error, Result};

mod anchor;
mod patch;
mod random;

pub use anchor::{select_anchor, Anchor, AnchorTable, Entity};
pub use patch::{element_patch, PatchRef, Seed};
pub use random::{jittered_delaunay_mesh, single_interior_vertex_strip};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Immutable mesh with derived incidence.
///
/// Edges are stored with the lower vertex index first; this fixes the global
/// orientation used by edge degrees of freedom. Local edge `e` of a triangle
/// is opposite local vertex `e`.
#[derive(Debug, Clone)]
pub struct Mesh {
    id: u64,
    dim: usize,
    vertices: Vec<Point>,
    elements: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_elements: Vec<Vec<usize>>,
    element_edges: Vec<[usize; 3]>,
    vertex_elements: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
    boundary_edge: Vec<bool>,
    parents: Option<Vec<usize>>,
}

impl PartialEq for Mesh {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.vertices == other.vertices && self.elements == other.elements
    }
}

impl Mesh {
    /// Builds and validates a mesh. Elements list `dim + 1` vertex indices,
    /// counterclockwise in two dimensions.
    pub fn new(dim: usize, vertices: Vec<Point>, elements: Vec<Vec<usize>>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidMesh(format!("unsupported dimension {dim}")));
        }
        let nv = vertices.len();
        let mut els = Vec::with_capacity(elements.len());
        for (t, e) in elements.iter().enumerate() {
            if e.len() != dim + 1 {
                return Err(Error::InvalidMesh(format!("element {t} has {} vertices", e.len())));
            }
            if e.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("element {t} references a missing vertex")));
            }
            let mut arr = [usize::MAX; 3];
            arr[..dim + 1].copy_from_slice(e);
            els.push(arr);
        }
        Self::from_arrays(dim, vertices, els, None)
    }

    fn from_arrays(
        dim: usize,
        vertices: Vec<Point>,
        elements: Vec<[usize; 3]>,
        parents: Option<Vec<usize>>,
    ) -> Result<Self> {
        let nv = vertices.len();
        let nt = elements.len();
        if nt == 0 {
            return Err(Error::InvalidMesh("no elements".into()));
        }
        let mut vertex_elements = vec![Vec::new(); nv];
        for (t, e) in elements.iter().enumerate() {
            let s = simplex_of(dim, &vertices, e);
            if s.signed_measure() <= 0.0 {
                return Err(Error::InvalidMesh(format!("element {t} has non-positive measure")));
            }
            for &v in &e[..dim + 1] {
                vertex_elements[v].push(t);
            }
        }
        if let Some(v) = vertex_elements.iter().position(|l| l.is_empty()) {
            return Err(Error::InvalidMesh(format!("vertex {v} belongs to no element")));
        }

        let mut edges = Vec::new();
        let mut edge_elements: Vec<Vec<usize>> = Vec::new();
        let mut element_edges = vec![[usize::MAX; 3]; nt];
        let mut boundary_vertex = vec![false; nv];
        let mut boundary_edge = Vec::new();
        if dim == 2 {
            let mut map: BTreeMap<[usize; 2], usize> = BTreeMap::new();
            for (t, e) in elements.iter().enumerate() {
                for le in 0..3 {
                    let a = e[(le + 1) % 3];
                    let b = e[(le + 2) % 3];
                    let key = [a.min(b), a.max(b)];
                    let id = *map.entry(key).or_insert_with(|| {
                        edges.push(key);
                        edge_elements.push(Vec::new());
                        edges.len() - 1
                    });
                    edge_elements[id].push(t);
                    element_edges[t][le] = id;
                }
            }
            for (id, l) in edge_elements.iter().enumerate() {
                if l.len() > 2 {
                    return Err(Error::InvalidMesh(format!("edge {:?} shared by {} elements", edges[id], l.len())));
                }
                let b = l.len() == 1;
                boundary_edge.push(b);
                if b {
                    boundary_vertex[edges[id][0]] = true;
                    boundary_vertex[edges[id][1]] = true;
                }
            }
            // Each boundary vertex of a disk-like domain has exactly two boundary edges.
            let mut bcount = vec![0usize; nv];
            for (id, &b) in boundary_edge.iter().enumerate() {
                if b {
                    bcount[edges[id][0]] += 1;
                    bcount[edges[id][1]] += 1;
                }
            }
            if bcount.iter().any(|&c| c != 0 && c != 2) {
                return Err(Error::InvalidMesh("boundary is not a closed manifold curve (hanging vertex?)".into()));
            }
        } else {
            for (v, l) in vertex_elements.iter().enumerate() {
                if l.len() > 2 {
                    return Err(Error::InvalidMesh(format!("vertex {v} shared by {} intervals", l.len())));
                }
                boundary_vertex[v] = l.len() == 1;
            }
        }
        if boundary_vertex.iter().all(|&b| b) {
            return Err(Error::NoInteriorVertex);
        }
        Ok(Self {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            dim,
            vertices,
            elements,
            edges,
            edge_elements,
            element_edges,
            vertex_elements,
            boundary_vertex,
            boundary_edge,
            parents,
        })
    }

    /// Identifier unique to this construction; fields remember it.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn element(&self, t: usize) -> &[usize] {
        &self.elements[t][..self.dim + 1]
    }

    pub fn simplex(&self, t: usize) -> Simplex {
        simplex_of(self.dim, &self.vertices, &self.elements[t])
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_elements(&self, e: usize) -> &[usize] {
        &self.edge_elements[e]
    }

    /// Global edge ids of the local edges of element `t` (two-dimensional meshes).
    pub fn element_edges(&self, t: usize) -> [usize; 3] {
        self.element_edges[t]
    }

    /// `flip[e]` is true when local edge `e` runs against the global orientation,
    /// i.e. its first local endpoint has the larger global index.
    pub fn edge_flips(&self, t: usize) -> [bool; 3] {
        let mut f = [false; 3];
        if self.dim == 2 {
            let e = &self.elements[t];
            for le in 0..3 {
                f[le] = e[(le + 1) % 3] > e[(le + 2) % 3];
            }
        }
        f
    }

    /// Elements containing vertex `v`, in increasing order.
    pub fn vertex_elements(&self, v: usize) -> &[usize] {
        &self.vertex_elements[v]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edge[e]
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.num_vertices()).filter(|&v| !self.boundary_vertex[v]).collect()
    }

    pub fn interior_edges(&self) -> Vec<usize> {
        (0..self.num_edges()).filter(|&e| !self.boundary_edge[e]).collect()
    }

    /// Maximal element diameter.
    pub fn h(&self) -> f64 {
        (0..self.num_elements()).map(|t| self.simplex(t).diameter()).fold(0.0, f64::max)
    }

    /// Parent element in the mesh this one was refined from.
    pub fn parent(&self, t: usize) -> Option<usize> {
        self.parents.as_ref().map(|p| p[t])
    }

    /// Vertex-to-vertex adjacency through shared elements.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.num_vertices()];
        for t in 0..self.num_elements() {
            let e = self.element(t);
            for &a in e {
                for &b in e {
                    if a != b {
                        nb[a].push(b);
                    }
                }
            }
        }
        for l in &mut nb {
            l.sort_unstable();
            l.dedup();
        }
        nb
    }
}

fn simplex_of(dim: usize, vertices: &[Point], e: &[usize; 3]) -> Simplex {
    match dim {
        1 => Simplex::interval(vertices[e[0]][0], vertices[e[1]][0]),
        _ => Simplex::triangle(vertices[e[0]], vertices[e[1]], vertices[e[2]]),
    }
}

/// Uniform mesh of the unit interval (`n` intervals) or the unit square
/// (`2 n^2` triangles, each square cut by the diagonal from its lower-left corner).
pub fn generate_structured(dim: usize, n: usize) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::NoInteriorVertex);
    }
    let h = 1.0 / n as f64;
    match dim {
        1 => {
            let vertices = (0..=n).map(|i| [i as f64 * h, 0.0]).collect();
            let elements = (0..n).map(|i| [i, i + 1, usize::MAX]).collect();
            Mesh::from_arrays(1, vertices, elements, None)
        }
        2 => {
            let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
            for j in 0..=n {
                for i in 0..=n {
                    vertices.push([i as f64 * h, j as f64 * h]);
                }
            }
            let id = |i: usize, j: usize| j * (n + 1) + i;
            let mut elements = Vec::with_capacity(2 * n * n);
            for j in 0..n {
                for i in 0..n {
                    // The two corners cut off by the main diagonal direction get
                    // the other diagonal, so every triangle touches an interior vertex.
                    if (i, j) == (n - 1, 0) || (i, j) == (0, n - 1) {
                        elements.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
                        elements.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
                    } else {
                        elements.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                        elements.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
                    }
                }
            }
            Mesh::from_arrays(2, vertices, elements, None)
        }
        _ => Err(Error::InvalidArgument(format!("dimension {dim}"))),
    }
}

/// Red refinement: every triangle into four similar children, every interval
/// into two halves. Children record their parent.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let nv = mesh.num_vertices();
    let mut vertices = mesh.vertices.clone();
    let mut elements = Vec::with_capacity(mesh.num_elements() * 2usize.pow(mesh.dim as u32));
    let mut parents = Vec::with_capacity(elements.capacity());
    if mesh.dim == 1 {
        for t in 0..mesh.num_elements() {
            let [a, b, _] = mesh.elements[t];
            vertices.push([0.5 * (mesh.vertices[a][0] + mesh.vertices[b][0]), 0.0]);
            let m = nv + t;
            elements.push([a, m, usize::MAX]);
            elements.push([m, b, usize::MAX]);
            parents.extend([t, t]);
        }
    } else {
        for [a, b] in &mesh.edges {
            let (p, q) = (mesh.vertices[*a], mesh.vertices[*b]);
            vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
        }
        for t in 0..mesh.num_elements() {
            let [a, b, c] = mesh.elements[t];
            let [e0, e1, e2] = mesh.element_edges[t];
            let (mbc, mca, mab) = (nv + e0, nv + e1, nv + e2);
            elements.push([a, mab, mca]);
            elements.push([mab, b, mbc]);
            elements.push([mca, mbc, c]);
            elements.push([mab, mbc, mca]);
            parents.extend([t, t, t, t]);
        }
    }
    Mesh::from_arrays(mesh.dim, vertices, elements, Some(parents)).expect("refinement preserves validity")
}
