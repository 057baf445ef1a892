use alloc::vec;
use alloc::vec::Vec;

use super::Mesh;
use crate::geometry::Simplex;
use crate::polybasis::Frame;
use crate::{Error, Result};

/// What a patch grows from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seed {
    Vertex(usize),
    Edge(usize),
    Element(usize),
    /// Closure of a union of elements.
    Region(Vec<usize>),
}

/// The elements of `omega^(n)(seed)`, sorted by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchRef {
    pub elements: Vec<usize>,
    pub seed: Seed,
    pub order: usize,
}

impl PatchRef {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, t: usize) -> bool {
        self.elements.binary_search(&t).is_ok()
    }

    pub fn simplices(&self, mesh: &Mesh) -> Vec<Simplex> {
        self.elements.iter().map(|&t| mesh.simplex(t)).collect()
    }

    /// Centroid and diameter of the patch domain.
    pub fn frame(&self, mesh: &Mesh) -> Frame {
        Frame::of_simplices(&self.simplices(mesh))
    }

    pub fn measure(&self, mesh: &Mesh) -> f64 {
        self.elements.iter().map(|&t| mesh.simplex(t).measure()).sum()
    }

    /// Whether the patch domain touches the boundary.
    pub fn touches_boundary(&self, mesh: &Mesh) -> bool {
        self.elements.iter().any(|&t| mesh.element(t).iter().any(|&v| mesh.is_boundary_vertex(v)))
    }

    /// The next patch in the sequence, `omega(Omega^(n))`.
    pub fn grow(&self, mesh: &Mesh) -> PatchRef {
        PatchRef {
            elements: touching(mesh, &vertices_of(mesh, &self.elements)),
            seed: self.seed.clone(),
            order: self.order + 1,
        }
    }
}

fn vertices_of(mesh: &Mesh, elements: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = elements.iter().flat_map(|&t| mesh.element(t).iter().copied()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Elements whose closure meets one of `vertices`. In a conforming mesh two
/// closed simplices intersect iff they share a vertex, so this is the patch
/// of any set whose closure has exactly these vertices.
fn touching(mesh: &Mesh, vertices: &[usize]) -> Vec<usize> {
    let mut mark = vec![false; mesh.num_elements()];
    for &v in vertices {
        for &t in mesh.vertex_elements(v) {
            mark[t] = true;
        }
    }
    (0..mark.len()).filter(|&t| mark[t]).collect()
}

/// `omega^(n)(seed)`: `omega^(1)` are the elements whose closure meets the
/// closure of the seed, and each further order adds the elements touching the
/// previous patch domain.
pub fn element_patch(mesh: &Mesh, seed: Seed, order: usize) -> Result<PatchRef> {
    if order == 0 {
        return Err(Error::InvalidArgument("patch order must be at least 1".into()));
    }
    let seed_vertices: Vec<usize> = match &seed {
        Seed::Vertex(v) => {
            check(*v < mesh.num_vertices(), "vertex")?;
            vec![*v]
        }
        Seed::Edge(e) => {
            check(*e < mesh.num_edges(), "edge")?;
            mesh.edges()[*e].to_vec()
        }
        Seed::Element(t) => {
            check(*t < mesh.num_elements(), "element")?;
            mesh.element(*t).to_vec()
        }
        Seed::Region(ts) => {
            if ts.is_empty() {
                return Err(Error::EmptySeed);
            }
            check(ts.iter().all(|&t| t < mesh.num_elements()), "element")?;
            vertices_of(mesh, ts)
        }
    };
    let mut patch = PatchRef { elements: touching(mesh, &seed_vertices), seed, order: 1 };
    for _ in 1..order {
        patch = patch.grow(mesh);
    }
    Ok(patch)
}

fn check(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!("{what} index out of range")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_structured;

    #[test]
    fn vertex_patches_on_structured_mesh() {
        let m = generate_structured(2, 4).unwrap();
        let z = 2 * 5 + 2;
        let p1 = element_patch(&m, Seed::Vertex(z), 1).unwrap();
        assert_eq!(p1.len(), 6);
        let p2 = element_patch(&m, Seed::Vertex(z), 2).unwrap();
        assert!(p2.len() > p1.len());
        assert!(p1.elements.iter().all(|t| p2.contains(*t)));
        let p4 = element_patch(&m, Seed::Vertex(z), 4).unwrap();
        assert_eq!(p4.len(), m.num_elements());
        assert_eq!(p4.grow(&m).elements, p4.elements);

        let m1 = generate_structured(1, 5).unwrap();
        assert_eq!(element_patch(&m1, Seed::Vertex(2), 1).unwrap().elements, vec![1, 2]);
    }

    #[test]
    fn empty_region_is_rejected() {
        let m = generate_structured(2, 2).unwrap();
        assert_eq!(element_patch(&m, Seed::Region(vec![]), 1).unwrap_err(), Error::EmptySeed);
    }

    #[test]
    fn edge_patch_covers_both_endpoint_stars() {
        let m = generate_structured(2, 3).unwrap();
        for e in 0..m.num_edges() {
            let p = element_patch(&m, Seed::Edge(e), 1).unwrap();
            for &v in &m.edges()[e] {
                assert!(m.vertex_elements(v).iter().all(|t| p.contains(*t)));
            }
        }
    }
}
