use alloc::vec;
use alloc::vec::Vec;

use super::Mesh;

/// An interior vertex and the patch order around it that hosts a weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Anchor {
    pub vertex: usize,
    pub order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity {
    Vertex(usize),
    Edge(usize),
    Element(usize),
}

/// Anchors and designated elements for every entity of a mesh.
///
/// Interior vertices are anchored at themselves with order 1. An element is
/// anchored at the interior vertex closest to it in the vertex graph (ties by
/// smallest id); its order is one plus that graph distance, so the element
/// lies in `omega^(r)(z)`. Boundary vertices and all edges use the anchor of
/// their designated element, the smallest element id containing them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchorTable {
    pub vertex: Vec<Anchor>,
    pub edge: Vec<Anchor>,
    pub element: Vec<Anchor>,
    pub vertex_element: Vec<usize>,
    pub edge_element: Vec<usize>,
    /// Mesh constant `R`, the largest order in the table.
    pub max_order: usize,
}

impl AnchorTable {
    pub fn new(mesh: &Mesh) -> Self {
        let nv = mesh.num_vertices();
        let nb = mesh.vertex_neighbors();
        // Level-synchronous multi-source BFS; each vertex keeps the smallest
        // source among those at minimal distance.
        let mut dist = vec![usize::MAX; nv];
        let mut src = vec![usize::MAX; nv];
        let mut front: Vec<usize> = mesh.interior_vertices();
        for &v in &front {
            dist[v] = 0;
            src[v] = v;
        }
        let mut level = 0;
        while !front.is_empty() {
            level += 1;
            let mut next = Vec::new();
            for &u in &front {
                for &w in &nb[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = level;
                        src[w] = src[u];
                        next.push(w);
                    } else if dist[w] == level && src[u] < src[w] {
                        src[w] = src[u];
                    }
                }
            }
            front = next;
        }

        let element: Vec<Anchor> = (0..mesh.num_elements())
            .map(|t| {
                let best = mesh.element(t).iter().map(|&v| (dist[v], src[v])).min().unwrap();
                Anchor { vertex: best.1, order: best.0 + 1 }
            })
            .collect();
        let vertex_element: Vec<usize> = (0..nv).map(|v| mesh.vertex_elements(v)[0]).collect();
        let vertex: Vec<Anchor> =
            (0..nv)
                .map(|v| {
                    if mesh.is_boundary_vertex(v) {
                        element[vertex_element[v]]
                    } else {
                        Anchor { vertex: v, order: 1 }
                    }
                })
                .collect();
        let edge_element: Vec<usize> = (0..mesh.num_edges()).map(|e| mesh.edge_elements(e)[0]).collect();
        let edge: Vec<Anchor> = edge_element.iter().map(|&t| element[t]).collect();
        let max_order = element.iter().chain(&vertex).chain(&edge).map(|a| a.order).max().unwrap_or(1);
        Self { vertex, edge, element, vertex_element, edge_element, max_order }
    }

    pub fn get(&self, entity: Entity) -> Anchor {
        match entity {
            Entity::Vertex(v) => self.vertex[v],
            Entity::Edge(e) => self.edge[e],
            Entity::Element(t) => self.element[t],
        }
    }

    /// The element a weight for `entity` is tied to.
    pub fn designated_element(&self, entity: Entity) -> usize {
        match entity {
            Entity::Vertex(v) => self.vertex_element[v],
            Entity::Edge(e) => self.edge_element[e],
            Entity::Element(t) => t,
        }
    }
}

pub fn select_anchor(mesh: &Mesh, entity: Entity) -> Anchor {
    AnchorTable::new(mesh).get(entity)
}
