use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{generate_structured, Mesh};
use crate::geometry::{Point, Simplex};
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

const MIN_ANGLE_DEGREES: f64 = 10.0;
const MAX_ATTEMPTS: usize = 200;

/// Unit-square mesh from a structured `n x n` grid whose interior vertices are
/// moved by at most `0.25 h`, then retriangulated to Delaunay by edge flips.
/// Draws with a minimal angle below 10 degrees are rejected and redrawn.
pub fn jittered_delaunay_mesh(n: usize, seed: u64) -> Result<Mesh> {
    let base = generate_structured(2, n)?;
    let h = 1.0 / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let mut vertices: Vec<Point> = base.vertices().to_vec();
        for v in base.interior_vertices() {
            let r = 0.25 * h * rng.random::<f64>().sqrt();
            let a = 2.0 * core::f64::consts::PI * rng.random::<f64>();
            vertices[v][0] += r * a.cos();
            vertices[v][1] += r * a.sin();
        }
        let mut tris: Vec<[usize; 3]> =
            (0..base.num_elements()).map(|t| [base.element(t)[0], base.element(t)[1], base.element(t)[2]]).collect();
        lawson_flips(&vertices, &mut tris);
        let ok = tris.iter().all(|t| {
            let s = Simplex::triangle(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            s.signed_measure() > 0.0 && s.min_angle_degrees() >= MIN_ANGLE_DEGREES
        });
        if ok {
            return Mesh::new(2, vertices, tris.iter().map(|t| t.to_vec()).collect());
        }
    }
    Err(Error::Degenerate("no admissible jittered mesh within the attempt budget".into()))
}

/// Positive when `d` lies strictly inside the circumcircle of the
/// counterclockwise triangle `a, b, c`.
fn incircle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

fn lawson_flips(v: &[Point], tris: &mut [[usize; 3]]) {
    loop {
        let mut map: BTreeMap<[usize; 2], Vec<(usize, usize)>> = BTreeMap::new();
        for (t, tri) in tris.iter().enumerate() {
            for le in 0..3 {
                let (a, b) = (tri[(le + 1) % 3], tri[(le + 2) % 3]);
                map.entry([a.min(b), a.max(b)]).or_default().push((t, le));
            }
        }
        let mut flipped = false;
        for pair in map.values() {
            if pair.len() != 2 {
                continue;
            }
            let (t1, l1) = pair[0];
            let (t2, l2) = pair[1];
            let (c, a, b) = (tris[t1][l1], tris[t1][(l1 + 1) % 3], tris[t1][(l1 + 2) % 3]);
            let d = tris[t2][l2];
            if incircle(v[c], v[a], v[b], v[d]) > 1e-14 {
                // Edge a-b becomes c-d.
                tris[t1] = [c, a, d];
                tris[t2] = [d, b, c];
                flipped = true;
                break;
            }
        }
        if !flipped {
            return;
        }
    }
}

/// Strip `[0,4] x [0,1]` with a single interior vertex at `(0.5, 0.5)`; the
/// far end of the strip is three vertex-graph steps away from it, so the
/// mesh constant `R` is 4.
pub fn single_interior_vertex_strip() -> Mesh {
    let mut vertices: Vec<Point> = Vec::new();
    for i in 0..=4 {
        vertices.push([i as f64, 0.0]);
        vertices.push([i as f64, 1.0]);
    }
    let bot = |i: usize| 2 * i;
    let top = |i: usize| 2 * i + 1;
    vertices.push([0.5, 0.5]);
    let z = vertices.len() - 1;
    let mut elements = alloc::vec![
        alloc::vec![bot(0), bot(1), z],
        alloc::vec![bot(1), top(1), z],
        alloc::vec![top(1), top(0), z],
        alloc::vec![top(0), bot(0), z],
    ];
    for i in 1..4 {
        elements.push(alloc::vec![bot(i), bot(i + 1), top(i + 1)]);
        elements.push(alloc::vec![bot(i), top(i + 1), top(i)]);
    }
    Mesh::new(2, vertices, elements).expect("strip mesh is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jittered_meshes_are_delaunay_and_shape_regular() {
        for seed in 0..5 {
            let m = jittered_delaunay_mesh(4, seed).unwrap();
            assert_eq!(m.num_elements(), 32);
            let area: f64 = (0..m.num_elements()).map(|t| m.simplex(t).measure()).sum();
            assert!((area - 1.0).abs() < 1e-12);
            for t in 0..m.num_elements() {
                let s = m.simplex(t);
                assert!(s.min_angle_degrees() >= MIN_ANGLE_DEGREES);
                for e in m.element_edges(t) {
                    for &t2 in m.edge_elements(e) {
                        if t2 == t {
                            continue;
                        }
                        let far = m.element(t2).iter().copied().find(|v| !m.element(t).contains(v)).unwrap();
                        let [a, b, c] = s.vertices;
                        assert!(incircle(a, b, c, m.vertices()[far]) <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn same_seed_same_mesh() {
        assert_eq!(jittered_delaunay_mesh(3, 7).unwrap(), jittered_delaunay_mesh(3, 7).unwrap());
    }
}
