//! Plain-text meshes and triplet matrix dumps.
//!
//! A mesh file is a header line `d nv nt`, then `nv` lines of vertex
//! coordinates (`d` numbers each), then `nt` lines of 0-based vertex indices
//! (`d + 1` each). Boundary entities are inferred on load.

use std::io::{BufRead, Write};

use anyhow::{bail, ensure, Context, Result};
use qipp_core::linalg::CsrMatrix;
use qipp_core::Mesh;

/// Writes `mesh`. Floats use the shortest representation that parses back to
/// the same bits.
pub fn write_mesh(mesh: &Mesh, mut out: impl Write) -> Result<()> {
    let d = mesh.dim();
    writeln!(out, "{} {} {}", d, mesh.num_vertices(), mesh.num_elements())?;
    for v in mesh.vertices() {
        let coords: Vec<String> = v[..d].iter().map(|x| format!("{x:?}")).collect();
        writeln!(out, "{}", coords.join(" "))?;
    }
    for t in 0..mesh.num_elements() {
        let idx: Vec<String> = mesh.element(t).iter().map(|i| i.to_string()).collect();
        writeln!(out, "{}", idx.join(" "))?;
    }
    Ok(())
}

pub fn read_mesh(input: impl BufRead) -> Result<Mesh> {
    let mut lines = input.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let mut next = |what: &str| -> Result<(usize, Vec<String>)> {
        let (no, line) = lines.next().with_context(|| format!("unexpected end of file while reading {what}"))?;
        Ok((no, line?.split_whitespace().map(String::from).collect()))
    };

    let (no, head) = next("the header")?;
    ensure!(head.len() == 3, "line {no}: header must be `d nv nt`");
    let parse = |s: &str, no: usize| s.parse::<usize>().with_context(|| format!("line {no}: bad integer `{s}`"));
    let (d, nv, nt) = (parse(&head[0], no)?, parse(&head[1], no)?, parse(&head[2], no)?);
    if d != 1 && d != 2 {
        bail!("line {no}: unsupported dimension {d}");
    }

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, f) = next("vertices")?;
        ensure!(f.len() == d, "line {no}: expected {d} coordinates, found {}", f.len());
        let mut p = [0.0; 2];
        for (k, s) in f.iter().enumerate() {
            p[k] = s.parse().with_context(|| format!("line {no}: bad coordinate `{s}`"))?;
        }
        vertices.push(p);
    }

    let mut elements = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (no, f) = next("elements")?;
        ensure!(f.len() == d + 1, "line {no}: expected {} indices, found {}", d + 1, f.len());
        elements.push(f.iter().map(|s| parse(s, no)).collect::<Result<Vec<_>>>()?);
    }
    if let Some((no, _)) = lines.next() {
        bail!("line {no}: trailing content after {nt} elements");
    }
    Ok(Mesh::new(d, vertices, elements)?)
}

/// One `row col value` line per stored entry, row-major.
pub fn write_triplets(a: &CsrMatrix, mut out: impl Write) -> Result<()> {
    for (i, j, v) in a.triplets() {
        writeln!(out, "{i} {j} {v:?}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use qipp_core::linalg::Triplets;
    use qipp_core::mesh::{generate_structured, jittered_delaunay_mesh, refine_uniform};

    fn round_trip(mesh: &Mesh) -> (Vec<u8>, Mesh) {
        let mut buf = Vec::new();
        write_mesh(mesh, &mut buf).unwrap();
        let back = read_mesh(buf.as_slice()).unwrap();
        (buf, back)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for mesh in [
            generate_structured(2, 3).unwrap(),
            refine_uniform(&jittered_delaunay_mesh(5, 3).unwrap()),
            generate_structured(1, 7).unwrap(),
        ] {
            let (buf, back) = round_trip(&mesh);
            assert_eq!(back, mesh);
            let (again, _) = round_trip(&back);
            assert_eq!(buf, again);
        }
    }

    #[test]
    fn header_and_layout() {
        let (buf, _) = round_trip(&generate_structured(2, 2).unwrap());
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "2 9 8");
        assert_eq!(lines[1], "0.0 0.0");
        assert_eq!(lines.len(), 1 + 9 + 8);
    }

    #[test]
    fn malformed_input_is_rejected() {
        for bad in [
            "",
            "2 3",
            "3 1 0\n0 0 0\n",
            "2 3 1\n0 0\n1 0\n",
            "2 3 1\n0 0\n1 0\n0 1\n0 1\n",
            "2 3 1\n0 0\n1 x\n0 1\n0 1 2\n",
            "2 3 1\n0 0\n1 0\n0 1\n0 1 7\n",
            "2 3 1\n0 0\n1 0\n0 1\n0 1 2\n0 1 2\n",
        ] {
            assert!(read_mesh(bad.as_bytes()).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn triplets_list_stored_entries() {
        let mut t = Triplets::new(2, 3);
        t.push(0, 2, 1.5);
        t.push(1, 0, -0.25);
        let mut buf = Vec::new();
        write_triplets(&t.to_csr(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 2 1.5\n1 0 -0.25\n");
    }
}
