//! Up-looking simplicial sparse Cholesky with a nested-dissection ordering.

use alloc::vec;
use alloc::vec::Vec;

use super::sparse::CsrMatrix;
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

const NONE: usize = usize::MAX;
const LEAF_SIZE: usize = 64;

/// `P A P^T = L L^T` for a symmetric positive definite `A`.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
}

impl SparseCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        assert_eq!(a.nrows, a.ncols, "matrix must be square");
        let n = a.nrows;
        let perm = nested_dissection(a);
        let mut inv = vec![0; n];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        // Upper triangle of the permuted matrix, stored by columns.
        let mut colptr = vec![0usize; n + 1];
        for i in 0..n {
            for (j, _) in a.row(i) {
                let (pi, pj) = (inv[i], inv[j]);
                if pi <= pj {
                    colptr[pj + 1] += 1;
                }
            }
        }
        for j in 0..n {
            colptr[j + 1] += colptr[j];
        }
        let mut next = colptr.clone();
        let mut rowind = vec![0; colptr[n]];
        let mut vals = vec![0.0; colptr[n]];
        for i in 0..n {
            for (j, v) in a.row(i) {
                let (pi, pj) = (inv[i], inv[j]);
                if pi <= pj {
                    rowind[next[pj]] = pi;
                    vals[next[pj]] = v;
                    next[pj] += 1;
                }
            }
        }

        let parent = etree(n, &colptr, &rowind);
        let mut mark = vec![NONE; n];
        let mut stack = vec![0; n];
        let mut counts = vec![1usize; n];
        for k in 0..n {
            let top = ereach(k, &colptr, &rowind, &parent, &mut mark, &mut stack);
            for &i in &stack[top..] {
                counts[i] += 1;
            }
        }
        let mut lp = vec![0usize; n + 1];
        for j in 0..n {
            lp[j + 1] = lp[j] + counts[j];
        }
        let mut c: Vec<usize> = lp[..n].to_vec();
        let mut li = vec![0; lp[n]];
        let mut lx = vec![0.0; lp[n]];
        let mut x = vec![0.0; n];
        mark.iter_mut().for_each(|m| *m = NONE);
        for k in 0..n {
            let top = ereach(k, &colptr, &rowind, &parent, &mut mark, &mut stack);
            for p in colptr[k]..colptr[k + 1] {
                x[rowind[p]] += vals[p];
            }
            let mut d = x[k];
            x[k] = 0.0;
            for s in top..n {
                let i = stack[s];
                let lki = x[i] / lx[lp[i]];
                x[i] = 0.0;
                for p in lp[i] + 1..c[i] {
                    x[li[p]] -= lx[p] * lki;
                }
                d -= lki * lki;
                li[c[i]] = k;
                lx[c[i]] = lki;
                c[i] += 1;
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: k, value: d });
            }
            li[c[k]] = k;
            lx[c[k]] = d.sqrt();
            c[k] += 1;
        }
        Ok(Self { n, perm, lp, li, lx })
    }

    pub fn nnz(&self) -> usize {
        self.lx.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "dimension mismatch");
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        // L y = b: columns of L, diagonal first.
        for j in 0..self.n {
            y[j] /= self.lx[self.lp[j]];
            for p in self.lp[j] + 1..self.lp[j + 1] {
                y[self.li[p]] -= self.lx[p] * y[j];
            }
        }
        for j in (0..self.n).rev() {
            for p in self.lp[j] + 1..self.lp[j + 1] {
                y[j] -= self.lx[p] * y[self.li[p]];
            }
            y[j] /= self.lx[self.lp[j]];
        }
        let mut out = vec![0.0; self.n];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = y[k];
        }
        out
    }
}

fn etree(n: usize, colptr: &[usize], rowind: &[usize]) -> Vec<usize> {
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for p in colptr[k]..colptr[k + 1] {
            let mut i = rowind[p];
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Nonzero pattern of row `k` of `L` (excluding the diagonal) in
/// `stack[top..]`, in topological order.
fn ereach(
    k: usize,
    colptr: &[usize],
    rowind: &[usize],
    parent: &[usize],
    mark: &mut [usize],
    stack: &mut [usize],
) -> usize {
    let n = parent.len();
    let mut top = n;
    mark[k] = k;
    for p in colptr[k]..colptr[k + 1] {
        let mut i = rowind[p];
        if i > k {
            continue;
        }
        let mut len = 0;
        while mark[i] != k {
            stack[len] = i;
            len += 1;
            mark[i] = k;
            i = parent[i];
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            stack[top] = stack[len];
        }
    }
    top
}

/// Fill-reducing ordering: recursive bisection by the middle level of a BFS
/// level structure rooted at a pseudo-peripheral vertex.
pub fn nested_dissection(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows;
    let adj: Vec<Vec<usize>> = (0..n).map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect()).collect();
    let mut order = Vec::with_capacity(n);
    let mut active = vec![true; n];
    let mut level = vec![NONE; n];
    let mut work: Vec<Vec<usize>> = Vec::new();
    // Components of the whole graph first.
    for comp in components(&(0..n).collect::<Vec<_>>(), &adj, &active, &mut level) {
        work.push(comp);
    }
    // Explicit stack of (set, separator-to-append-later).
    let mut pending: Vec<Task> = work.into_iter().rev().map(Task::Split).collect();
    while let Some(task) = pending.pop() {
        match task {
            Task::Emit(sep) => order.extend(sep),
            Task::Split(set) => {
                if set.len() <= LEAF_SIZE {
                    order.extend(set);
                    continue;
                }
                let root = pseudo_peripheral(&set, &adj, &active, &mut level);
                let levels = bfs_levels(root, &adj, &active, &mut level);
                if levels.len() < 3 {
                    order.extend(set);
                    continue;
                }
                let mid = levels.len() / 2;
                let sep = levels[mid].clone();
                for &v in &sep {
                    active[v] = false;
                }
                let rest: Vec<usize> = set.iter().copied().filter(|&v| active[v]).collect();
                let parts = components(&rest, &adj, &active, &mut level);
                pending.push(Task::Emit(sep));
                for p in parts.into_iter().rev() {
                    pending.push(Task::Split(p));
                }
            }
        }
    }
    order
}

enum Task {
    Split(Vec<usize>),
    Emit(Vec<usize>),
}

fn bfs_levels(root: usize, adj: &[Vec<usize>], active: &[bool], seen: &mut [usize]) -> Vec<Vec<usize>> {
    let mut levels = vec![vec![root]];
    let stamp = root;
    seen[root] = stamp;
    loop {
        let mut next = Vec::new();
        for &u in levels.last().unwrap() {
            for &w in &adj[u] {
                if active[w] && seen[w] != stamp {
                    seen[w] = stamp;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    // Reset stamps so later searches from the same root start clean.
    for l in &levels {
        for &v in l {
            seen[v] = NONE;
        }
    }
    levels
}

fn pseudo_peripheral(set: &[usize], adj: &[Vec<usize>], active: &[bool], seen: &mut [usize]) -> usize {
    let mut root = set[0];
    let mut depth = 0;
    for _ in 0..4 {
        let levels = bfs_levels(root, adj, active, seen);
        if levels.len() <= depth {
            break;
        }
        depth = levels.len();
        let last = levels.last().unwrap();
        root = *last.iter().min_by_key(|&&v| adj[v].iter().filter(|&&w| active[w]).count()).unwrap();
    }
    root
}

fn components(set: &[usize], adj: &[Vec<usize>], active: &[bool], seen: &mut [usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut done: Vec<usize> = Vec::new();
    for &s in set {
        if seen[s] != NONE {
            continue;
        }
        let levels = {
            // Flood fill, stamping with NONE - 1 so membership survives until the end.
            let mut comp = vec![s];
            seen[s] = NONE - 1;
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &w in &adj[u] {
                    if active[w] && seen[w] == NONE {
                        seen[w] = NONE - 1;
                        comp.push(w);
                    }
                }
            }
            comp
        };
        done.extend_from_slice(&levels);
        out.push(levels);
    }
    for v in done {
        seen[v] = NONE;
    }
    out
}
