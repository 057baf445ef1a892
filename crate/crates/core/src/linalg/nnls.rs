//! Small dense nonnegative least squares.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    svd.solve(b, 1e-13 * svd.singular_values.max().max(f64::MIN_POSITIVE)).expect("svd solve")
}

fn columns(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), cols.len(), |i, k| a[(i, cols[k])])
}

/// Lawson-Hanson: `min |A x - b|` subject to `x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * a.amax().max(1.0) * b.amax().max(1.0);
    for _ in 0..3 * n + 10 {
        let w = a.transpose() * (b - a * &x);
        let cand = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = cand else { break };
        passive[j] = true;
        loop {
            let p: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let z = lstsq(&columns(a, &p), b);
            if z.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (k, &i) in p.iter().enumerate() {
                    x[i] = z[k];
                }
                break;
            }
            let mut alpha = 1.0f64;
            for (k, &i) in p.iter().enumerate() {
                if z[k] <= 0.0 {
                    alpha = alpha.min(x[i] / (x[i] - z[k]));
                }
            }
            for (k, &i) in p.iter().enumerate() {
                x[i] += alpha * (z[k] - x[i]);
                if x[i] <= 1e-15 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
    }
    x
}

/// Minimum-norm `x >= 0` with `A x = b`.
///
/// Least-distance form `min |x|` s.t. `G x >= h` with `G = [A; -A; I]`,
/// reduced to one NNLS problem, then polished on the detected support.
pub fn min_norm_nonnegative(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    let rows = 2 * m + n;
    let mut g = DMatrix::zeros(rows, n);
    let mut h = DVector::zeros(rows);
    for i in 0..m {
        for j in 0..n {
            g[(i, j)] = a[(i, j)];
            g[(m + i, j)] = -a[(i, j)];
        }
        h[i] = b[i];
        h[m + i] = -b[i];
    }
    for j in 0..n {
        g[(2 * m + j, j)] = 1.0;
    }
    let mut e = DMatrix::zeros(n + 1, rows);
    e.view_mut((0, 0), (n, rows)).copy_from(&g.transpose());
    for k in 0..rows {
        e[(n, k)] = h[k];
    }
    let mut f = DVector::zeros(n + 1);
    f[n] = 1.0;
    let u = nnls(&e, &f);
    let r = &e * u - f;
    if r[n].abs() < 1e-14 {
        return Err(Error::Infeasible("no nonnegative solution of the constraint system".into()));
    }
    let mut x = DVector::from_fn(n, |j, _| (-r[j] / r[n]).max(0.0));
    let scale = x.amax().max(f64::MIN_POSITIVE);
    let support: Vec<usize> = (0..n).filter(|&j| x[j] > 1e-10 * scale).collect();
    if !support.is_empty() {
        let asub = columns(a, &support);
        let mu = lstsq(&(&asub * asub.transpose()), b);
        let xs = asub.transpose() * mu;
        if xs.iter().all(|&v| v >= 0.0) && (&asub * &xs - b).amax() <= (a * &x - b).amax().max(tol) {
            x.fill(0.0);
            for (k, &j) in support.iter().enumerate() {
                x[j] = xs[k];
            }
        }
    }
    if (a * &x - b).amax() > tol {
        return Err(Error::Infeasible("no nonnegative solution of the constraint system".into()));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nnls_clamps_negative_directions() {
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![1.0, -1.0]);
        let x = nnls(&a, &b);
        assert_eq!(x.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn min_norm_on_simplex() {
        // sum x = 1, x0 - x1 = 0.5: the unconstrained min-norm point is already nonnegative.
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 1.0, -1.0, 0.0]);
        let b = DVector::from_vec(vec![1.0, 0.5]);
        let x = min_norm_nonnegative(&a, &b, 1e-12).unwrap();
        assert!((&a * &x - &b).amax() < 1e-12);
        assert!(x.iter().all(|&v| v >= 0.0));
        let unconstrained = a.transpose() * (&a * a.transpose()).try_inverse().unwrap() * &b;
        assert!((x - unconstrained).amax() < 1e-12);
    }

    #[test]
    fn bound_becomes_active() {
        // sum x = 1, x0 - x1 = 1: unconstrained min norm has x1 < 0.
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 1.0, -1.0, 0.0]);
        let b = DVector::from_vec(vec![1.0, 1.0]);
        let x = min_norm_nonnegative(&a, &b, 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1].abs() < 1e-12 && x[2].abs() < 1e-12);
        let infeasible = DVector::from_vec(vec![-1.0, 0.0]);
        assert!(min_norm_nonnegative(&a, &infeasible, 1e-12).is_err());
    }
}
