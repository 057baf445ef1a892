use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Relative singular-value threshold below which a direction counts as kernel.
pub const RANK_TOL: f64 = 1e-9;

fn singular_values_padded(a: &DMatrix<f64>) -> (Vec<f64>, Option<DMatrix<f64>>, usize) {
    let (m, n) = a.shape();
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    (svd.singular_values.iter().copied().collect(), svd.v_t, n)
}

/// Number of right singular directions with `sigma <= tol * sigma_max`
/// (all of them for the zero matrix).
pub fn kernel_dimension(a: &DMatrix<f64>, tol: f64) -> usize {
    let n = a.ncols();
    if n == 0 {
        return 0;
    }
    if a.nrows() == 0 {
        return n;
    }
    let (sv, _, _) = singular_values_padded(a);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return n;
    }
    n - sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Orthonormal basis of the numerical kernel, one column per direction.
pub fn nullspace(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let (sv, vt, _) = singular_values_padded(a);
    let vt = vt.expect("right singular vectors");
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let cols: Vec<usize> = (0..sv.len()).filter(|&i| smax == 0.0 || sv[i] <= tol * smax).collect();
    let mut out = DMatrix::zeros(n, cols.len());
    for (k, &i) in cols.iter().enumerate() {
        for j in 0..n {
            out[(j, k)] = vt[(i, j)];
        }
    }
    out
}

/// Angle between the lines spanned by `u` and `v`.
pub fn principal_angle(u: &[f64], v: &[f64]) -> f64 {
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / (nu * nv);
    let perp: f64 = u.iter().zip(v).map(|(a, b)| (b / nv - dot * a / nu).powi(2)).sum::<f64>().sqrt();
    perp.atan2(dot.abs())
}

/// Largest angle between a vector and a subspace with orthonormal columns `q`.
pub fn angle_to_subspace(q: &DMatrix<f64>, v: &[f64]) -> f64 {
    let v = DVector::from_column_slice(v);
    let proj = q * (q.transpose() * &v);
    let perp = (&v - &proj).norm();
    perp.atan2(proj.norm())
}

/// Solution of the saddle system `[M B^T; B 0] [x; y] = [f; g]` by pivoted LU.
/// Returns `(x, y)` and fails when the system is numerically singular.
pub fn kkt_solve(
    m: &DMatrix<f64>,
    b: &DMatrix<f64>,
    f: &DMatrix<f64>,
    g: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let k = b.nrows();
    let mut a = DMatrix::zeros(n + k, n + k);
    a.view_mut((0, 0), (n, n)).copy_from(m);
    a.view_mut((n, 0), (k, n)).copy_from(b);
    a.view_mut((0, n), (n, k)).copy_from(&b.transpose());
    let mut rhs = DMatrix::zeros(n + k, f.ncols());
    rhs.view_mut((0, 0), (n, f.ncols())).copy_from(f);
    rhs.view_mut((n, 0), (k, g.ncols())).copy_from(g);
    let lu = a.clone().full_piv_lu();
    let sol = lu.solve(&rhs).ok_or_else(|| Error::Singular(format!("saddle system of size {}", n + k)))?;
    let res = (&a * &sol - &rhs).amax();
    let scale = a.amax() * sol.amax() + rhs.amax();
    if !res.is_finite() || res > 1e-8 * scale {
        return Err(Error::Singular(format!("saddle residual {res:e}")));
    }
    Ok((sol.rows(0, n).into_owned(), sol.rows(n, k).into_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kernel_of_identity_and_zero() {
        assert_eq!(kernel_dimension(&DMatrix::identity(4, 4), RANK_TOL), 0);
        assert_eq!(kernel_dimension(&DMatrix::zeros(2, 5), RANK_TOL), 5);
        let wide = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(kernel_dimension(&wide, RANK_TOL), 1);
        let ns = nullspace(&wide, RANK_TOL);
        assert_eq!(ns.ncols(), 1);
        assert!((ns[(2, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn angles() {
        assert!(principal_angle(&[1.0, 0.0], &[-2.0, 0.0]).abs() < 1e-15);
        assert!((principal_angle(&[1.0, 0.0], &[1.0, 1.0]) - core::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn kkt_gives_min_norm_solution() {
        // min |x|^2 / 2 subject to x0 + x1 + x2 = 3
        let m = DMatrix::identity(3, 3);
        let b = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let (x, _) = kkt_solve(&m, &b, &DMatrix::zeros(3, 1), &DMatrix::from_element(1, 1, 3.0)).unwrap();
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-14));
        let dep = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
        assert!(kkt_solve(&m, &dep, &DMatrix::zeros(3, 1), &DMatrix::zeros(2, 1)).is_err());
    }

    proptest! {
        #[test]
        fn nullspace_is_annihilated(entries in proptest::collection::vec(-1.0f64..1.0, 12)) {
            let a = DMatrix::from_row_slice(3, 4, &entries);
            let ns = nullspace(&a, RANK_TOL);
            prop_assert_eq!(ns.ncols(), kernel_dimension(&a, RANK_TOL));
            prop_assert!((&a * &ns).amax() < 1e-12);
        }
    }
}
