//! Jacobi polynomials and Gauss-Legendre nodes.

use alloc::vec;
use alloc::vec::Vec;

use super::ring::Ring;
#[allow(unused_imports)]
use num_traits::Float;

/// Pochhammer symbol `(z)_j = z (z+1) ... (z+j-1)`, with `(z)_0 = 1`.
pub fn pochhammer(z: f64, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (z + i as f64))
}

/// `P_k^{(alpha, beta)}(t)` by the three-term recurrence.
pub fn jacobi_eval(k: usize, alpha: f64, beta: f64, t: f64) -> f64 {
    jacobi_ring(k, alpha, beta, &t)
}

/// All of `P_0, ..., P_k` at `t`, evaluated in any [`Ring`].
pub fn jacobi_all<R: Ring>(k: usize, alpha: f64, beta: f64, t: &R) -> Vec<R> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(t.constant_like(1.0));
    if k == 0 {
        return out;
    }
    out.push(t.affine(0.5 * (alpha + beta + 2.0), 0.5 * (alpha - beta)));
    let ab = alpha + beta;
    for n in 2..=k {
        let nf = n as f64;
        let c = 2.0 * nf + ab;
        let a0 = 2.0 * nf * (nf + ab) * (c - 2.0);
        let a1 = (c - 1.0) * c * (c - 2.0);
        let a2 = (c - 1.0) * (alpha * alpha - beta * beta);
        let a3 = 2.0 * (nf + alpha - 1.0) * (nf + beta - 1.0) * c;
        let next = t.affine(a1, a2) * out[n - 1].clone() - out[n - 2].clone() * a3;
        out.push(next * (1.0 / a0));
    }
    out
}

pub fn jacobi_ring<R: Ring>(k: usize, alpha: f64, beta: f64, t: &R) -> R {
    jacobi_all(k, alpha, beta, t).pop().unwrap()
}

/// `P_k^{(alpha, beta)}(1 - 2x)` from the terminating hypergeometric series
/// `(alpha+1)_k / k! * sum_j (-k)_j (k+alpha+beta+1)_j / ((alpha+1)_j j!) x^j`.
pub fn jacobi_series(k: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    let lead = pochhammer(alpha + 1.0, k) / factorial(k);
    let mut sum = 0.0;
    let mut xj = 1.0;
    for j in 0..=k {
        sum += pochhammer(-(k as f64), j) * pochhammer(k as f64 + alpha + beta + 1.0, j)
            / (pochhammer(alpha + 1.0, j) * factorial(j))
            * xj;
        xj *= x;
    }
    lead * sum
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let theta = core::f64::consts::PI * (4.0 * i as f64 + 3.0) / (4.0 * nf + 2.0);
        let mut t = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, t);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn low_degree_values() {
        assert_eq!(jacobi_eval(0, 0.3, 1.7, 0.42), 1.0);
        // P_1^{(0,1)}(1 - 2x) = 1 - 3x
        for &x in &[0.0, 0.2, 0.9] {
            assert!((jacobi_eval(1, 0.0, 1.0, 1.0 - 2.0 * x) - (1.0 - 3.0 * x)).abs() < 1e-15);
        }
    }

    #[test]
    fn weighted_orthogonality_on_unit_interval() {
        let (xs, ws) = gauss_legendre(20);
        for n in 1..6 {
            for deg in 0..n {
                let mut s = 0.0;
                for (x, w) in xs.iter().zip(&ws) {
                    let t = 0.5 * (x + 1.0);
                    s += 0.5 * w * jacobi_eval(n, 0.0, 1.0, 1.0 - 2.0 * t) * t.powi(deg as i32) * (1.0 - t);
                }
                assert!(s.abs() < 1e-14, "n={n} deg={deg} s={s}");
            }
        }
    }

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in 1..30 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for k in 0..2 * n {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((s - exact).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    proptest! {
        #[test]
        fn series_matches_recurrence(k in 0usize..8, a in 0.0f64..4.0, b in 0.0f64..6.0, x in 0.0f64..1.0) {
            let r = jacobi_eval(k, a, b, 1.0 - 2.0 * x);
            let s = jacobi_series(k, a, b, x);
            prop_assert!((r - s).abs() <= 1e-10 * (1.0 + r.abs()));
        }
    }
}
