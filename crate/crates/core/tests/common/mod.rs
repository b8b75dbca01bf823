//! Reference computations used as oracles by the integration tests.
//!
//! Nothing here calls the solvers under test: objectives are evaluated with
//! explicit loops, determinants by hand-written elimination, and minimisers
//! found by enumeration or first-order iteration.

#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Sum of squares, accumulated in index order.
pub fn sum_sq(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |a, v| a + v * v)
}

/// Smallest residual of any support of exactly `tau` entries, by enumeration.
pub fn best_support_residual(col: &[f64], tau: usize) -> f64 {
    let d = col.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize != tau {
            continue;
        }
        let r = sum_sq((0..d).filter(|i| mask & (1 << i) == 0).map(|i| col[i]));
        best = best.min(r);
    }
    best
}

/// Residual of keeping the non-zero entries of `kept`.
pub fn kept_residual(col: &[f64], kept: &[f64]) -> f64 {
    sum_sq(col.iter().zip(kept).map(|(v, k)| v - k))
}

/// `(sign, log |det|)` by Gaussian elimination with partial pivoting.
pub fn naive_log_abs_det(m: &DMatrix<f64>) -> (f64, f64) {
    let n = m.nrows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    let mut sign = 1.0;
    let mut log = 0.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| a[x][k].abs().partial_cmp(&a[y][k].abs()).unwrap())
            .unwrap();
        if a[p][k] == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        let piv = a[k][k];
        if piv < 0.0 {
            sign = -sign;
        }
        log += piv.abs().ln();
        for i in k + 1..n {
            let f = a[i][k] / piv;
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    (sign, log)
}

/// Term-by-term single-domain objective computed with explicit loops.
pub fn naive_objective(t: &DMatrix<f64>, x: &DMatrix<f64>, z: &DMatrix<f64>, lambda: f64, epsilon: f64) -> [f64; 3] {
    let (d, n) = (t.nrows(), x.ncols());
    let mut residual = 0.0;
    for j in 0..n {
        for i in 0..d {
            let mut s = 0.0;
            for k in 0..t.ncols() {
                s += t[(i, k)] * x[(k, j)];
            }
            residual += (s - z[(i, j)]).powi(2);
        }
    }
    let frob = lambda * epsilon * sum_sq(t.iter().copied());
    let logdet = -lambda * naive_log_abs_det(t).1;
    [residual, frob, logdet]
}

pub fn transform_objective(t: &DMatrix<f64>, x: &DMatrix<f64>, z: &DMatrix<f64>, lambda: f64, epsilon: f64) -> f64 {
    naive_objective(t, x, z, lambda, epsilon).iter().sum()
}

/// `2 (T X - Z) X^T + 2 lambda epsilon T - lambda T^-T`.
pub fn transform_gradient(t: &DMatrix<f64>, x: &DMatrix<f64>, z: &DMatrix<f64>, lambda: f64, epsilon: f64) -> DMatrix<f64> {
    let inv_t = t.clone().try_inverse().expect("invertible iterate").transpose();
    (t * x - z) * x.transpose() * 2.0 + t * (2.0 * lambda * epsilon) - inv_t * lambda
}

pub struct OracleResult {
    pub t: DMatrix<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

/// Barzilai-Borwein gradient descent with a non-monotone Armijo line search
/// (reference value: the worst of the last few accepted values), kept inside
/// the determinant-sign class of the starting point: steps that would cross
/// `det T = 0` are shortened. Stops at gradient norm `tol`.
pub fn projected_gradient_oracle(
    x: &DMatrix<f64>,
    z: &DMatrix<f64>,
    lambda: f64,
    epsilon: f64,
    start: DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> OracleResult {
    const MEMORY: usize = 10;
    let f = |t: &DMatrix<f64>| transform_objective(t, x, z, lambda, epsilon);
    let sign0 = naive_log_abs_det(&start).0;
    let mut t = start;
    let mut value = f(&t);
    let mut best = (t.clone(), value);
    let mut recent = vec![value];
    let mut g = transform_gradient(&t, x, z, lambda, epsilon);
    let mut step = 1.0 / (2.0 * x.norm_squared() + 2.0 * lambda * epsilon + lambda);
    let mut it = 0;
    while g.norm() > tol && it < max_iter {
        it += 1;
        let gg = g.norm_squared();
        let reference = recent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut alpha = step;
        let accepted = loop {
            let cand = &t - &g * alpha;
            if naive_log_abs_det(&cand).0 == sign0 {
                let v = f(&cand);
                if v <= reference - 1e-4 * alpha * gg {
                    break Some((cand, v));
                }
            }
            alpha *= 0.5;
            if alpha < 1e-30 {
                break None;
            }
        };
        // Step too small to make progress in floating point.
        let Some((next, next_value)) = accepted else { break };
        let g_next = transform_gradient(&next, x, z, lambda, epsilon);
        let s = &next - &t;
        let y = &g_next - &g;
        let sy = s.dot(&y);
        step = if sy > 0.0 { s.norm_squared() / sy } else { alpha * 2.0 };
        t = next;
        value = next_value;
        g = g_next;
        if value < best.1 {
            best = (t.clone(), value);
        }
        recent.push(value);
        if recent.len() > MEMORY {
            recent.remove(0);
        }
    }
    OracleResult {
        grad_norm: transform_gradient(&best.0, x, z, lambda, epsilon).norm().min(g.norm()),
        t: best.0,
        value: best.1,
        iterations: it,
    }
}

/// Gradient of `||A1 - Z1||^2 + mu ||Z2 - M Z1||^2` in `Z1`.
pub fn grad_semi_z1(a1: &DMatrix<f64>, z1: &DMatrix<f64>, z2: &DMatrix<f64>, m: &DMatrix<f64>, mu: f64) -> DMatrix<f64> {
    (z1 - a1) * 2.0 - m.transpose() * (z2 - m * z1) * (2.0 * mu)
}

/// Gradient of `||A2 - Z2||^2 + mu ||Z2 - M Z1||^2` in `Z2`.
pub fn grad_semi_z2(a2: &DMatrix<f64>, z1: &DMatrix<f64>, z2: &DMatrix<f64>, m: &DMatrix<f64>, mu: f64) -> DMatrix<f64> {
    (z2 - a2) * 2.0 + (z2 - m * z1) * (2.0 * mu)
}

/// Gradient of `||Zt - M Zf||^2` in `M`.
pub fn grad_mapping(zf: &DMatrix<f64>, zt: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    (zt - m * zf) * zf.transpose() * -2.0
}

/// Gradient in `Z1` of `||A1 - Z1||^2 + mu (||Z2 - M1 Z1||^2 + ||Z1 - M2 Z2||^2)`.
pub fn grad_sym_z1(a1: &DMatrix<f64>, z1: &DMatrix<f64>, z2: &DMatrix<f64>, m1: &DMatrix<f64>, m2: &DMatrix<f64>, mu: f64) -> DMatrix<f64> {
    (z1 - a1) * 2.0 - m1.transpose() * (z2 - m1 * z1) * (2.0 * mu) + (z1 - m2 * z2) * (2.0 * mu)
}

/// Gradient in `Z2` of `||A2 - Z2||^2 + mu (||Z2 - M1 Z1||^2 + ||Z1 - M2 Z2||^2)`.
pub fn grad_sym_z2(a2: &DMatrix<f64>, z1: &DMatrix<f64>, z2: &DMatrix<f64>, m1: &DMatrix<f64>, m2: &DMatrix<f64>, mu: f64) -> DMatrix<f64> {
    (z2 - a2) * 2.0 + (z2 - m1 * z1) * (2.0 * mu) - m2.transpose() * (z1 - m2 * z2) * (2.0 * mu)
}

/// Least-squares map through the SVD pseudo-inverse of `zf`.
pub fn pinv_mapping(zf: &DMatrix<f64>, zt: &DMatrix<f64>) -> DMatrix<f64> {
    let pinv = zf.clone().pseudo_inverse(1e-12).expect("pseudo-inverse");
    zt * pinv
}

/// Non-increasing up to `slack` relative to the previous value.
pub fn is_monotone(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack * w[0].abs())
}
