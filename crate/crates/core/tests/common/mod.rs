//! Reference computations shared by the integration tests. Everything here is
//! deliberately naive and independent of the library's own algorithms.
#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Eigenvalues `(larger, smaller)` of a symmetric 2×2 matrix via the
/// characteristic polynomial.
pub fn eig2(m: &Matrix2<f64>) -> (f64, f64) {
    let (a, b, d) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let hi = mean + rad;
    let lo = mean - rad;
    // the root of smaller magnitude from the product keeps its accuracy
    let det = a * d - b * b;
    if hi.abs() >= lo.abs() {
        (hi, det / hi)
    } else {
        (det / lo, lo)
    }
}

/// `R` of a Householder QR of the `n × 2` matrix `(u, v)`.
pub fn qr_r(u: &[f64], v: &[f64]) -> Matrix2<f64> {
    let n = u.len();
    let a = DMatrix::from_fn(n, 2, |i, j| if j == 0 { u[i] } else { v[i] });
    let r = a.qr().r();
    Matrix2::new(r[(0, 0)], r[(0, 1)], 0.0, r[(1, 1)])
}

pub fn outer_diff(u: &[f64], v: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    DMatrix::from_fn(n, n, |i, j| u[i] * u[j] - v[i] * v[j])
}

pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Smallest number of balls of radius `rho`, centered at points of the set,
/// that cover the set. Exhaustive over center subsets; keep `points.len()`
/// small.
pub fn optimal_own_cover(points: &[Vec<f64>], rho: f64) -> usize {
    let n = points.len();
    assert!(n <= 16);
    let covers: Vec<u32> = (0..n)
        .map(|c| {
            (0..n)
                .filter(|&i| dist(&points[c], &points[i]) <= rho)
                .fold(0u32, |acc, i| acc | (1 << i))
        })
        .collect();
    let full = (1u32 << n) - 1;
    let mut best = n;
    for subset in 1u32..(1 << n) {
        let k = subset.count_ones() as usize;
        if k >= best {
            continue;
        }
        let covered = (0..n)
            .filter(|&c| subset & (1 << c) != 0)
            .fold(0u32, |acc, c| acc | covers[c]);
        if covered == full {
            best = k;
        }
    }
    best
}

/// `P[Bin(n, p) ≤ k]` by direct summation.
pub fn binomial_cdf(n: u64, p: f64, k: u64) -> f64 {
    let mut total = 0.0;
    let mut coef = 1.0f64;
    for i in 0..=k.min(n) {
        if i > 0 {
            coef *= (n - i + 1) as f64 / i as f64;
        }
        total += coef * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32);
    }
    total
}
