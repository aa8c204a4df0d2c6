//! Oracles shared by the integration tests. Nothing here calls into the
//! spectral or fitting code it is used to check.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Row-major `rows × cols` matrix of uniform entries in [-1, 1).
pub fn uniform_matrix(rows: usize, cols: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..rows * cols).map(|_| r.random_range(-1.0..1.0)).collect()
}

/// `(1/n) WᵀW` for a row-major `n × m` matrix, as a dense `m × m` matrix.
pub fn gram(w: &[f64], n: usize, m: usize) -> Vec<Vec<f64>> {
    let mut x = vec![vec![0.0; m]; m];
    for (a, row) in x.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = (0..n).map(|i| w[i * m + a] * w[i * m + b]).sum::<f64>() / n as f64;
        }
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Continuous Pareto samples with density ∝ x^(−alpha) on [xmin, ∞), by
/// inverting the CDF.
pub fn pareto_samples(count: usize, alpha: f64, xmin: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let u: f64 = 1.0 - r.random::<f64>();
            xmin * u.powf(-1.0 / (alpha - 1.0))
        })
        .collect()
}

/// Spearman's ρ from the textbook `1 − 6Σd² / (n(n²−1))`, valid without ties.
pub fn spearman_no_ties(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = pos as f64 + 1.0;
        }
        r
    };
    let (rx, ry) = (rank(x), rank(y));
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    let n = x.len() as f64;
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}
