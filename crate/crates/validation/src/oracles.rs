//! Textbook O(n²) and O(n³) references, written without touching the
//! library kernels they check.

use std::f64::consts::PI;

use rand::Rng;
use trbeam::C64;

pub fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Largest elementwise distance between two equally long vectors.
pub fn max_err(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn convolution(a: &[C64], b: &[C64]) -> Vec<C64> {
    (0..a.len() + b.len() - 1)
        .map(|k| {
            let lo = k.saturating_sub(b.len() - 1);
            let hi = k.min(a.len() - 1);
            (lo..=hi).map(|i| a[i] * b[k - i]).sum()
        })
        .collect()
}

/// Direct `n`-point DFT sum of zero-padded `x`.
pub fn dft(x: &[C64], n: usize) -> Vec<C64> {
    (0..n)
        .map(|f| {
            x.iter()
                .enumerate()
                .map(|(t, v)| v * C64::from_polar(1.0, -2.0 * PI * (f * t) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Removes from `v` its component in the span of `cols` via a modified
/// Gram-Schmidt basis.
pub fn gram_schmidt_project(cols: &[Vec<C64>], v: &[C64]) -> Vec<C64> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for col in cols {
        let mut u = col.clone();
        for q in &basis {
            let ip: C64 = q.iter().zip(&u).map(|(a, b)| a.conj() * b).sum();
            for (ui, qi) in u.iter_mut().zip(q) {
                *ui -= ip * qi;
            }
        }
        let nrm = u.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        basis.push(u.iter().map(|x| x / nrm).collect());
    }
    let mut w = v.to_vec();
    for q in &basis {
        let ip: C64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
        for (wi, qi) in w.iter_mut().zip(q) {
            *wi -= ip * qi;
        }
    }
    w
}

/// Solves `AᴴA x = Aᴴb` by Gaussian elimination with partial pivoting.
/// `a` is row-major with `rows` rows.
pub fn normal_equations(a: &[C64], rows: usize, b: &[C64]) -> Vec<C64> {
    let n = a.len() / rows;
    let at = |r: usize, c: usize| a[r * n + c];
    let mut m: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            let mut row: Vec<C64> = (0..n)
                .map(|j| (0..rows).map(|r| at(r, i).conj() * at(r, j)).sum())
                .collect();
            row.push((0..rows).map(|r| at(r, i).conj() * b[r]).sum());
            row
        })
        .collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].norm().total_cmp(&m[j][k].norm())).unwrap();
        m.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..=n {
                let mkj = m[k][j];
                m[i][j] -= f * mkj;
            }
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        let s: C64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (m[k][n] - s) / m[k][k];
    }
    x
}
