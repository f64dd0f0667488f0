use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use trbeam::dsp::{
    conj_reverse, convolve, dft, idft, least_squares_solve, nullspace_project, nullspace_project_with_gram,
    ComplexMatrix, Dft,
};
use trbeam::{Error, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

fn max_err(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn naive_conv(a: &[C64], b: &[C64]) -> Vec<C64> {
    (0..a.len() + b.len() - 1)
        .map(|k| {
            let lo = k.saturating_sub(b.len() - 1);
            let hi = k.min(a.len() - 1);
            (lo..=hi).map(|i| a[i] * b[k - i]).sum()
        })
        .collect()
}

fn naive_dft(x: &[C64], n: usize) -> Vec<C64> {
    (0..n)
        .map(|f| {
            x.iter()
                .enumerate()
                .map(|(t, v)| v * C64::from_polar(1.0, -2.0 * PI * (f * t) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Modified Gram-Schmidt basis of the columns of `b`, then `v - Σ <v,q> q`.
fn gram_schmidt_project(cols: &[Vec<C64>], v: &[C64]) -> Vec<C64> {
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

/// Solves `A^H A x = A^H b` by Gaussian elimination with partial pivoting.
fn normal_equations(a: &ComplexMatrix<f64>, b: &[C64]) -> Vec<C64> {
    let n = a.cols();
    let g = a.gram();
    let rhs = a.adjoint_mul_vec(b).unwrap();
    let mut m: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            let mut row: Vec<C64> = (0..n).map(|j| g.get(i, j)).collect();
            row.push(rhs[i]);
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
    let mut x = vec![c(0.0, 0.0); n];
    for k in (0..n).rev() {
        let s: C64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (m[k][n] - s) / m[k][k];
    }
    x
}

#[test]
fn convolution_matches_naive_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for _ in 0..100 {
        let la = rng.random_range(1..40);
        let lb = rng.random_range(1..40);
        let a = random_vec(&mut rng, la);
        let b = random_vec(&mut rng, lb);
        assert!(max_err(&convolve(&a, &b).unwrap(), &naive_conv(&a, &b)) < 1e-12);
    }
}

#[test]
fn convolution_examples() {
    let got = convolve(&[c(1.0, 0.0), c(2.0, 0.0)], &[c(1.0, 0.0), c(3.0, 0.0)]).unwrap();
    assert_eq!(got, vec![c(1.0, 0.0), c(5.0, 0.0), c(6.0, 0.0)]);
    let x = vec![c(0.3, -1.0), c(2.0, 0.5)];
    assert_eq!(convolve(&x, &[c(1.0, 0.0)]).unwrap(), x);
    assert!(matches!(convolve::<f64>(&[], &x), Err(Error::InvalidArgument(_))));
}

#[test]
fn dft_matches_direct_sum() {
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    for _ in 0..100 {
        let len = rng.random_range(1..50);
        let n = len + rng.random_range(0..30);
        let x = random_vec(&mut rng, len);
        assert!(max_err(&dft(&x, n).unwrap(), &naive_dft(&x, n)) < 1e-10);
    }
}

#[test]
fn dft_convolution_theorem() {
    let mut rng = ChaCha20Rng::seed_from_u64(13);
    for _ in 0..100 {
        let la = rng.random_range(1..60);
        let lb = rng.random_range(1..60);
        let a = random_vec(&mut rng, la);
        let b = random_vec(&mut rng, lb);
        let n = la + lb - 1;
        let plan = Dft::new(n).unwrap();
        let fa = plan.forward(&a).unwrap();
        let fb = plan.forward(&b).unwrap();
        let prod: Vec<C64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
        let back = idft(&prod).unwrap();
        assert!(max_err(&back, &naive_conv(&a, &b)) < 1e-10);
    }
}

#[test]
fn dft_examples() {
    let d = dft(&[c(1.0, 0.0)], 4).unwrap();
    assert!(max_err(&d, &[c(1.0, 0.0); 4]) < 1e-15);
    assert!(matches!(dft(&[c(1.0, 0.0); 5], 4), Err(Error::InvalidArgument(_))));
    let x = vec![c(1.0, 2.0), c(-0.5, 0.25), c(3.0, -1.0)];
    assert!(max_err(&idft(&dft(&x, 3).unwrap()).unwrap(), &x) < 1e-14);
}

#[test]
fn projector_matches_gram_schmidt() {
    let mut rng = ChaCha20Rng::seed_from_u64(14);
    for _ in 0..100 {
        let m = rng.random_range(3..20);
        let k = rng.random_range(1..m);
        let cols: Vec<Vec<C64>> = (0..k).map(|_| random_vec(&mut rng, m)).collect();
        let b = ComplexMatrix::from_columns(&cols).unwrap();
        let v = random_vec(&mut rng, m);
        let w = nullspace_project(&b, &v).unwrap();
        assert!(max_err(&w, &gram_schmidt_project(&cols, &v)) < 1e-10);
    }
}

#[test]
fn projection_examples() {
    let b = ComplexMatrix::from_columns(&[vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
    let w = nullspace_project(&b, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
    assert!(max_err(&w, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]) < 1e-15);
    let v = vec![c(0.0, 0.0), c(0.0, 2.0), c(-1.0, 0.0)];
    assert!(max_err(&nullspace_project(&b, &v).unwrap(), &v) < 1e-15);
}

#[test]
fn least_squares_matches_normal_equations() {
    let mut rng = ChaCha20Rng::seed_from_u64(15);
    for _ in 0..100 {
        let n = rng.random_range(1..12);
        let m = n + rng.random_range(0..20);
        let a = ComplexMatrix::new(m, n, random_vec(&mut rng, m * n)).unwrap();
        let b = random_vec(&mut rng, m);
        let x = least_squares_solve(&a, &b).unwrap();
        let oracle = normal_equations(&a, &b);
        assert!(max_err(&x, &oracle) < 1e-8, "m={m} n={n}");
        // First-order optimality.
        let r: Vec<C64> = a.mul_vec(&x).unwrap().iter().zip(&b).map(|(p, q)| p - q).collect();
        let g = a.adjoint_mul_vec(&r).unwrap();
        let bn = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(g.iter().all(|v| v.norm() < 1e-8 * a.frobenius_norm() * bn));
    }
}

#[test]
fn least_squares_examples() {
    // Identity: x = b.
    let a = ComplexMatrix::from_fn(3, 3, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let b = vec![c(1.0, -1.0), c(2.0, 0.0), c(0.0, 3.0)];
    assert!(max_err(&least_squares_solve(&a, &b).unwrap(), &b) < 1e-15);
    // Column of ones: least-squares solution is the mean.
    let a = ComplexMatrix::from_fn(4, 1, |_, _| c(1.0, 0.0));
    let b = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(6.0, 0.0)];
    let x = least_squares_solve(&a, &b).unwrap();
    assert!((x[0] - c(3.0, 0.0)).norm() < 1e-14);
}

#[test]
fn f32_kernels_agree_with_f64() {
    let mut rng = ChaCha20Rng::seed_from_u64(16);
    let a = random_vec(&mut rng, 20);
    let b = random_vec(&mut rng, 9);
    let a32: Vec<_> = a.iter().map(|v| trbeam::C32::new(v.re as f32, v.im as f32)).collect();
    let b32: Vec<_> = b.iter().map(|v| trbeam::C32::new(v.re as f32, v.im as f32)).collect();
    let c64 = convolve(&a, &b).unwrap();
    let c32 = convolve(&a32, &b32).unwrap();
    for (x, y) in c64.iter().zip(&c32) {
        assert!((x.re - y.re as f64).abs() < 1e-5 && (x.im - y.im as f64).abs() < 1e-5);
    }
    let f32d = dft(&a32, 32).unwrap();
    let f64d = dft(&a, 32).unwrap();
    for (x, y) in f64d.iter().zip(&f32d) {
        assert!((x.re - y.re as f64).abs() < 1e-4);
    }
}

fn complex_vec(len: impl Into<prop::collection::SizeRange>) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0).prop_map(|(r, i)| c(r, i)), len)
}

proptest! {
    #[test]
    fn convolution_commutes(a in complex_vec(1..30), b in complex_vec(1..30)) {
        let ab = convolve(&a, &b).unwrap();
        let ba = convolve(&b, &a).unwrap();
        prop_assert_eq!(ab.len(), a.len() + b.len() - 1);
        prop_assert!(max_err(&ab, &ba) < 1e-9);
    }

    #[test]
    fn convolution_with_conj_reverse_peaks_at_energy(a in complex_vec(1..30)) {
        // (a*(-t) ⊗ a)(L-1) = ‖a‖², the matched-filter identity behind TR.
        let r = convolve(&conj_reverse(&a), &a).unwrap();
        let e: f64 = a.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((r[a.len() - 1] - c(e, 0.0)).norm() < 1e-9 * (1.0 + e));
        prop_assert!(r.iter().all(|v| v.norm() <= e * (1.0 + 1e-12) + 1e-12));
    }

    #[test]
    fn dft_round_trip_and_parseval(x in complex_vec(1..64), pad in 0usize..16) {
        let n = x.len() + pad;
        let f = dft(&x, n).unwrap();
        let back = idft(&f).unwrap();
        let mut padded = x.clone();
        padded.resize(n, c(0.0, 0.0));
        prop_assert!(max_err(&back, &padded) < 1e-9);
        let et: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let ef: f64 = f.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        prop_assert!((et - ef).abs() < 1e-9 * (1.0 + et));
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal(
        m in 3usize..12,
        k_frac in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let k = 1 + ((m - 2) as f64 * k_frac) as usize;
        let cols: Vec<Vec<C64>> = (0..k).map(|_| random_vec(&mut rng, m)).collect();
        let b = ComplexMatrix::from_columns(&cols).unwrap();
        let v = random_vec(&mut rng, m);
        let w = nullspace_project(&b, &v).unwrap();
        for col in &cols {
            let ip: C64 = w.iter().zip(col).map(|(x, y)| y.conj() * x).sum();
            prop_assert!(ip.norm() < 1e-10);
        }
        let w2 = nullspace_project(&b, &w).unwrap();
        prop_assert!(max_err(&w, &w2) < 1e-10);
        let nv: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        let nw: f64 = w.iter().map(|x| x.norm_sqr()).sum();
        prop_assert!(nw <= nv * (1.0 + 1e-12));
    }

    #[test]
    fn least_squares_residual_is_minimal(seed in any::<u64>(), n in 1usize..6, extra in 0usize..8) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let m = n + extra;
        let a = ComplexMatrix::new(m, n, random_vec(&mut rng, m * n)).unwrap();
        let b = random_vec(&mut rng, m);
        let x = least_squares_solve(&a, &b).unwrap();
        let res = |x: &[C64]| -> f64 {
            a.mul_vec(x).unwrap().iter().zip(&b).map(|(p, q)| (p - q).norm_sqr()).sum()
        };
        let base = res(&x);
        let mut y = x.clone();
        y[0] += c(1e-3, -1e-3);
        prop_assert!(res(&y) >= base - 1e-12);
    }
}

#[test]
fn nearly_collinear_gram_is_loaded_not_failed() {
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    let base = random_vec(&mut rng, 6);
    let tweak: Vec<C64> = base.iter().map(|v| v * c(1.0, 0.0) + c(1e-9, 0.0)).collect();
    let b = ComplexMatrix::from_columns(&[base.clone(), tweak]).unwrap();
    let v = random_vec(&mut rng, 6);
    let p = nullspace_project_with_gram(&b, &b.gram(), &v, 1e-12).unwrap();
    assert!(p.regularized);
    assert!(p.vector.iter().all(|x| x.is_finite()));
    let ip: C64 = p.vector.iter().zip(&base).map(|(x, y)| y.conj() * x).sum();
    assert!(ip.norm() < 1e-6);
    assert!(matches!(
        nullspace_project_with_gram(&b, &b.gram(), &v, 0.0),
        Err(Error::NearSingular { .. })
    ));
}
