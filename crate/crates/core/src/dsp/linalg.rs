use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::Real;

/// Ratio `min |R_kk| / max |R_kk|` below which a QR factor is declared singular.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Relative Tikhonov factor for null-space projection.
pub const DEFAULT_REG_EPSILON: f64 = 1e-12;

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return invalid(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from column vectors of equal length.
    pub fn from_columns(columns: &[Vec<Complex<T>>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return invalid("columns of unequal length");
        }
        Ok(Self::from_fn(rows, columns.len(), |r, c| columns[c][r]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Complex<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if x.len() != self.cols {
            return invalid("dimension mismatch in matrix-vector product");
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| acc + a * b)
            })
            .collect())
    }

    /// `A^H x`.
    pub fn adjoint_mul_vec(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if x.len() != self.rows {
            return invalid("dimension mismatch in adjoint product");
        }
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.cols];
        for (r, &xr) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * xr;
            }
        }
        Ok(out)
    }

    /// `A^H A`.
    pub fn gram(&self) -> Self {
        let k = self.cols;
        let mut g = Self::zeros(k, k);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..k {
                let ai = row[i].conj();
                for j in i..k {
                    let idx = i * k + j;
                    g.data[idx] += ai * row[j];
                }
            }
        }
        for i in 0..k {
            let d = g.data[i * k + i];
            g.data[i * k + i] = Complex::new(d.re, T::zero());
            for j in 0..i {
                g.data[i * k + j] = g.data[j * k + i].conj();
            }
        }
        g
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt()
    }
}

/// Minimum-norm-residual solution of an overdetermined system via
/// Householder QR.
pub fn least_squares_solve<T: Real>(
    a: &ComplexMatrix<T>,
    b: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    let (m, n) = (a.rows, a.cols);
    if n == 0 || m < n {
        return invalid(format!("least squares needs rows >= cols > 0, got {m}x{n}"));
    }
    if b.len() != m {
        return invalid("right-hand side length does not match row count");
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut r = a.data.clone();
    let mut y = b.to_vec();
    let mut v = vec![zero; m];
    let mut diag = vec![T::zero(); n];

    for k in 0..n {
        let norm = (k..m).map(|i| r[i * n + k].norm_sqr()).sum::<T>().sqrt();
        if norm == T::zero() {
            diag[k] = T::zero();
            continue;
        }
        let x0 = r[k * n + k];
        let phase = if x0.norm() > T::zero() {
            x0 / x0.norm()
        } else {
            Complex::new(T::one(), T::zero())
        };
        let alpha = -phase * norm;
        for i in k..m {
            v[i] = r[i * n + k];
        }
        v[k] -= alpha;
        let vnorm2 = (k..m).map(|i| v[i].norm_sqr()).sum::<T>();
        if vnorm2 == T::zero() {
            diag[k] = norm;
            continue;
        }
        let two = T::cast(2.0);
        for j in k..n {
            let dot = (k..m).fold(zero, |acc, i| acc + v[i].conj() * r[i * n + j]);
            let s = dot * (two / vnorm2);
            for i in k..m {
                let vi = v[i];
                r[i * n + j] -= vi * s;
            }
        }
        let dot = (k..m).fold(zero, |acc, i| acc + v[i].conj() * y[i]);
        let s = dot * (two / vnorm2);
        for i in k..m {
            y[i] -= v[i] * s;
        }
        diag[k] = r[k * n + k].norm();
    }

    let dmax = diag.iter().fold(T::zero(), |a, &d| a.max(d));
    let dmin = diag.iter().fold(T::infinity(), |a, &d| a.min(d));
    if dmax == T::zero() || dmin <= T::cast(RANK_TOLERANCE) * dmax {
        return Err(Error::RankDeficient {
            condition: (dmax / dmin).as_f64(),
        });
    }

    let mut x = vec![zero; n];
    for k in (0..n).rev() {
        let mut acc = y[k];
        for j in k + 1..n {
            acc -= r[k * n + j] * x[j];
        }
        x[k] = acc / r[k * n + k];
    }
    Ok(x)
}

/// Result of projecting a vector onto the orthogonal complement of a
/// column space.
#[derive(Clone, Debug)]
pub struct NullProjection<T> {
    pub vector: Vec<Complex<T>>,
    /// Whether Tikhonov loading was needed.
    pub regularized: bool,
    /// Condition estimate of the Gram matrix from its Cholesky diagonal.
    pub condition: f64,
}

/// `(I - B (B^H B)^{-1} B^H) v` with the default relative regularization.
pub fn nullspace_project<T: Real>(
    b: &ComplexMatrix<T>,
    v: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    let g = b.gram();
    nullspace_project_with_gram(b, &g, v, DEFAULT_REG_EPSILON).map(|p| p.vector)
}

/// Null-space projection with a precomputed Gram matrix `B^H B`.
///
/// When the Cholesky-based condition estimate exceeds `1/reg_epsilon` the
/// Gram matrix is loaded with `reg_epsilon * trace / k` on the diagonal.
/// `reg_epsilon = 0` disables loading.
pub fn nullspace_project_with_gram<T: Real>(
    b: &ComplexMatrix<T>,
    gram: &ComplexMatrix<T>,
    v: &[Complex<T>],
    reg_epsilon: f64,
) -> Result<NullProjection<T>> {
    let k = b.cols;
    if v.len() != b.rows {
        return invalid("projected vector length does not match basis rows");
    }
    if gram.rows != k || gram.cols != k {
        return invalid("Gram matrix shape does not match basis");
    }
    if k == 0 {
        return Ok(NullProjection {
            vector: v.to_vec(),
            regularized: false,
            condition: 1.0,
        });
    }
    if b.rows <= k {
        return invalid(format!(
            "basis with {} columns in dimension {} leaves no null space",
            k, b.rows
        ));
    }
    if !(0.0..1.0).contains(&reg_epsilon) {
        return invalid("regularization epsilon must lie in [0, 1)");
    }

    let rhs = b.adjoint_mul_vec(v)?;
    let (solution, regularized, condition) = match cholesky(&gram.data, k) {
        Some((l, cond)) if cond <= 1.0 / reg_epsilon => (cholesky_solve(&l, k, &rhs), false, cond),
        first => {
            let cond = first.map_or(f64::INFINITY, |(_, c)| c);
            if reg_epsilon == 0.0 {
                return Err(Error::NearSingular { condition: cond });
            }
            let trace: T = (0..k).map(|i| gram.data[i * k + i].re).sum();
            if !(trace > T::zero()) {
                return Err(Error::NearSingular { condition: cond });
            }
            let lambda = T::cast(reg_epsilon) * trace / T::cast(k as f64);
            let mut loaded = gram.data.clone();
            for i in 0..k {
                loaded[i * k + i].re += lambda;
            }
            match cholesky(&loaded, k) {
                Some((l, c2)) if c2.is_finite() => {
                    log::warn!("Gram matrix regularized (condition estimate {cond:.3e})");
                    (cholesky_solve(&l, k, &rhs), true, cond)
                }
                _ => return Err(Error::NearSingular { condition: cond }),
            }
        }
    };
    let bx = b.mul_vec(&solution)?;
    let vector = v.iter().zip(&bx).map(|(&a, &c)| a - c).collect();
    Ok(NullProjection {
        vector,
        regularized,
        condition,
    })
}

/// Lower Cholesky factor of a Hermitian matrix plus a condition estimate
/// `(max L_ii / min L_ii)^2`. `None` when a pivot is not positive.
fn cholesky<T: Real>(a: &[Complex<T>], k: usize) -> Option<(Vec<Complex<T>>, f64)> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut l = vec![zero; k * k];
    for j in 0..k {
        let mut d = a[j * k + j].re;
        for p in 0..j {
            d -= l[j * k + p].norm_sqr();
        }
        if !(d > T::zero()) {
            return None;
        }
        let djj = d.sqrt();
        l[j * k + j] = Complex::new(djj, T::zero());
        for i in j + 1..k {
            let mut s = a[i * k + j];
            for p in 0..j {
                s -= l[i * k + p] * l[j * k + p].conj();
            }
            l[i * k + j] = s / djj;
        }
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for j in 0..k {
        let d = l[j * k + j].re.as_f64();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    Some((l, (hi / lo).powi(2)))
}

fn cholesky_solve<T: Real>(l: &[Complex<T>], k: usize, b: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut y = b.to_vec();
    for i in 0..k {
        let mut s = y[i];
        for p in 0..i {
            s -= l[i * k + p] * y[p];
        }
        y[i] = s / l[i * k + i].re;
    }
    for i in (0..k).rev() {
        let mut s = y[i];
        for p in i + 1..k {
            s -= l[p * k + i].conj() * y[p];
        }
        y[i] = s / l[i * k + i].re;
    }
    y
}
