use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};
use crate::Real;

/// Full linear convolution, length `a.len() + b.len() - 1`.
pub fn convolve<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    if a.is_empty() || b.is_empty() {
        return invalid("convolution of an empty sequence");
    }
    let mut out = vec![Complex::new(T::zero(), T::zero()); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (o, &y) in out[i..].iter_mut().zip(b) {
            *o += x * y;
        }
    }
    Ok(out)
}

/// `x*(K-1-t)`: the time-reversed conjugate used by every TR-style filter.
pub fn conj_reverse<T: Real>(x: &[Complex<T>]) -> Vec<Complex<T>> {
    x.iter().rev().map(|v| v.conj()).collect()
}

/// Planned forward/inverse DFT of a fixed length. The inverse carries the
/// `1/N` factor so that `inverse(forward(x)) == x`.
#[derive(Clone)]
pub struct Dft<T: Real> {
    len: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for Dft<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("len", &self.len).finish()
    }
}

impl<T: Real> Dft<T> {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return invalid("DFT length must be positive");
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            len,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Zero-pads `x` to the planned length and transforms it.
    pub fn forward(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if x.len() > self.len {
            return invalid(format!(
                "input of length {} exceeds DFT length {}",
                x.len(),
                self.len
            ));
        }
        let mut buf = x.to_vec();
        buf.resize(self.len, Complex::new(T::zero(), T::zero()));
        self.fwd.process(&mut buf);
        Ok(buf)
    }

    pub fn forward_in_place(&self, buf: &mut [Complex<T>]) {
        debug_assert_eq!(buf.len(), self.len);
        self.fwd.process(buf);
    }

    pub fn inverse(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if x.len() != self.len {
            return invalid(format!(
                "inverse DFT expects {} bins, got {}",
                self.len,
                x.len()
            ));
        }
        let mut buf = x.to_vec();
        self.inverse_in_place(&mut buf);
        Ok(buf)
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex<T>]) {
        debug_assert_eq!(buf.len(), self.len);
        self.inv.process(buf);
        let scale = T::one() / T::cast(self.len as f64);
        for v in buf.iter_mut() {
            *v = *v * scale;
        }
    }
}

/// `n_points`-point DFT of `x` (zero-padded). Errors if `n_points < x.len()`.
pub fn dft<T: Real>(x: &[Complex<T>], n_points: usize) -> Result<Vec<Complex<T>>> {
    if n_points < x.len() {
        return invalid(format!(
            "DFT size {n_points} smaller than input length {}",
            x.len()
        ));
    }
    Dft::new(n_points)?.forward(x)
}

pub fn idft<T: Real>(x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    Dft::new(x.len())?.inverse(x)
}
