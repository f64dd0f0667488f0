//! End-to-end responses, received power decomposition and BER simulation.

mod ber;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::dsp::{conj_reverse, Dft};
use crate::error::{Error, Result};
use crate::prefilter::{PrefilterSet, Technique};
use crate::Real;

pub use ber::{
    awgn, noise_variance, simulate_ber, simulate_ber_sweep, wilson_interval, BerMode, BerOptions,
    BerResult, WILSON_Z,
};

/// `q[n'][n](t) = Σ_m p*_{m,n'}(-t) ⊗ h_{m,n}(t)`: stream `n'` as seen by
/// receiver `n`, length `L + L_p - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeResponse<T> {
    num_users: usize,
    len: usize,
    q: Vec<Complex<T>>,
    /// Sampling delay of each receiver.
    pub peaks: Vec<usize>,
}

impl<T: Real> CompositeResponse<T> {
    pub fn from_parts(num_users: usize, len: usize, q: Vec<Complex<T>>, peaks: Vec<usize>) -> Result<Self> {
        if q.len() != num_users * num_users * len || peaks.len() != num_users {
            return Err(Error::InvalidArgument("composite response shape mismatch".into()));
        }
        if peaks.iter().any(|&p| p >= len) {
            return Err(Error::InvalidArgument("peak index beyond composite length".into()));
        }
        Ok(Self { num_users, len, q, peaks })
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Response from stream `source` to receiver `receiver`.
    pub fn response(&self, source: usize, receiver: usize) -> &[Complex<T>] {
        let start = (source * self.num_users + receiver) * self.len;
        &self.q[start..start + self.len]
    }
}

/// Computes all `N x N` composite responses on an `L + L_p - 1` point DFT
/// grid, where circular and linear convolution coincide.
pub fn composite_response<T: Real>(p: &PrefilterSet<T>, h: &ChannelSet<T>) -> Result<CompositeResponse<T>> {
    let (m_ant, n_users) = (h.num_antennas(), h.num_users());
    if p.num_antennas() != m_ant || p.num_users() != n_users {
        return Err(Error::InvalidArgument(format!(
            "pre-filter is {}x{}, channel is {m_ant}x{n_users}",
            p.num_antennas(),
            p.num_users()
        )));
    }
    let len = h.num_taps() + p.len() - 1;
    let dft = Dft::<T>::new(len)?;
    let mut hf = Vec::with_capacity(m_ant * n_users);
    let mut pf = Vec::with_capacity(m_ant * n_users);
    for m in 0..m_ant {
        for n in 0..n_users {
            hf.push(dft.forward(h.cir(m, n))?);
            pf.push(dft.forward(&conj_reverse(p.filter(m, n)))?);
        }
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut q = vec![zero; n_users * n_users * len];
    for src in 0..n_users {
        for rx in 0..n_users {
            let out = &mut q[(src * n_users + rx) * len..][..len];
            for m in 0..m_ant {
                let a = &pf[m * n_users + src];
                let b = &hf[m * n_users + rx];
                for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
                    *o += x * y;
                }
            }
            dft.inverse_in_place(out);
        }
    }

    let peaks = match p.technique {
        Technique::Intr => (0..n_users)
            .map(|n| {
                let r = &q[(n * n_users + n) * len..][..len];
                let mut best = 0;
                for (t, v) in r.iter().enumerate() {
                    if v.norm_sqr() > r[best].norm_sqr() {
                        best = t;
                    }
                }
                best
            })
            .collect(),
        _ => p.delay_reference.clone(),
    };
    CompositeResponse::from_parts(n_users, len, q, peaks)
}

/// Per-user received power split into desired, ISI and IUI terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerDecomposition<T> {
    pub rho: T,
    pub signal: Vec<T>,
    pub isi: Vec<T>,
    pub iui: Vec<T>,
}

impl<T: Real> PowerDecomposition<T> {
    pub fn num_users(&self) -> usize {
        self.signal.len()
    }

    fn mean(v: &[T]) -> f64 {
        v.iter().map(|x| x.as_f64()).sum::<f64>() / v.len() as f64
    }

    /// User-averaged `P_s`.
    pub fn mean_signal(&self) -> f64 {
        Self::mean(&self.signal)
    }

    pub fn mean_isi(&self) -> f64 {
        Self::mean(&self.isi)
    }

    pub fn mean_iui(&self) -> f64 {
        Self::mean(&self.iui)
    }
}

/// `P_s = ρ|q_nn(peak)|²`, `P_isi = ρ Σ_{t≠peak} |q_nn(t)|²`,
/// `P_iui = ρ Σ_{n'≠n} Σ_t |q_{n'n}(t)|²`.
pub fn power_decomposition<T: Real>(q: &CompositeResponse<T>, rho: T) -> PowerDecomposition<T> {
    let n_users = q.num_users();
    let mut signal = Vec::with_capacity(n_users);
    let mut isi = Vec::with_capacity(n_users);
    let mut iui = Vec::with_capacity(n_users);
    for n in 0..n_users {
        let own = q.response(n, n);
        let peak = q.peaks[n];
        let mut s_isi = T::zero();
        for (t, v) in own.iter().enumerate() {
            if t != peak {
                s_isi += v.norm_sqr();
            }
        }
        let mut s_iui = T::zero();
        for src in (0..n_users).filter(|&s| s != n) {
            s_iui += q.response(src, n).iter().map(|v| v.norm_sqr()).sum::<T>();
        }
        signal.push(rho * own[peak].norm_sqr());
        isi.push(rho * s_isi);
        iui.push(rho * s_iui);
    }
    PowerDecomposition { rho, signal, isi, iui }
}
