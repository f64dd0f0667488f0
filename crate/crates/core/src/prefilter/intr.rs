use num_complex::Complex;

use super::{tr_prefilter, PrefilterSet, Technique};
use crate::channel::ChannelSet;
use crate::dsp::{nullspace_project_with_gram, ComplexMatrix, Dft};
use crate::error::{Error, Result};
use crate::link::composite_response;
use crate::Real;

/// Per-bin channel and projected pre-filter vectors before truncation.
///
/// Both tensors are bin-major, `[(f * M + m) * N + n]`, so each bin is an
/// `M x N` row-major matrix.
#[derive(Clone, Debug)]
pub struct IntrSpectra<T> {
    pub num_bins: usize,
    pub num_antennas: usize,
    pub num_users: usize,
    pub channel: Vec<Complex<T>>,
    pub projected: Vec<Complex<T>>,
    pub regularized_bins: usize,
}

impl<T: Real> IntrSpectra<T> {
    fn at(&self, data: &[Complex<T>], f: usize, n: usize) -> Vec<Complex<T>> {
        let base = f * self.num_antennas * self.num_users;
        (0..self.num_antennas)
            .map(|m| data[base + m * self.num_users + n])
            .collect()
    }

    /// `H_n(f)`.
    pub fn channel_vector(&self, f: usize, n: usize) -> Vec<Complex<T>> {
        self.at(&self.channel, f, n)
    }

    /// `P_{⋆,n}(f)`.
    pub fn prefilter_vector(&self, f: usize, n: usize) -> Vec<Complex<T>> {
        self.at(&self.projected, f, n)
    }
}

/// Projects the TR pre-filter spectrum of every user onto the orthogonal
/// complement of the other users' channel vectors, bin by bin, on an
/// `L + L_p - 1` point grid.
pub fn intr_spectra<T: Real>(
    channels: &ChannelSet<T>,
    prefilter_len: usize,
    reg_epsilon: f64,
) -> Result<IntrSpectra<T>> {
    let (m_ant, n_users, l) = (channels.num_antennas(), channels.num_users(), channels.num_taps());
    if prefilter_len < l {
        return Err(Error::InvalidArgument(format!(
            "INTR pre-filter length {prefilter_len} shorter than channel length {l}"
        )));
    }
    if n_users > 1 && m_ant < n_users {
        return Err(Error::InvalidArgument(format!(
            "{m_ant} antennas cannot null {} interferers",
            n_users - 1
        )));
    }
    let nf = l + prefilter_len - 1;
    let dft = Dft::<T>::new(nf)?;
    let tr = tr_prefilter(channels)?;

    let zero = Complex::new(T::zero(), T::zero());
    let mut channel = vec![zero; nf * m_ant * n_users];
    let mut seed = vec![zero; nf * m_ant * n_users];
    for m in 0..m_ant {
        for n in 0..n_users {
            let hf = dft.forward(channels.cir(m, n))?;
            let pf = dft.forward(tr.filter(m, n))?;
            for f in 0..nf {
                channel[(f * m_ant + m) * n_users + n] = hf[f];
                seed[(f * m_ant + m) * n_users + n] = pf[f];
            }
        }
    }

    let mut projected = seed.clone();
    let mut regularized_bins = 0;
    if n_users > 1 {
        let k = n_users - 1;
        for f in 0..nf {
            let block = f * m_ant * n_users..(f + 1) * m_ant * n_users;
            let h = ComplexMatrix::new(m_ant, n_users, channel[block.clone()].to_vec())?;
            let gram = h.gram();
            let mut bin_regularized = false;
            for n in 0..n_users {
                let others = |c: usize| if c < n { c } else { c + 1 };
                let b = ComplexMatrix::from_fn(m_ant, k, |r, c| h.get(r, others(c)));
                let g = ComplexMatrix::from_fn(k, k, |i, j| gram.get(others(i), others(j)));
                let v: Vec<_> = (0..m_ant).map(|m| seed[block.start + m * n_users + n]).collect();
                let p = nullspace_project_with_gram(&b, &g, &v, reg_epsilon)?;
                bin_regularized |= p.regularized;
                for (m, w) in p.vector.into_iter().enumerate() {
                    projected[block.start + m * n_users + n] = w;
                }
            }
            if bin_regularized {
                regularized_bins += 1;
            }
        }
    }
    if regularized_bins > 0 {
        log::warn!("INTR: {regularized_bins} of {nf} bins needed Tikhonov loading");
    }

    Ok(IntrSpectra {
        num_bins: nf,
        num_antennas: m_ant,
        num_users: n_users,
        channel,
        projected,
        regularized_bins,
    })
}

/// Interference-nulling TR.
///
/// The projected spectra are brought back to time on the `L + L_p - 1`
/// grid and cut to `L_p` samples with a window centred on the TR seed:
/// the stored filter starts `floor((L_p - L) / 2)` samples before it, so
/// the circular pre- and post-cursors that the projection spreads around
/// the seed are both kept. The set is renormalised to unit energy and each
/// user's delay reference is the peak of its own composite response.
///
/// With a single user nothing is projected and the TR taps are returned
/// unchanged (zero-padded when `L_p > L`).
pub fn intr_prefilter<T: Real>(
    channels: &ChannelSet<T>,
    prefilter_len: usize,
    reg_epsilon: f64,
) -> Result<PrefilterSet<T>> {
    let (m_ant, n_users, l) = (channels.num_antennas(), channels.num_users(), channels.num_taps());
    if prefilter_len < l {
        return Err(Error::InvalidArgument(format!(
            "INTR pre-filter length {prefilter_len} shorter than channel length {l}"
        )));
    }
    let shift = (prefilter_len - l) / 2;
    let zero = Complex::new(T::zero(), T::zero());
    let mut taps = vec![zero; m_ant * n_users * prefilter_len];

    let regularized_bins = if n_users == 1 {
        let tr = tr_prefilter(channels)?;
        for m in 0..m_ant {
            let start = m * prefilter_len + shift;
            taps[start..start + l].copy_from_slice(tr.filter(m, 0));
        }
        0
    } else {
        let spectra = intr_spectra(channels, prefilter_len, reg_epsilon)?;
        let nf = spectra.num_bins;
        let dft = Dft::<T>::new(nf)?;
        let mut buf = vec![zero; nf];
        for m in 0..m_ant {
            for n in 0..n_users {
                for (f, b) in buf.iter_mut().enumerate() {
                    *b = spectra.projected[(f * m_ant + m) * n_users + n];
                }
                dft.inverse_in_place(&mut buf);
                let out = &mut taps[(m * n_users + n) * prefilter_len..][..prefilter_len];
                for (t, o) in out.iter_mut().enumerate() {
                    *o = buf[(t + nf - shift) % nf];
                }
            }
        }
        spectra.regularized_bins
    };

    let mut set = PrefilterSet::from_taps(
        m_ant,
        n_users,
        prefilter_len,
        taps,
        Technique::Intr,
        vec![0; n_users],
    )?;
    if n_users > 1 {
        set.normalize()?;
    }
    set.regularized_bins = regularized_bins;
    set.delay_reference = composite_response(&set, channels)?.peaks;
    Ok(set)
}
