use num_complex::Complex;

use super::{PrefilterSet, Technique};
use crate::channel::ChannelSet;
use crate::dsp::{conj_reverse, convolve, least_squares_solve, ComplexMatrix};
use crate::error::{Error, Result};
use crate::Real;

/// Zero-forcing pre-equalizer for one user.
#[derive(Clone, Debug, PartialEq)]
pub struct Equalizer<T> {
    pub taps: Vec<Complex<T>>,
    pub target_delay: usize,
    /// `‖R g − δ(t − t0)‖`.
    pub residual: T,
}

/// Centre of the equalized autocorrelation: `L - 1 + floor(L_E / 2)`.
pub fn default_target_delay(num_taps: usize, eq_len: usize) -> usize {
    num_taps - 1 + eq_len / 2
}

/// `r_n(t) = Σ_m h*_{m,n}(L-1-t) ⊗ h_{m,n}(t)`.
fn autocorrelation<T: Real>(channels: &ChannelSet<T>, user: usize) -> Result<Vec<Complex<T>>> {
    let l = channels.num_taps();
    let mut r = vec![Complex::new(T::zero(), T::zero()); 2 * l - 1];
    for m in 0..channels.num_antennas() {
        let h = channels.cir(m, user);
        for (acc, v) in r.iter_mut().zip(convolve(&conj_reverse(h), h)?) {
            *acc += v;
        }
    }
    Ok(r)
}

/// Least-squares `g` with `g ⊗ r_n ≈ δ(t - t0)`, over the full
/// `(2L - 1 + L_E - 1) x L_E` convolution matrix.
pub fn design_zf_equalizer<T: Real>(
    channels: &ChannelSet<T>,
    user: usize,
    eq_len: usize,
    target_delay: usize,
) -> Result<Equalizer<T>> {
    let l = channels.num_taps();
    if user >= channels.num_users() {
        return Err(Error::InvalidArgument(format!("user {user} out of range")));
    }
    if eq_len == 0 {
        return Err(Error::InvalidArgument("equalizer length must be positive".into()));
    }
    let rows = 2 * l - 1 + eq_len - 1;
    if target_delay >= rows {
        return Err(Error::InvalidArgument(format!(
            "target delay {target_delay} outside the {rows}-sample equalized response"
        )));
    }
    let wrap = |e: Error| Error::Equalizer {
        user,
        source: Box::new(e),
    };
    let r = autocorrelation(channels, user).map_err(wrap)?;
    let zero = Complex::new(T::zero(), T::zero());
    let a = ComplexMatrix::from_fn(rows, eq_len, |i, j| {
        if i >= j && i - j < r.len() {
            r[i - j]
        } else {
            zero
        }
    });
    let mut d = vec![zero; rows];
    d[target_delay] = Complex::new(T::one(), T::zero());
    let g = least_squares_solve(&a, &d).map_err(wrap)?;
    let fitted = a.mul_vec(&g).map_err(wrap)?;
    let residual = fitted
        .iter()
        .zip(&d)
        .map(|(f, d)| (f - d).norm_sqr())
        .sum::<T>()
        .sqrt();
    Ok(Equalizer {
        taps: g,
        target_delay,
        residual,
    })
}

/// ETR with the default centred target delay.
pub fn etr_prefilter<T: Real>(channels: &ChannelSet<T>, eq_len: usize) -> Result<PrefilterSet<T>> {
    let t0 = default_target_delay(channels.num_taps(), eq_len.max(1));
    etr_prefilter_with_delay(channels, eq_len, t0)
}

/// Stored filter `h_{m,n} ⊗ g*_n(-t)`, normalised to unit total energy, so
/// that the transmitted `g_n ⊗ h*_{m,n}(-t)` equalizes user `n`'s
/// autocorrelation. `L_p = L + L_E - 1`, peak at `t0`.
pub fn etr_prefilter_with_delay<T: Real>(
    channels: &ChannelSet<T>,
    eq_len: usize,
    target_delay: usize,
) -> Result<PrefilterSet<T>> {
    let (m_ant, n_users, l) = (channels.num_antennas(), channels.num_users(), channels.num_taps());
    let lp = l + eq_len.max(1) - 1;
    let mut taps = Vec::with_capacity(m_ant * n_users * lp);
    let eqs = (0..n_users)
        .map(|n| design_zf_equalizer(channels, n, eq_len, target_delay))
        .collect::<Result<Vec<_>>>()?;
    let rev: Vec<_> = eqs.iter().map(|e| conj_reverse(&e.taps)).collect();
    for m in 0..m_ant {
        for (n, g) in rev.iter().enumerate() {
            taps.extend(convolve(channels.cir(m, n), g)?);
        }
    }
    let mut set = PrefilterSet::from_taps(m_ant, n_users, lp, taps, Technique::Etr, vec![target_delay; n_users])?;
    set.normalize()?;
    Ok(set)
}
