//! Transmit pre-filters: conventional TR, TR with a zero-forcing
//! pre-equalizer (ETR) and interference-nulling TR (INTR).
//!
//! A [`PrefilterSet`] stores, for each antenna `m` and user `n`, the filter
//! `p_{m,n}` whose conjugate time reversal is applied at the transmitter.
//! For TR this is the normalised CIR itself, so the end-to-end response is
//! `Σ_m p*_{m,n'}(-t) ⊗ h_{m,n}(t)`.

mod etr;
mod intr;
mod io;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::Real;

pub use etr::{default_target_delay, design_zf_equalizer, etr_prefilter, etr_prefilter_with_delay, Equalizer};
pub use intr::{intr_prefilter, intr_spectra, IntrSpectra};
pub use io::{read_prefilter_set, write_prefilter_set, PREFILTER_MAGIC};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Technique {
    #[serde(rename = "TR")]
    Tr,
    #[serde(rename = "ETR")]
    Etr,
    #[serde(rename = "INTR")]
    Intr,
}

impl Technique {
    pub const ALL: [Technique; 3] = [Technique::Tr, Technique::Etr, Technique::Intr];

    pub fn label(self) -> &'static str {
        match self {
            Technique::Tr => "TR",
            Technique::Etr => "ETR",
            Technique::Intr => "INTR",
        }
    }

    pub fn code(self) -> u32 {
        match self {
            Technique::Tr => 0,
            Technique::Etr => 1,
            Technique::Intr => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.code() == code)
    }
}

impl std::fmt::Display for Technique {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Technique {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TR" => Ok(Technique::Tr),
            "ETR" => Ok(Technique::Etr),
            "INTR" => Ok(Technique::Intr),
            other => Err(Error::Config(format!("unknown technique `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrefilterSet<T> {
    num_antennas: usize,
    num_users: usize,
    len: usize,
    taps: Vec<Complex<T>>,
    pub technique: Technique,
    /// Expected peak delay of each user's composite response.
    pub delay_reference: Vec<usize>,
    /// Frequency bins whose projection needed Tikhonov loading (INTR only).
    pub regularized_bins: usize,
}

impl<T: Real> PrefilterSet<T> {
    /// Wraps a tap tensor laid out as `[(m * N + n) * L_p + t]`.
    pub fn from_taps(
        num_antennas: usize,
        num_users: usize,
        len: usize,
        taps: Vec<Complex<T>>,
        technique: Technique,
        delay_reference: Vec<usize>,
    ) -> Result<Self> {
        if num_antennas == 0 || num_users == 0 || len == 0 {
            return Err(Error::InvalidArgument("empty pre-filter dimensions".into()));
        }
        if taps.len() != num_antennas * num_users * len {
            return Err(Error::InvalidArgument(format!(
                "expected {} pre-filter taps, got {}",
                num_antennas * num_users * len,
                taps.len()
            )));
        }
        if delay_reference.len() != num_users {
            return Err(Error::InvalidArgument("one delay reference per user required".into()));
        }
        Ok(Self {
            num_antennas,
            num_users,
            len,
            taps,
            technique,
            delay_reference,
            regularized_bins: 0,
        })
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    /// Filter length `L_p`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn taps(&self) -> &[Complex<T>] {
        &self.taps
    }

    pub fn filter(&self, m: usize, n: usize) -> &[Complex<T>] {
        let start = (m * self.num_users + n) * self.len;
        &self.taps[start..start + self.len]
    }

    pub fn scale(&mut self, factor: T) {
        for p in &mut self.taps {
            *p = *p * factor;
        }
    }

    fn normalize(&mut self) -> Result<()> {
        let e = prefilter_energy(self);
        if !(e > T::zero()) || !e.is_finite() {
            return Err(Error::DegenerateChannel(
                "pre-filter has zero or non-finite energy".into(),
            ));
        }
        self.scale(T::one() / e.sqrt());
        Ok(())
    }
}

/// `Σ_{m,n,t} |p_{m,n}(t)|²`.
pub fn prefilter_energy<T: Real>(p: &PrefilterSet<T>) -> T {
    p.taps.iter().map(|x| x.norm_sqr()).sum()
}

/// Conventional TR: `p_{m,n} = h_{m,n} / sqrt(Σ_{m,n,t} |h|²)`, peak at `L-1`.
pub fn tr_prefilter<T: Real>(channels: &ChannelSet<T>) -> Result<PrefilterSet<T>> {
    let power = channels.total_energy();
    if !(power > T::zero()) || !power.is_finite() {
        return Err(Error::DegenerateChannel("all-zero channel".into()));
    }
    let scale = T::one() / power.sqrt();
    let taps = channels.taps().iter().map(|h| *h * scale).collect();
    let l = channels.num_taps();
    PrefilterSet::from_taps(
        channels.num_antennas(),
        channels.num_users(),
        l,
        taps,
        Technique::Tr,
        vec![l - 1; channels.num_users()],
    )
}

/// Builds any technique at total pre-filter length `L_p`.
///
/// TR ignores `prefilter_len` and has length `L`. ETR uses an equalizer of
/// `L_E = L_p - L + 1` taps. `reg_epsilon` only matters for INTR.
pub fn build_prefilter<T: Real>(
    technique: Technique,
    channels: &ChannelSet<T>,
    prefilter_len: usize,
    reg_epsilon: f64,
) -> Result<PrefilterSet<T>> {
    let l = channels.num_taps();
    match technique {
        Technique::Tr => tr_prefilter(channels),
        Technique::Etr => {
            if prefilter_len < l {
                return Err(Error::InvalidArgument(format!(
                    "ETR pre-filter length {prefilter_len} shorter than channel length {l}"
                )));
            }
            etr_prefilter(channels, prefilter_len - l + 1)
        }
        Technique::Intr => intr_prefilter(channels, prefilter_len, reg_epsilon),
    }
}
