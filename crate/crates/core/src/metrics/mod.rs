//! Closed-form power predictions, achievable sum rate and Monte Carlo
//! aggregation.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSet, PowerDelayProfile};
use crate::error::{Error, Result};
use crate::link::PowerDecomposition;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredictionBasis {
    /// Mean TR desired power `MρΓ/N`.
    TrSignal,
    /// Upper bound on the mean ETR desired power, also `MρΓ/N`.
    EtrSignalBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalPrediction {
    pub signal_power: f64,
    pub basis: PredictionBasis,
    pub num_antennas: usize,
    pub num_users: usize,
    pub rho: f64,
    pub gamma: f64,
}

fn signal_prediction(m: usize, n: usize, rho: f64, gamma: f64, basis: PredictionBasis) -> Result<TheoreticalPrediction> {
    if m == 0 || n == 0 || !(rho > 0.0) || !(gamma > 0.0) {
        return Err(Error::InvalidArgument("prediction inputs must be positive".into()));
    }
    Ok(TheoreticalPrediction {
        signal_power: m as f64 * rho * gamma / n as f64,
        basis,
        num_antennas: m,
        num_users: n,
        rho,
        gamma,
    })
}

pub fn tr_signal_power_prediction(m: usize, n: usize, rho: f64, gamma: f64) -> Result<TheoreticalPrediction> {
    signal_prediction(m, n, rho, gamma, PredictionBasis::TrSignal)
}

pub fn etr_signal_power_bound(m: usize, n: usize, rho: f64, gamma: f64) -> Result<TheoreticalPrediction> {
    signal_prediction(m, n, rho, gamma, PredictionBasis::EtrSignalBound)
}

/// Cross-antenna tap moments `R_{mm'}(l) = E[h_m(l) h*_{m'}(l)]`, pooled
/// over users.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondMomentTable {
    num_antennas: usize,
    num_taps: usize,
    data: Vec<Complex<f64>>,
}

impl SecondMomentTable {
    pub fn new(num_antennas: usize, num_taps: usize, data: Vec<Complex<f64>>) -> Result<Self> {
        if data.len() != num_antennas * num_antennas * num_taps {
            return Err(Error::InvalidArgument("moment table has the wrong size".into()));
        }
        Ok(Self {
            num_antennas,
            num_taps,
            data,
        })
    }

    /// Independent antennas: `R_{mm'}(l) = A_h(l) δ_{mm'}`.
    pub fn uncorrelated(pdp: &PowerDelayProfile, num_antennas: usize) -> Self {
        let l = pdp.taps.len();
        let mut data = vec![Complex::new(0.0, 0.0); num_antennas * num_antennas * l];
        for m in 0..num_antennas {
            for (t, &a) in pdp.taps.iter().enumerate() {
                data[(m * num_antennas + m) * l + t] = Complex::new(a, 0.0);
            }
        }
        Self {
            num_antennas,
            num_taps: l,
            data,
        }
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_taps(&self) -> usize {
        self.num_taps
    }

    pub fn get(&self, m: usize, m2: usize, l: usize) -> Complex<f64> {
        self.data[(m * self.num_antennas + m2) * self.num_taps + l]
    }
}

/// Sample moments over every realization and user in `batch`.
pub fn estimate_second_moments<T: Real>(batch: &[ChannelSet<T>]) -> Result<SecondMomentTable> {
    let first = batch
        .first()
        .ok_or_else(|| Error::InsufficientData("no realizations".into()))?;
    let (m_ant, l) = (first.num_antennas(), first.num_taps());
    let mut data = vec![Complex::new(0.0, 0.0); m_ant * m_ant * l];
    let mut count = 0usize;
    let mut col = vec![Complex::new(0.0, 0.0); m_ant];
    for ch in batch {
        if ch.num_antennas() != m_ant || ch.num_taps() != l {
            return Err(Error::InvalidArgument("inhomogeneous batch".into()));
        }
        for n in 0..ch.num_users() {
            for t in 0..l {
                for (m, c) in col.iter_mut().enumerate() {
                    let v = ch.cir(m, n)[t];
                    *c = Complex::new(v.re.as_f64(), v.im.as_f64());
                }
                for m in 0..m_ant {
                    for m2 in 0..m_ant {
                        data[(m * m_ant + m2) * l + t] += col[m] * col[m2].conj();
                    }
                }
            }
            count += 1;
        }
    }
    let scale = 1.0 / count as f64;
    for d in &mut data {
        *d *= scale;
    }
    SecondMomentTable::new(m_ant, l, data)
}

/// Approximate mean TR ISI and IUI powers from cross-antenna tap moments.
///
/// Both are `ρ/(MNΓ)` times sums of `R_{mm'}(l') R*_{mm'}(l'+k)` over
/// antenna pairs, taps and lags `k`: ISI over `k ≠ 0`, IUI over all `k`
/// times `N - 1`. The lag sum collapses to `|Σ_l R_{mm'}(l)|²`.
pub fn tr_interference_prediction(
    table: &SecondMomentTable,
    num_antennas: usize,
    num_users: usize,
    rho: f64,
    gamma: f64,
) -> Result<(f64, f64)> {
    if table.num_antennas != num_antennas {
        return Err(Error::InvalidArgument(format!(
            "moment table is for {} antennas, expected {num_antennas}",
            table.num_antennas
        )));
    }
    if num_users == 0 || !(rho > 0.0) || !(gamma > 0.0) {
        return Err(Error::InvalidArgument("prediction inputs must be positive".into()));
    }
    let (mut all_lags, mut zero_lag) = (0.0, 0.0);
    for pair in table.data.chunks_exact(table.num_taps) {
        let sum: Complex<f64> = pair.iter().sum();
        all_lags += sum.norm_sqr();
        zero_lag += pair.iter().map(|r| r.norm_sqr()).sum::<f64>();
    }
    let scale = rho / (num_antennas as f64 * num_users as f64 * gamma);
    let isi = scale * (all_lags - zero_lag);
    let iui = scale * (num_users as f64 - 1.0) * all_lags;
    Ok((isi.max(0.0), iui))
}

/// `Σ_n log2(1 + P_s / (P_isi + P_iui + σ_z²))` for one realization.
pub fn sum_rate<T: Real>(decomp: &PowerDecomposition<T>, sigma_z2: f64) -> Result<f64> {
    if !(sigma_z2 > 0.0) || !sigma_z2.is_finite() {
        return Err(Error::InvalidArgument(format!("noise variance {sigma_z2} must be positive")));
    }
    Ok((0..decomp.num_users())
        .map(|n| {
            let s = decomp.signal[n].as_f64();
            let i = decomp.isi[n].as_f64() + decomp.iui[n].as_f64();
            (1.0 + s / (i + sigma_z2)).log2()
        })
        .sum())
}

/// `N log2(1 + MρΓ/(Nσ_z²))`.
pub fn sum_rate_cap(m: usize, n: usize, rho: f64, gamma: f64, sigma_z2: f64) -> f64 {
    n as f64 * (1.0 + m as f64 * rho * gamma / (n as f64 * sigma_z2)).log2()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// `None` for a single record.
    pub std_error: Option<f64>,
}

impl Summary {
    /// Order-independent: values are sorted before summation.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData("no records to summarize".into()));
        }
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std_error = (values.len() > 1).then(|| {
            let mut dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
            dev.sort_by(f64::total_cmp);
            (dev.iter().sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
        });
        Ok(Self {
            count: values.len(),
            mean,
            std_error,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumRateResult {
    pub per_realization: Vec<f64>,
    pub mean: f64,
    pub std_error: Option<f64>,
}

impl SumRateResult {
    pub fn from_rates(rates: Vec<f64>) -> Result<Self> {
        let s = Summary::from_values(rates.clone())?;
        Ok(Self {
            per_realization: rates,
            mean: s.mean,
            std_error: s.std_error,
        })
    }
}

/// Mean, standard error and count per key.
pub fn aggregate<K: Ord, I: IntoIterator<Item = (K, f64)>>(records: I) -> Result<BTreeMap<K, Summary>> {
    let mut cells: BTreeMap<K, Vec<f64>> = BTreeMap::new();
    for (k, v) in records {
        cells.entry(k).or_default().push(v);
    }
    if cells.is_empty() {
        return Err(Error::InsufficientData("empty record stream".into()));
    }
    cells
        .into_iter()
        .map(|(k, v)| Summary::from_values(v).map(|s| (k, s)))
        .collect()
}

/// Ordinary least-squares slope of `ys` on `xs`.
pub fn regression_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InsufficientData("regression needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("regressor has no spread".into()));
    }
    Ok(sxy / sxx)
}
