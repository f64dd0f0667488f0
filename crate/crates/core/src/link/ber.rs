use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{composite_response, CompositeResponse};
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::prefilter::PrefilterSet;
use crate::Real;

/// 95% two-sided normal quantile.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

const MIN_SYMBOLS: usize = 1000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BerMode {
    /// Every detected symbol sees fresh, independent symbols on all other
    /// composite taps of every stream.
    #[default]
    Block,
    /// Continuous symbol-spaced streams convolved with the composite.
    Streaming,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerOptions {
    pub rho: f64,
    pub mode: BerMode,
}

impl Default for BerOptions {
    fn default() -> Self {
        Self {
            rho: 1.0,
            mode: BerMode::Block,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerResult {
    pub snr_db: f64,
    /// Bit errors per user.
    pub errors: Vec<u64>,
    /// Bits simulated per user.
    pub bits: u64,
    pub ber: f64,
    pub realizations: u64,
    /// 95% Wilson score interval for `ber`.
    pub interval: (f64, f64),
}

impl BerResult {
    fn new(snr_db: f64, errors: Vec<u64>, bits: u64, realizations: u64) -> Self {
        let total_errors: u64 = errors.iter().sum();
        let total_bits = bits * errors.len() as u64;
        Self {
            snr_db,
            ber: total_errors as f64 / total_bits as f64,
            interval: wilson_interval(total_errors, total_bits, WILSON_Z),
            errors,
            bits,
            realizations,
        }
    }

    pub fn total_errors(&self) -> u64 {
        self.errors.iter().sum()
    }

    pub fn total_bits(&self) -> u64 {
        self.bits * self.errors.len() as u64
    }

    /// Pools another result at the same SNR (counts add).
    pub fn merge(&mut self, other: &BerResult) -> Result<()> {
        if other.errors.len() != self.errors.len() || other.snr_db.to_bits() != self.snr_db.to_bits() {
            return Err(Error::InvalidArgument("merging incompatible BER results".into()));
        }
        let errors = self.errors.iter().zip(&other.errors).map(|(a, b)| a + b).collect();
        *self = Self::new(self.snr_db, errors, self.bits + other.bits, self.realizations + other.realizations);
        Ok(())
    }

    pub fn interval_width(&self) -> f64 {
        self.interval.1 - self.interval.0
    }
}

/// Wilson score interval for `errors` successes in `trials`.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if errors >= trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// `σ_z² = ρΓ / 10^(snr/10)`.
pub fn noise_variance(rho: f64, gamma: f64, snr_db: f64) -> Result<f64> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::Simulation(format!("invalid SNR {snr_db} dB")));
    }
    Ok(rho * gamma / 10f64.powf(snr_db / 10.0))
}

/// Adds circular complex Gaussian noise of total variance `variance`.
pub fn awgn<T: Real, R: Rng + ?Sized>(x: &[Complex<T>], variance: f64, rng: &mut R) -> Result<Vec<Complex<T>>> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::InvalidArgument(format!("noise variance {variance} must be non-negative")));
    }
    if variance == 0.0 {
        return Ok(x.to_vec());
    }
    let s = (variance / 2.0).sqrt();
    Ok(x.iter()
        .map(|v| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *v + Complex::new(T::cast(re * s), T::cast(im * s))
        })
        .collect())
}

/// BER at one SNR point with default options (ρ = 1, block mode).
pub fn simulate_ber<T: Real, R: Rng + ?Sized>(
    p: &PrefilterSet<T>,
    h: &ChannelSet<T>,
    snr_db: f64,
    num_symbols: usize,
    rng: &mut R,
) -> Result<BerResult> {
    simulate_ber_sweep(p, h, &[snr_db], num_symbols, &BerOptions::default(), rng)
        .map(|mut v| v.remove(0))
}

/// BPSK BER of every user over an SNR grid.
///
/// Each user's received sample at its composite peak is derotated by the
/// peak phase and sliced on the real part. The noise-free statistics are
/// drawn once and reused for every SNR point with fresh noise, so the
/// points share interference realizations. `num_symbols` is per user.
pub fn simulate_ber_sweep<T: Real, R: Rng + ?Sized>(
    p: &PrefilterSet<T>,
    h: &ChannelSet<T>,
    snr_grid_db: &[f64],
    num_symbols: usize,
    options: &BerOptions,
    rng: &mut R,
) -> Result<Vec<BerResult>> {
    if num_symbols < MIN_SYMBOLS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_SYMBOLS} symbols required, got {num_symbols}"
        )));
    }
    if !(options.rho > 0.0) || !options.rho.is_finite() {
        return Err(Error::InvalidArgument("transmit power must be positive".into()));
    }
    let sigmas = snr_grid_db
        .iter()
        .map(|&s| noise_variance(options.rho, h.scenario.gamma, s).map(|v| (v / 2.0).sqrt()))
        .collect::<Result<Vec<_>>>()?;
    let q = composite_response(p, h)?;
    let n_users = q.num_users();
    let mut errors = vec![vec![0u64; n_users]; snr_grid_db.len()];
    let mut stats = vec![0.0f64; num_symbols];
    let mut signs = vec![false; num_symbols];

    for n in 0..n_users {
        match options.mode {
            BerMode::Block => block_statistics(&q, n, options.rho, rng, &mut stats, &mut signs)?,
            BerMode::Streaming => streaming_statistics(&q, n, options.rho, rng, &mut stats, &mut signs)?,
        }
        for (k, &sigma) in sigmas.iter().enumerate() {
            let mut e = 0u64;
            if sigma > 0.0 {
                let noise = Normal::new(0.0, sigma).map_err(|err| Error::Simulation(err.to_string()))?;
                for (&y, &neg) in stats.iter().zip(&signs) {
                    let r = y + noise.sample(rng);
                    e += u64::from((r < 0.0) != neg);
                }
            } else {
                for (&y, &neg) in stats.iter().zip(&signs) {
                    e += u64::from((y < 0.0) != neg);
                }
            }
            errors[k][n] = e;
        }
    }

    Ok(snr_grid_db
        .iter()
        .zip(errors)
        .map(|(&snr, e)| BerResult::new(snr, e, num_symbols as u64, 1))
        .collect())
}

/// Desired amplitude and real interference coefficients after derotation.
fn receiver_taps<T: Real>(q: &CompositeResponse<T>, n: usize, rho: f64) -> Result<(f64, Vec<Vec<f64>>)> {
    let peak = q.peaks[n];
    let a = q.response(n, n)[peak];
    let mag = a.norm().as_f64();
    if !(mag > 0.0) || !mag.is_finite() {
        return Err(Error::Simulation(format!("user {n} has a zero composite peak")));
    }
    let rot = Complex::new(a.re.as_f64() / mag, -a.im.as_f64() / mag);
    let amp = rho.sqrt();
    let coeffs = (0..q.num_users())
        .map(|src| {
            q.response(src, n)
                .iter()
                .map(|v| amp * (rot * Complex::new(v.re.as_f64(), v.im.as_f64())).re)
                .collect()
        })
        .collect();
    Ok((amp * mag, coeffs))
}

/// Noise-free statistics with 8-symbol lookup tables: each table holds the
/// 256 signed sums of eight interference coefficients, indexed by one
/// random byte of symbol bits.
fn block_statistics<T: Real, R: Rng + ?Sized>(
    q: &CompositeResponse<T>,
    n: usize,
    rho: f64,
    rng: &mut R,
    stats: &mut [f64],
    signs: &mut [bool],
) -> Result<()> {
    let (desired, coeffs) = receiver_taps(q, n, rho)?;
    let peak = q.peaks[n];
    let interferers: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .flat_map(|(src, c)| {
            c.iter()
                .enumerate()
                .filter(move |&(t, _)| !(src == n && t == peak))
                .map(|(_, &v)| v)
        })
        .collect();
    let tables: Vec<[f64; 256]> = interferers
        .chunks(8)
        .map(|chunk| {
            let mut table = [0.0; 256];
            for (byte, slot) in table.iter_mut().enumerate() {
                *slot = chunk
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| if byte >> i & 1 == 1 { -c } else { c })
                    .sum();
            }
            table
        })
        .collect();
    let mut bytes = vec![0u8; tables.len() + 1];
    for (y, neg) in stats.iter_mut().zip(signs.iter_mut()) {
        rng.fill_bytes(&mut bytes);
        *neg = bytes[0] & 1 == 1;
        let mut v = if *neg { -desired } else { desired };
        for (table, &b) in tables.iter().zip(&bytes[1..]) {
            v += table[b as usize];
        }
        *y = v;
    }
    Ok(())
}

/// Noise-free statistics from continuous BPSK streams.
fn streaming_statistics<T: Real, R: Rng + ?Sized>(
    q: &CompositeResponse<T>,
    n: usize,
    rho: f64,
    rng: &mut R,
    stats: &mut [f64],
    signs: &mut [bool],
) -> Result<()> {
    let (_, coeffs) = receiver_taps(q, n, rho)?;
    let len = q.len();
    let peak = q.peaks[n];
    let count = stats.len();
    let total = count + 2 * len;
    let streams: Vec<Vec<f64>> = (0..q.num_users())
        .map(|_| (0..total).map(|_| if rng.random::<bool>() { -1.0 } else { 1.0 }).collect())
        .collect();
    for (i, (y, neg)) in stats.iter_mut().zip(signs.iter_mut()).enumerate() {
        let t0 = len + i;
        *neg = streams[n][t0] < 0.0;
        let at = t0 + peak;
        let mut v = 0.0;
        for (c, s) in coeffs.iter().zip(&streams) {
            for (k, &ck) in c.iter().enumerate() {
                v += ck * s[at - k];
            }
        }
        *y = v;
    }
    Ok(())
}
