use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ArrayGeometry, ChannelSet};
use crate::error::{Error, Result};
use crate::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    pub distance_m: f64,
    pub correlation: f64,
    /// Number of antenna pairs that contributed, summed over the batch.
    pub pairs: u64,
}

/// Spatial coherence `R_h(Δd)` of the array, grouped by element distance up
/// to `max_distance_m`.
///
/// For every realization, user, tap and grid displacement `v`, the pair sum
/// `S = Σ_m h_m h*_{m+v}` is compared against the incoherent level: the
/// estimate is `sqrt(Σ(|S|² − E) / Σ(W² − E))` with `E = Σ|h_m|²|h_{m+v}|²`
/// and `W = Σ(|h_m|² + |h_{m+v}|²)/2`. Removing `E` cancels the positive bias
/// of `|S|²` for independent antennas, so uncorrelated taps give ≈ 0 while a
/// tap that is identical across the array gives exactly 1. `R_h(0) = 1`.
/// Displacements that fit only once in the array are skipped.
pub fn estimate_spatial_correlation<T: Real>(
    batch: &[ChannelSet<T>],
    array: &ArrayGeometry,
    max_distance_m: f64,
) -> Result<Vec<CorrelationPoint>> {
    if batch.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "spatial correlation needs at least 2 realizations, got {}",
            batch.len()
        )));
    }
    let m_ant = array.num_elements();
    if batch.iter().any(|c| c.num_antennas() != m_ant) {
        return Err(Error::InvalidArgument("batch does not match array size".into()));
    }

    // Displacements (dr, dc) with a canonical sign, keyed by squared grid length.
    let rows = array.rows as i64;
    let cols = array.cols as i64;
    let spacing = array.element_spacing_m;
    let mut groups: BTreeMap<i64, Vec<(i64, i64)>> = BTreeMap::new();
    for dr in 0..rows {
        for dc in -(cols - 1)..cols {
            if (dr == 0 && dc <= 0) || (dr * dr + dc * dc) as f64 * spacing * spacing > max_distance_m * max_distance_m * (1.0 + 1e-12) {
                continue;
            }
            groups.entry(dr * dr + dc * dc).or_default().push((dr, dc));
        }
    }

    let mut out = vec![CorrelationPoint {
        distance_m: 0.0,
        correlation: 1.0,
        pairs: (batch.len() * m_ant) as u64,
    }];
    for (len2, disps) in groups {
        let mut num = 0.0;
        let mut den = 0.0;
        let mut pairs = 0u64;
        for ch in batch {
            for n in 0..ch.num_users() {
                for t in 0..ch.num_taps() {
                    for &(dr, dc) in &disps {
                        let (mut s_re, mut s_im, mut e, mut w) = (0.0, 0.0, 0.0, 0.0);
                        let mut count = 0u64;
                        for r in 0..rows - dr {
                            for c in 0..cols {
                                let c2 = c + dc;
                                if !(0..cols).contains(&c2) {
                                    continue;
                                }
                                let a = ch.cir((r * cols + c) as usize, n)[t];
                                let b = ch.cir(((r + dr) * cols + c2) as usize, n)[t];
                                let s = a * b.conj();
                                s_re += s.re.as_f64();
                                s_im += s.im.as_f64();
                                let pa = a.norm_sqr().as_f64();
                                let pb = b.norm_sqr().as_f64();
                                e += pa * pb;
                                w += 0.5 * (pa + pb);
                                count += 1;
                            }
                        }
                        // A lone pair carries no coherence information.
                        if count < 2 {
                            continue;
                        }
                        num += s_re * s_re + s_im * s_im - e;
                        den += w * w - e;
                        pairs += count;
                    }
                }
            }
        }
        if pairs == 0 {
            continue;
        }
        let correlation = if den > 0.0 { (num / den).max(0.0).sqrt() } else { 0.0 };
        out.push(CorrelationPoint {
            distance_m: (len2 as f64).sqrt() * spacing,
            correlation,
            pairs,
        });
    }
    Ok(out)
}

/// Moment estimator `m̂ = E[X²]² / Var(X²)` for Nakagami amplitudes.
///
/// Constant non-zero amplitudes give `+inf`; all-zero input has no defined
/// shape and is rejected.
pub fn estimate_nakagami_m(amplitudes: &[f64]) -> Result<f64> {
    if amplitudes.len() < 1000 {
        return Err(Error::InsufficientData(format!(
            "nakagami estimate needs at least 1000 samples, got {}",
            amplitudes.len()
        )));
    }
    let n = amplitudes.len() as f64;
    let mean = amplitudes.iter().map(|x| x * x).sum::<f64>() / n;
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::DegenerateDistribution(
            "amplitudes have zero (or non-finite) mean power".into(),
        ));
    }
    let var = amplitudes
        .iter()
        .map(|x| (x * x - mean).powi(2))
        .sum::<f64>()
        / n;
    if var <= mean * mean * 1e-24 {
        return Ok(f64::INFINITY);
    }
    Ok(mean * mean / var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nakagami_needs_samples() {
        assert!(matches!(
            estimate_nakagami_m(&[1.0; 10]),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            estimate_nakagami_m(&[0.0; 2000]),
            Err(Error::DegenerateDistribution(_))
        ));
        assert_eq!(estimate_nakagami_m(&[0.3; 2000]).unwrap(), f64::INFINITY);
    }
}
