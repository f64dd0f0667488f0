use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use trbeam::channel::{generate_channel_set, substream_seed};
use trbeam::link::{
    awgn, composite_response, noise_variance, power_decomposition, simulate_ber, simulate_ber_sweep,
    wilson_interval, BerMode, BerOptions, CompositeResponse, WILSON_Z,
};
use trbeam::prefilter::{etr_prefilter, intr_prefilter, tr_prefilter};
use trbeam::{
    ArrayGeometry, ChannelSet, ChannelSet64, Error, PrefilterSet, PrefilterSet64, Scenario, ScenarioParams,
    Technique, C64,
};

fn random_channels(m: usize, n: usize, l: usize, seed: u64) -> ChannelSet64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let taps = (0..m * n * l)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    ChannelSet::from_taps(m, n, taps, ScenarioParams::new(Scenario::Cubicle).with_taps(l), false, seed).unwrap()
}

fn channel_from(m: usize, n: usize, taps: Vec<C64>, l: usize) -> ChannelSet64 {
    ChannelSet::from_taps(m, n, taps, ScenarioParams::new(Scenario::Cubicle).with_taps(l), false, 0).unwrap()
}

fn q_func(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn naive_convolve(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Unit impulse pre-filter with peak reference 0: the composite is the channel.
fn identity_prefilter(m: usize, n: usize) -> PrefilterSet64 {
    let mut taps = vec![C64::new(0.0, 0.0); m * n];
    for k in 0..m.min(n) {
        taps[k * n + k] = C64::new(1.0, 0.0);
    }
    PrefilterSet::from_taps(m, n, 1, taps, Technique::Tr, vec![0; n]).unwrap()
}

#[test]
fn delta_through_delta() {
    let h = channel_from(1, 1, vec![C64::new(1.0, 0.0)], 1);
    let p = identity_prefilter(1, 1);
    let q = composite_response(&p, &h).unwrap();
    assert_eq!(q.len(), 1);
    assert!((q.response(0, 0)[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
    assert_eq!(q.peaks, vec![0]);
    let d = power_decomposition(&q, 2.5);
    assert!((d.signal[0] - 2.5).abs() < 1e-14);
    assert_eq!((d.isi[0], d.iui[0]), (0.0, 0.0));
}

#[test]
fn tr_hand_channel_peak() {
    let taps = vec![C64::new(1.0, 1.0), C64::new(0.5, 0.0), C64::new(0.0, -1.0), C64::new(2.0, 0.0)];
    let h = channel_from(2, 1, taps.clone(), 2);
    let p = tr_prefilter(&h).unwrap();
    let q = composite_response(&p, &h).unwrap();
    assert_eq!(q.len(), 3);
    let energy: f64 = taps.iter().map(|v| v.norm_sqr()).sum();
    assert!((q.response(0, 0)[1] - C64::new(energy / energy.sqrt(), 0.0)).norm() < 1e-14);
}

#[test]
fn orthogonal_users_have_no_iui() {
    // Antenna k serves only user k and user k only hears antenna k.
    let mut taps = vec![C64::new(0.0, 0.0); 2 * 2 * 3];
    taps[0..3].copy_from_slice(&[C64::new(1.0, 0.0), C64::new(0.2, 0.1), C64::new(0.0, 0.3)]);
    taps[9..12].copy_from_slice(&[C64::new(0.5, 0.5), C64::new(0.0, 0.0), C64::new(0.1, 0.0)]);
    let h = channel_from(2, 2, taps, 3);
    let d = power_decomposition(&composite_response(&tr_prefilter(&h).unwrap(), &h).unwrap(), 1.0);
    assert_eq!(d.iui, vec![0.0, 0.0]);
    assert!(d.isi.iter().all(|&v| v > 0.0));
}

#[test]
fn mismatched_dimensions_are_rejected() {
    let h = random_channels(4, 2, 5, 1);
    let p = tr_prefilter(&random_channels(3, 2, 5, 2)).unwrap();
    assert!(matches!(composite_response(&p, &h), Err(Error::InvalidArgument(_))));
    assert!(CompositeResponse::from_parts(2, 3, vec![C64::new(0.0, 0.0); 12], vec![0, 3]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn composite_matches_direct_convolution(seed in any::<u64>(), m in 1usize..6, n in 1usize..4, l in 1usize..8, extra in 0usize..6) {
        let h = random_channels(m, n, l, seed);
        let p = random_channels(m, n, l + extra, seed ^ 0xabc);
        let p = PrefilterSet::from_taps(m, n, l + extra, p.taps().to_vec(), Technique::Etr, vec![0; n]).unwrap();
        let q = composite_response(&p, &h).unwrap();
        prop_assert_eq!(q.len(), 2 * l + extra - 1);
        for src in 0..n {
            for rx in 0..n {
                let mut oracle = vec![C64::new(0.0, 0.0); q.len()];
                for a in 0..m {
                    let rev: Vec<C64> = p.filter(a, src).iter().rev().map(|v| v.conj()).collect();
                    for (o, v) in oracle.iter_mut().zip(naive_convolve(&rev, h.cir(a, rx))) {
                        *o += v;
                    }
                }
                for (x, y) in q.response(src, rx).iter().zip(&oracle) {
                    prop_assert!((x - y).norm() < 1e-12 * (1.0 + y.norm()));
                }
            }
        }
    }

    #[test]
    fn decomposition_partitions_energy(seed in any::<u64>(), m in 2usize..8, n in 1usize..4, l in 2usize..8, rho in 0.1f64..10.0) {
        let h = random_channels(m.max(n), n, l, seed);
        for p in [tr_prefilter(&h).unwrap(), etr_prefilter(&h, 5).unwrap(), intr_prefilter(&h, l + 3, 1e-12).unwrap()] {
            let q = composite_response(&p, &h).unwrap();
            let d = power_decomposition(&q, rho);
            for rx in 0..n {
                let total: f64 = (0..n).flat_map(|s| q.response(s, rx)).map(|v| v.norm_sqr()).sum::<f64>() * rho;
                let parts = d.signal[rx] + d.isi[rx] + d.iui[rx];
                prop_assert!((parts - total).abs() <= 1e-12 * total);
                prop_assert!(d.signal[rx] >= 0.0 && d.isi[rx] >= 0.0 && d.iui[rx] >= 0.0);
            }
        }
    }
}

#[test]
fn awgn_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = vec![C64::new(0.0, 0.0); 1_000_000];
    let y = awgn(&x, 2.0, &mut rng).unwrap();
    let n = y.len() as f64;
    let var_re = y.iter().map(|v| v.re * v.re).sum::<f64>() / n;
    let var_im = y.iter().map(|v| v.im * v.im).sum::<f64>() / n;
    assert!(((var_re + var_im) / 2.0 - 1.0).abs() < 0.01);
    assert!((var_re - 1.0).abs() < 0.01 && (var_im - 1.0).abs() < 0.01, "{var_re} {var_im}");
    let same = awgn(&y[..10], 0.0, &mut rng).unwrap();
    assert_eq!(same, y[..10].to_vec());
    assert!(matches!(awgn(&x[..3], -1.0, &mut rng), Err(Error::InvalidArgument(_))));
}

#[test]
fn wilson_reference_values() {
    let (lo, hi) = wilson_interval(10, 100, WILSON_Z);
    assert!((lo - 0.05523).abs() < 1e-4 && (hi - 0.17437).abs() < 1e-4, "{lo} {hi}");
    let (lo, hi) = wilson_interval(0, 100, WILSON_Z);
    assert_eq!(lo, 0.0);
    assert!((hi - 0.03699).abs() < 1e-4);
    assert_eq!(wilson_interval(0, 0, WILSON_Z), (0.0, 1.0));
}

#[test]
fn noise_free_tr_has_no_errors() {
    let h = random_channels(4, 1, 6, 3);
    let p = tr_prefilter(&h).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = simulate_ber(&p, &h, f64::INFINITY, 10_000, &mut rng).unwrap();
    assert_eq!(r.total_errors(), 0);
    assert_eq!(r.ber, 0.0);
    assert_eq!(r.bits, 10_000);
}

#[test]
fn delta_composite_matches_bpsk_formula() {
    // |q_peak|² = 0.49: γ' = ρ|q|²/σ² with σ² = ρΓ/10^(snr/10).
    let h = channel_from(1, 1, vec![C64::new(0.0, 0.7)], 1);
    let p = identity_prefilter(1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid = [0.0, 3.0, 6.0];
    for mode in [BerMode::Block, BerMode::Streaming] {
        let opts = BerOptions { rho: 1.0, mode };
        let results = simulate_ber_sweep(&p, &h, &grid, 200_000, &opts, &mut rng).unwrap();
        for r in results {
            let sigma2 = noise_variance(1.0, 1.0, r.snr_db).unwrap();
            let expect = q_func((2.0 * 0.49 / sigma2).sqrt());
            let tol = 3.0 * r.interval_width();
            assert!((r.ber - expect).abs() < tol, "{mode:?} {} dB: {} vs {expect}", r.snr_db, r.ber);
        }
    }
}

#[test]
fn block_mode_counts_interference_exactly() {
    // Composite [1, 0.3] with peak 0: the decision statistic is s0 ± 0.3 + noise.
    let h = channel_from(1, 1, vec![C64::new(1.0, 0.0), C64::new(0.3, 0.0)], 2);
    let p = identity_prefilter(1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for mode in [BerMode::Block, BerMode::Streaming] {
        let opts = BerOptions { rho: 1.0, mode };
        for r in simulate_ber_sweep(&p, &h, &[2.0, 8.0], 200_000, &opts, &mut rng).unwrap() {
            let sr = (noise_variance(1.0, 1.0, r.snr_db).unwrap() / 2.0).sqrt();
            let expect = 0.5 * (q_func(1.3 / sr) + q_func(0.7 / sr));
            assert!((r.ber - expect).abs() < 3.0 * r.interval_width(), "{mode:?}: {} vs {expect}", r.ber);
        }
    }
}

#[test]
fn quadrupling_symbols_halves_the_interval() {
    let h = channel_from(1, 1, vec![C64::new(1.0, 0.0)], 1);
    let p = identity_prefilter(1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = simulate_ber(&p, &h, 3.0, 50_000, &mut rng).unwrap();
    let b = simulate_ber(&p, &h, 3.0, 200_000, &mut rng).unwrap();
    let ratio = b.interval_width() / a.interval_width();
    assert!((ratio - 0.5).abs() < 0.05, "{ratio}");
}

#[test]
fn ber_argument_checks() {
    let h = random_channels(2, 1, 3, 5);
    let p = tr_prefilter(&h).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    assert!(matches!(simulate_ber(&p, &h, 10.0, 999, &mut rng), Err(Error::InvalidArgument(_))));
    assert!(matches!(simulate_ber(&p, &h, f64::NAN, 1000, &mut rng), Err(Error::Simulation(_))));
    let zero = channel_from(1, 1, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)], 2);
    assert!(matches!(
        simulate_ber(&identity_prefilter(1, 1), &zero, 10.0, 1000, &mut rng),
        Err(Error::Simulation(_))
    ));
}

#[test]
fn results_merge_and_replay() {
    let s = ScenarioParams::new(Scenario::Cubicle);
    let array = ArrayGeometry::for_elements(16).unwrap();
    let h: ChannelSet64 = generate_channel_set(&s, &array, 3, true, substream_seed(9, 0)).unwrap();
    let p = tr_prefilter(&h).unwrap();
    let run = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        simulate_ber_sweep(&p, &h, &[0.0, 10.0], 5000, &BerOptions::default(), &mut rng).unwrap()
    };
    let a = run(7);
    assert_eq!(a, run(7));
    let mut merged = a[1].clone();
    merged.merge(&run(8)[1]).unwrap();
    assert_eq!(merged.bits, 10_000);
    assert_eq!(merged.realizations, 2);
    assert_eq!(merged.errors.len(), 3);
    assert!(merged.merge(&a[0]).is_err());
    // Lower SNR never helps when interference is shared.
    assert!(a[0].total_errors() >= a[1].total_errors());
}

#[test]
fn tr_interference_does_not_grow_with_array_size() {
    let s = ScenarioParams::new(Scenario::Cubicle);
    let stats: Vec<(f64, f64, f64)> = [16, 32, 64]
        .iter()
        .map(|&m| {
            let array = ArrayGeometry::for_elements(m).unwrap();
            let (mut ps, mut isi, mut iui) = (0.0, 0.0, 0.0);
            let count = 300;
            for k in 0..count {
                let h: ChannelSet64 = generate_channel_set(&s, &array, 5, false, substream_seed(31, k)).unwrap();
                let d = power_decomposition(&composite_response(&tr_prefilter(&h).unwrap(), &h).unwrap(), 1.0);
                ps += d.mean_signal();
                isi += d.mean_isi();
                iui += d.mean_iui();
            }
            let c = count as f64;
            (ps / c, isi / c, iui / c)
        })
        .collect();
    for w in stats.windows(2) {
        assert!((w[1].1 / w[0].1 - 1.0).abs() < 0.15, "ISI {stats:?}");
        assert!((w[1].2 / w[0].2 - 1.0).abs() < 0.15, "IUI {stats:?}");
        assert!(w[1].0 > 1.8 * w[0].0, "P_s {stats:?}");
    }
}

#[test]
fn tr_iui_dominates_isi_with_many_users() {
    let s = ScenarioParams::new(Scenario::Cubicle);
    let array = ArrayGeometry::for_elements(64).unwrap();
    let (mut isi, mut iui) = (0.0, 0.0);
    for k in 0..100 {
        let h: ChannelSet64 = generate_channel_set(&s, &array, 10, false, substream_seed(32, k)).unwrap();
        let d = power_decomposition(&composite_response(&tr_prefilter(&h).unwrap(), &h).unwrap(), 1.0);
        isi += d.mean_isi();
        iui += d.mean_iui();
    }
    assert!(iui / isi > 5.0, "{iui} / {isi}");
}
