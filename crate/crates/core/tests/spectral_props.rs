use eegspect_core::spectral::{
    band_power, dft, dpss, multitaper_psd, multitaper_spectrogram, power_spectrum, welch_psd, FrequencyBand,
    MultitaperMode, Spectrum, TaperBank, WelchConfig, WindowKind,
};
use eegspect_core::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

fn naive_dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(i, &v)| {
                    let ang = -2.0 * PI * ((k * i) % n) as f64 / n as f64;
                    Complex64::new(v * ang.cos(), v * ang.sin())
                })
                .sum()
        })
        .collect()
}

fn signal() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 1..300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dft_matches_naive(x in signal()) {
        let fast = dft(&x).unwrap();
        let slow = naive_dft(&x);
        let scale = slow.iter().map(|c| c.norm()).fold(1.0, f64::max);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn parseval(x in signal()) {
        let energy: f64 = x.iter().map(|v| v * v).sum();
        let spec: f64 = power_spectrum(&dft(&x).unwrap()).iter().sum::<f64>() / x.len() as f64;
        prop_assert!((energy - spec).abs() <= 1e-9 * energy.max(1e-300));
    }

    #[test]
    fn linearity(pair in (1usize..200).prop_flat_map(|n| (
        prop::collection::vec(-10.0f64..10.0, n),
        prop::collection::vec(-10.0f64..10.0, n),
        -5.0f64..5.0,
        -5.0f64..5.0,
    ))) {
        let (x, y, a, b) = pair;
        let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let lhs = dft(&mix).unwrap();
        let (fx, fy) = (dft(&x).unwrap(), dft(&y).unwrap());
        let scale = lhs.iter().map(|c| c.norm()).fold(1.0, f64::max);
        for k in 0..x.len() {
            prop_assert!((lhs[k] - (fx[k] * a + fy[k] * b)).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn psd_values_nonnegative(x in prop::collection::vec(-50.0f64..50.0, 64..257), incoherent in any::<bool>()) {
        let bank = dpss(x.len(), 3.0, 5).unwrap();
        let mode = if incoherent { MultitaperMode::Incoherent } else { MultitaperMode::Coherent };
        prop_assert!(multitaper_psd(&x, 256.0, &bank, mode).unwrap().values.iter().all(|&v| v >= 0.0));
        let welch = welch_psd(&x, 256.0, WelchConfig::for_window(x.len())).unwrap();
        prop_assert!(welch.values.iter().all(|&v| v >= 0.0));
        let sbank = dpss(32, 3.0, 5).unwrap();
        let grid = multitaper_spectrogram(&x, 256.0, &sbank, 7, 60.0, mode).unwrap();
        prop_assert!(grid.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn band_power_is_masked_sum(values in prop::collection::vec(0.0f64..10.0, 128), lo in 0.0f64..100.0, width in 1.0f64..30.0) {
        let spectrum = Spectrum::from_bins(values.clone(), 256.0, 256);
        let band = FrequencyBand::new("b", lo, lo + width).unwrap();
        let want: f64 = spectrum.freqs.iter().zip(&values)
            .filter(|(f, _)| **f >= lo && **f < lo + width)
            .map(|(_, v)| v)
            .sum::<f64>() * spectrum.resolution;
        prop_assert!((band_power(&spectrum, &band).unwrap() - want).abs() <= 1e-12 * want.max(1.0));
    }
}

#[test]
fn multitaper_sign_flips() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x: Vec<f64> = (0..256).map(|_| rng.sample(StandardNormal)).collect();
    let bank = dpss(256, 4.0, 7).unwrap();
    let mut flipped = bank.tapers().to_vec();
    flipped[2].iter_mut().for_each(|v| *v = -*v);
    let flipped = TaperBank::from_parts(flipped, bank.eigenvalues().to_vec(), bank.nw()).unwrap();

    let a = multitaper_psd(&x, 256.0, &bank, MultitaperMode::Incoherent).unwrap();
    let b = multitaper_psd(&x, 256.0, &flipped, MultitaperMode::Incoherent).unwrap();
    for (u, v) in a.values.iter().zip(&b.values) {
        assert!((u - v).abs() <= 1e-12 * u.abs().max(1e-12));
    }

    let a = multitaper_psd(&x, 256.0, &bank, MultitaperMode::Coherent).unwrap();
    let b = multitaper_psd(&x, 256.0, &flipped, MultitaperMode::Coherent).unwrap();
    let diff: f64 = a.values.iter().zip(&b.values).map(|(u, v)| (u - v).abs()).sum();
    let total: f64 = a.values.iter().sum();
    assert!(diff > 1e-3 * total, "coherent mode should see the flip");
}

#[test]
fn white_noise_incoherent_is_flat() {
    let n = 256;
    let bank = dpss(n, 4.0, 7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut mean = vec![0.0; n / 2];
    let trials = 100;
    for _ in 0..trials {
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let psd = multitaper_psd(&x, 1.0, &bank, MultitaperMode::Incoherent).unwrap();
        for (m, v) in mean.iter_mut().zip(&psd.values) {
            *m += v / trials as f64;
        }
    }
    // the tapers leak a little at DC, so the flatness check skips the lowest
    // bins inside the taper bandwidth
    let interior = &mean[5..];
    let avg = interior.iter().sum::<f64>() / interior.len() as f64;
    for (k, v) in interior.iter().enumerate() {
        assert!((v / avg - 1.0).abs() < 0.2, "bin {} off by {:.3}", k + 5, v / avg);
    }
}

#[test]
fn chirp_ridge_rises() {
    let fs = 256.0;
    let n = 1024;
    let (f0, f1) = (8.0, 40.0);
    let dur = n as f64 / fs;
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            (2.0 * PI * (f0 * t + 0.5 * (f1 - f0) / dur * t * t)).sin()
        })
        .collect();
    let bank = dpss(128, 2.0, 3).unwrap();
    let grid = multitaper_spectrogram(&x, fs, &bank, 64, 60.0, MultitaperMode::Incoherent).unwrap();
    let ridge: Vec<usize> = (0..grid.n_times()).map(|t| grid.peak_bin(t)).collect();
    for pair in ridge.windows(2) {
        assert!(pair[1] >= pair[0], "ridge {ridge:?}");
    }
    assert!(ridge.last() > ridge.first());
}

#[test]
fn full_rectangular_welch_is_periodogram() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<f64> = (0..200).map(|_| rng.sample(StandardNormal)).collect();
    let cfg = WelchConfig {
        seg_len: 200,
        overlap_frac: 0.0,
        window: WindowKind::Rectangular,
        fft_len: 200,
    };
    let psd = welch_psd(&x, 100.0, cfg).unwrap();
    let direct = power_spectrum(&dft(&x).unwrap());
    assert_eq!(psd.len(), 100);
    for k in 0..100 {
        let want = direct[k] / (100.0 * 200.0);
        assert!((psd.values[k] - want).abs() <= 1e-12 * want.max(1e-12));
    }
}
