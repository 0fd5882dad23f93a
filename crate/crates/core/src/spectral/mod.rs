//! Spectral estimators used to build the frequency and time-frequency
//! representations.
//!
//! All one-sided outputs keep bins `k = 0 .. N/2 - 1`: DC is included and the
//! Nyquist bin is dropped, so an `N`-sample window yields exactly `N/2` bins at
//! a spacing of `fs/N`.

mod bands;
mod dpss;
mod multitaper;
mod stft;
mod welch;
mod window;

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftPlan;

pub use bands::{band_power, default_bands, FrequencyBand};
pub use dpss::{dpss, TaperBank};
pub use multitaper::{
    multitaper_average, multitaper_components, multitaper_psd, MultitaperMode, MultitaperPsd,
};
pub use stft::{multitaper_spectrogram, stft, SpectrogramGrid, SpectrogramPlan};
pub use welch::{welch_psd, WelchConfig, WelchPsd};
pub use window::WindowKind;

/// A one-sided power spectrum on a uniform frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
    /// Bin spacing in Hz.
    pub resolution: f64,
}

impl Spectrum {
    /// One-sided grid `k * fs / n_fft` for `k < n_bins`.
    pub fn from_bins(values: Vec<f64>, fs: f64, n_fft: usize) -> Self {
        let resolution = fs / n_fft as f64;
        let freqs = (0..values.len()).map(|k| k as f64 * resolution).collect();
        Self {
            freqs,
            values,
            resolution,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Full complex DFT of a real sequence.
///
/// Computed with [`FftPlan`]; the result agrees with the direct
/// `sum_n x[n] exp(-2*pi*i*k*n/N)` summation to rounding.
pub fn dft(x: &[f64]) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    FftPlan::new(x.len())?.forward_real(x)
}

/// Elementwise squared magnitude `|X[k]|^2`.
pub fn power_spectrum(spectrum: &[Complex64]) -> Vec<f64> {
    spectrum.iter().map(|c| c.norm_sqr()).collect()
}

pub(crate) fn one_sided_len(n: usize) -> usize {
    // N = 1 still carries a DC bin.
    (n / 2).max(1)
}

pub(crate) fn check_finite(x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn dc_sequence() {
        let x = [1.0; 8];
        let spec = dft(&x).unwrap();
        assert!((spec[0] - Complex64::new(8.0, 0.0)).norm() < 1e-12);
        for c in &spec[1..] {
            assert!(c.norm() < 1e-12);
        }
    }

    #[test]
    fn unit_impulse_is_flat() {
        let mut x = vec![0.0; 16];
        x[0] = 1.0;
        for c in dft(&x).unwrap() {
            assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn empty_dft_rejected() {
        assert_eq!(dft(&[]).unwrap_err(), Error::EmptyInput);
    }

    #[test]
    fn power_of_three_four() {
        assert_eq!(power_spectrum(&[Complex64::new(3.0, 4.0)]), vec![25.0]);
        assert_eq!(power_spectrum(&[Complex64::new(0.0, 0.0); 4]), vec![0.0; 4]);
    }

    #[test]
    fn power_matches_conjugate_product() {
        let xs: Vec<Complex64> = (0..32)
            .map(|i| Complex64::new(libm::sin(i as f64), libm::cos(3.0 * i as f64) - 0.2))
            .collect();
        let ps = power_spectrum(&xs);
        for (p, c) in ps.iter().zip(&xs) {
            let oracle = (c * c.conj()).re;
            assert!((p - oracle).abs() <= 1e-15 * oracle.max(1.0));
        }
    }
}
