//! Welch averaged-periodogram PSD.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{check_finite, one_sided_len, Spectrum, WindowKind};
use crate::error::{invalid, Error, Result};
use crate::fft::FftPlan;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchConfig {
    pub seg_len: usize,
    /// Fraction of `seg_len` shared by consecutive segments, in `[0, 1)`.
    pub overlap_frac: f64,
    pub window: WindowKind,
    /// Zero-padded transform length, `>= seg_len`.
    pub fft_len: usize,
}

impl WelchConfig {
    /// Half-length Hamming segments at 50% overlap, zero-padded back to the
    /// full window so an `n`-sample input yields `n/2` bins.
    pub fn for_window(n: usize) -> Self {
        Self {
            seg_len: (n / 2).max(1),
            overlap_frac: 0.5,
            window: WindowKind::Hamming,
            fft_len: n,
        }
    }

    pub fn hop(&self) -> usize {
        let hop = libm::floor(self.seg_len as f64 * (1.0 - self.overlap_frac)) as usize;
        hop.max(1)
    }

    fn validate(&self) -> Result<()> {
        if self.seg_len == 0 {
            return Err(invalid("welch segment length must be positive"));
        }
        if !(0.0..1.0).contains(&self.overlap_frac) {
            return Err(invalid("welch overlap fraction must lie in [0, 1)"));
        }
        if self.fft_len < self.seg_len {
            return Err(invalid("welch fft length shorter than segment"));
        }
        Ok(())
    }
}

/// Reusable Welch estimator: the window and transform plan are built once.
#[derive(Debug, Clone)]
pub struct WelchPsd {
    config: WelchConfig,
    window: Vec<f64>,
    window_energy: f64,
    plan: FftPlan,
}

impl WelchPsd {
    pub fn new(config: WelchConfig) -> Result<Self> {
        config.validate()?;
        let window = config.window.coefficients(config.seg_len);
        let window_energy = window.iter().map(|w| w * w).sum();
        let plan = FftPlan::new(config.fft_len)?;
        Ok(Self {
            config,
            window,
            window_energy,
            plan,
        })
    }

    pub fn config(&self) -> &WelchConfig {
        &self.config
    }

    /// Number of segments averaged for an input of `len` samples.
    pub fn segment_count(&self, len: usize) -> usize {
        if len < self.config.seg_len {
            0
        } else {
            (len - self.config.seg_len) / self.config.hop() + 1
        }
    }

    /// Density values only, `fft_len/2` bins scaled by `1 / (fs * sum(h^2))`.
    pub fn estimate_values(&self, x: &[f64], fs: f64) -> Result<Vec<f64>> {
        let cfg = &self.config;
        if cfg.seg_len > x.len() {
            return Err(invalid("welch segment longer than input"));
        }
        if !(fs > 0.0) {
            return Err(invalid("sampling rate must be positive"));
        }
        check_finite(x)?;
        let bins = one_sided_len(cfg.fft_len);
        let mut acc = vec![0.0; bins];
        let mut buf = vec![Complex64::new(0.0, 0.0); cfg.fft_len];
        let segments = self.segment_count(x.len());
        let hop = cfg.hop();
        for s in 0..segments {
            let seg = &x[s * hop..s * hop + cfg.seg_len];
            for (b, (v, w)) in buf.iter_mut().zip(seg.iter().zip(&self.window)) {
                *b = Complex64::new(v * w, 0.0);
            }
            for b in buf[cfg.seg_len..].iter_mut() {
                *b = Complex64::new(0.0, 0.0);
            }
            self.plan.process(&mut buf)?;
            for (a, c) in acc.iter_mut().zip(&buf) {
                *a += c.norm_sqr();
            }
        }
        let scale = if self.window_energy > 0.0 {
            1.0 / (fs * self.window_energy * segments as f64)
        } else {
            0.0
        };
        for a in acc.iter_mut() {
            *a *= scale;
        }
        Ok(acc)
    }

    pub fn estimate(&self, x: &[f64], fs: f64) -> Result<Spectrum> {
        let values = self.estimate_values(x, fs)?;
        Ok(Spectrum::from_bins(values, fs, self.config.fft_len))
    }
}

/// Welch PSD of `x`: the mean of windowed, zero-padded segment periodograms.
pub fn welch_psd(x: &[f64], fs: f64, config: WelchConfig) -> Result<Spectrum> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    WelchPsd::new(config)?.estimate(x, fs)
}
