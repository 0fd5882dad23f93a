//! Short-time transforms: the plain windowed STFT and the sliding-taper
//! multitaper spectrogram.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{check_finite, one_sided_len, MultitaperMode, TaperBank};
use crate::error::{invalid, Error, Result};
use crate::fft::FftPlan;

/// Power on a frequency-by-time grid, stored frequency-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramGrid {
    pub freqs: Vec<f64>,
    /// Centre time of each frame, in seconds.
    pub times: Vec<f64>,
    /// `values[f * times.len() + t]`.
    pub values: Vec<f64>,
    pub window_len: usize,
    pub hop: usize,
}

impl SpectrogramGrid {
    pub fn n_freqs(&self) -> usize {
        self.freqs.len()
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn get(&self, freq_bin: usize, time_bin: usize) -> f64 {
        self.values[freq_bin * self.times.len() + time_bin]
    }

    /// Index of the strongest frequency bin in one time column.
    pub fn peak_bin(&self, time_bin: usize) -> usize {
        (0..self.n_freqs())
            .fold((0, f64::MIN), |best, f| {
                let v = self.get(f, time_bin);
                if v > best.1 {
                    (f, v)
                } else {
                    best
                }
            })
            .0
    }
}

/// Windowed STFT power, `|sum_m x[m] h[m - n] exp(-2*pi*i*k*m/N)|^2`.
///
/// Frames start at `0, hop, 2*hop, ...` and must lie fully inside `x`; each
/// keeps the one-sided bins `0 .. N/2 - 1`. The exponent's absolute time
/// index only contributes a unit-modulus factor, so power is computed from the
/// frame-local transform.
pub fn stft(x: &[f64], fs: f64, window: &[f64], hop: usize) -> Result<SpectrogramGrid> {
    let w = window.len();
    if hop == 0 {
        return Err(invalid("hop must be positive"));
    }
    if w == 0 {
        return Err(Error::EmptyInput);
    }
    if w > x.len() {
        return Err(invalid("stft window longer than input"));
    }
    if !(fs > 0.0) {
        return Err(invalid("sampling rate must be positive"));
    }
    check_finite(x)?;
    let plan = FftPlan::new(w)?;
    let bins = one_sided_len(w);
    let frames = (x.len() - w) / hop + 1;
    let mut values = vec![0.0; bins * frames];
    let mut buf = vec![Complex64::new(0.0, 0.0); w];
    for t in 0..frames {
        let start = t * hop;
        for (b, (v, h)) in buf.iter_mut().zip(x[start..start + w].iter().zip(window)) {
            *b = Complex64::new(v * h, 0.0);
        }
        plan.process(&mut buf)?;
        for k in 0..bins {
            values[k * frames + t] = buf[k].norm_sqr();
        }
    }
    Ok(SpectrogramGrid {
        freqs: (0..bins).map(|k| k as f64 * fs / w as f64).collect(),
        times: (0..frames)
            .map(|t| (t * hop) as f64 / fs + w as f64 / (2.0 * fs))
            .collect(),
        values,
        window_len: w,
        hop,
    })
}

/// Reusable sliding multitaper spectrogram for one taper bank.
///
/// The input is reflect-padded by `w/2` samples on both sides and one frame is
/// centred on every `hop`-th sample, so `hop = 1` yields exactly one column
/// per input sample. Only bins with `k * fs / w <= f_hi` are kept.
#[derive(Debug, Clone)]
pub struct SpectrogramPlan {
    bank: TaperBank,
    mean_taper: Vec<f64>,
    mode: MultitaperMode,
    fs: f64,
    hop: usize,
    bins: usize,
    plan: FftPlan,
}

impl SpectrogramPlan {
    pub fn new(bank: TaperBank, fs: f64, hop: usize, f_hi: f64, mode: MultitaperMode) -> Result<Self> {
        if hop == 0 {
            return Err(invalid("hop must be positive"));
        }
        if !(fs > 0.0) {
            return Err(invalid("sampling rate must be positive"));
        }
        if !(f_hi >= 0.0) {
            return Err(invalid("upper frequency must be nonnegative"));
        }
        let w = bank.len();
        let resolution = fs / w as f64;
        let below = libm::floor(f_hi / resolution + 1e-9) as usize + 1;
        let bins = below.min(one_sided_len(w));
        Ok(Self {
            mean_taper: bank.mean_taper(),
            plan: FftPlan::new(w)?,
            bank,
            mode,
            fs,
            hop,
            bins,
        })
    }

    pub fn window_len(&self) -> usize {
        self.bank.len()
    }

    pub fn freq_bins(&self) -> usize {
        self.bins
    }

    /// Number of time columns for an input of `len` samples.
    pub fn time_bins(&self, len: usize) -> usize {
        len.div_ceil(self.hop)
    }

    fn transform(&self, frame: &[f64], taper: &[f64], buf: &mut [Complex64]) -> Result<()> {
        for (b, (v, m)) in buf.iter_mut().zip(frame.iter().zip(taper)) {
            *b = Complex64::new(v * m, 0.0);
        }
        self.plan.process(buf)
    }

    pub fn compute(&self, x: &[f64]) -> Result<SpectrogramGrid> {
        let w = self.bank.len();
        let len = x.len();
        let pad = w / 2;
        if len == 0 {
            return Err(Error::EmptyInput);
        }
        if pad >= len {
            return Err(invalid("taper length exceeds reflect-padded input"));
        }
        check_finite(x)?;
        let padded: Vec<f64> = (0..len + 2 * pad)
            .map(|i| x[reflect(i as isize - pad as isize, len)])
            .collect();
        let frames = self.time_bins(len);
        let bins = self.bins;
        let mut values = vec![0.0; bins * frames];
        let mut buf = vec![Complex64::new(0.0, 0.0); w];
        for t in 0..frames {
            let frame = &padded[t * self.hop..t * self.hop + w];
            match self.mode {
                MultitaperMode::Coherent => {
                    self.transform(frame, &self.mean_taper, &mut buf)?;
                    for k in 0..bins {
                        values[k * frames + t] = buf[k].norm_sqr();
                    }
                }
                MultitaperMode::Incoherent => {
                    let q = self.bank.count() as f64;
                    for taper in self.bank.tapers() {
                        self.transform(frame, taper, &mut buf)?;
                        for k in 0..bins {
                            values[k * frames + t] += buf[k].norm_sqr() / q;
                        }
                    }
                }
            }
        }
        Ok(SpectrogramGrid {
            freqs: (0..bins).map(|k| k as f64 * self.fs / w as f64).collect(),
            times: (0..frames)
                .map(|t| (t * self.hop) as f64 / self.fs)
                .collect(),
            values,
            window_len: w,
            hop: self.hop,
        })
    }
}

/// Mirror an out-of-range index back into `0..len` without repeating the edge
/// sample.
fn reflect(i: isize, len: usize) -> usize {
    let last = len as isize - 1;
    if last == 0 {
        return 0;
    }
    let period = 2 * last;
    let mut j = i.rem_euclid(period);
    if j > last {
        j = period - j;
    }
    j as usize
}

/// Multitaper spectrogram of `x` with tapers of length `w = bank.len()`.
pub fn multitaper_spectrogram(
    x: &[f64],
    fs: f64,
    bank: &TaperBank,
    hop: usize,
    f_hi: f64,
    mode: MultitaperMode,
) -> Result<SpectrogramGrid> {
    SpectrogramPlan::new(bank.clone(), fs, hop, f_hi, mode)?.compute(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{dpss, WindowKind};
    use core::f64::consts::PI;

    #[test]
    fn reflect_indices() {
        assert_eq!(reflect(-1, 5), 1);
        assert_eq!(reflect(-2, 5), 2);
        assert_eq!(reflect(5, 5), 3);
        assert_eq!(reflect(2, 5), 2);
    }

    #[test]
    fn tone_ridge() {
        let fs = 64.0;
        let x: Vec<f64> = (0..512)
            .map(|n| libm::sin(2.0 * PI * 8.0 * n as f64 / fs))
            .collect();
        let grid = stft(&x, fs, &WindowKind::Hann.coefficients(32), 8).unwrap();
        for t in 0..grid.n_times() {
            assert_eq!(grid.freqs[grid.peak_bin(t)], 8.0);
        }
    }

    #[test]
    fn impulse_support() {
        let mut x = vec![0.0; 200];
        let m = 97;
        x[m] = 1.0;
        let w = 16;
        let hop = 4;
        let grid = stft(&x, 1.0, &WindowKind::Rectangular.coefficients(w), hop).unwrap();
        for t in 0..grid.n_times() {
            let start = t * hop;
            let covers = start <= m && m < start + w;
            let energy: f64 = (0..grid.n_freqs()).map(|k| grid.get(k, t)).sum();
            if covers {
                assert!(energy > 0.0);
            } else {
                assert_eq!(energy, 0.0);
            }
        }
    }

    #[test]
    fn zeros_and_errors() {
        let grid = stft(&[0.0; 64], 1.0, &[1.0; 16], 2).unwrap();
        assert!(grid.values.iter().all(|&v| v == 0.0));
        assert!(stft(&[0.0; 64], 1.0, &[1.0; 16], 0).is_err());
        assert!(stft(&[0.0; 8], 1.0, &[1.0; 16], 1).is_err());
    }

    #[test]
    fn spectrogram_column_count_and_bins() {
        let bank = dpss(64, 2.0, 3).unwrap();
        let x: Vec<f64> = (0..256).map(|n| libm::sin(n as f64 * 0.3)).collect();
        let grid = multitaper_spectrogram(&x, 256.0, &bank, 1, 60.0, MultitaperMode::Coherent).unwrap();
        assert_eq!(grid.n_times(), 256);
        assert_eq!(grid.n_freqs(), 16);
        assert_eq!(grid.freqs[15], 60.0);
        let grid = multitaper_spectrogram(&x, 256.0, &bank, 3, 60.0, MultitaperMode::Incoherent).unwrap();
        assert_eq!(grid.n_times(), 86);
    }

    #[test]
    fn spectrogram_zero_input() {
        let bank = dpss(32, 2.0, 3).unwrap();
        for mode in [MultitaperMode::Coherent, MultitaperMode::Incoherent] {
            let grid = multitaper_spectrogram(&[0.0; 100], 128.0, &bank, 1, 60.0, mode).unwrap();
            assert!(grid.values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn spectrogram_rejects_short_input() {
        let bank = dpss(64, 2.0, 3).unwrap();
        assert!(multitaper_spectrogram(&[1.0; 20], 256.0, &bank, 1, 60.0, MultitaperMode::Incoherent).is_err());
    }
}
