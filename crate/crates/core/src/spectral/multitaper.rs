//! Multitaper spectral components, their average and the resulting PSD.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{check_finite, one_sided_len, Spectrum, TaperBank};
use crate::error::{invalid, Error, Result};
use crate::fft::FftPlan;

/// How the per-taper spectra are combined before taking power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum MultitaperMode {
    /// Average the complex tapered spectra, then square: `|mean_l Y[k,l]|^2`.
    #[default]
    Coherent,
    /// Average the per-taper powers: `mean_l |Y[k,l]|^2`.
    Incoherent,
}

/// Tapered spectra `Y[l][k] = sum_n M[l][n] x[n] exp(-2*pi*i*k*n/N)`, one row
/// per taper, all `N` bins.
pub fn multitaper_components(x: &[f64], bank: &TaperBank) -> Result<Vec<Vec<Complex64>>> {
    if x.len() != bank.len() {
        return Err(Error::LengthMismatch {
            expected: bank.len(),
            found: x.len(),
        });
    }
    let plan = FftPlan::new(x.len())?;
    bank.tapers()
        .iter()
        .map(|taper| {
            let mut buf: Vec<Complex64> = taper
                .iter()
                .zip(x)
                .map(|(m, v)| Complex64::new(m * v, 0.0))
                .collect();
            plan.process(&mut buf)?;
            Ok(buf)
        })
        .collect()
}

/// Coherent mean over tapers, `X[k] = (1/q) sum_l Y[l][k]`.
pub fn multitaper_average(rows: &[Vec<Complex64>]) -> Result<Vec<Complex64>> {
    let first = rows.first().ok_or(Error::EmptyInput)?;
    let n = first.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    let q = rows.len() as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for row in rows {
        for (o, y) in out.iter_mut().zip(row) {
            *o += y;
        }
    }
    for o in out.iter_mut() {
        *o /= q;
    }
    Ok(out)
}

/// One-sided multitaper PSD over `N/2` bins spaced `fs/N`.
///
/// Values are plain squared magnitudes of the combined spectra; with
/// unit-energy tapers no further normalisation is applied.
pub fn multitaper_psd(
    x: &[f64],
    fs: f64,
    bank: &TaperBank,
    mode: MultitaperMode,
) -> Result<Spectrum> {
    MultitaperPsd::new(bank.clone(), mode)?.estimate(x, fs)
}

/// Reusable multitaper PSD estimator for one taper bank.
#[derive(Debug, Clone)]
pub struct MultitaperPsd {
    bank: TaperBank,
    mean_taper: Vec<f64>,
    mode: MultitaperMode,
    plan: FftPlan,
}

impl MultitaperPsd {
    pub fn new(bank: TaperBank, mode: MultitaperMode) -> Result<Self> {
        let plan = FftPlan::new(bank.len())?;
        Ok(Self {
            mean_taper: bank.mean_taper(),
            bank,
            mode,
            plan,
        })
    }

    pub fn bank(&self) -> &TaperBank {
        &self.bank
    }

    pub fn mode(&self) -> MultitaperMode {
        self.mode
    }

    pub fn estimate_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.bank.len();
        if x.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: x.len(),
            });
        }
        check_finite(x)?;
        let bins = one_sided_len(n);
        let tapered = |taper: &[f64]| -> Result<Vec<Complex64>> {
            let mut buf: Vec<Complex64> = taper
                .iter()
                .zip(x)
                .map(|(m, v)| Complex64::new(m * v, 0.0))
                .collect();
            self.plan.process(&mut buf)?;
            Ok(buf)
        };
        match self.mode {
            MultitaperMode::Coherent => {
                // the mean of the tapered spectra is the spectrum under the mean taper
                let spec = tapered(&self.mean_taper)?;
                Ok(spec[..bins].iter().map(|c| c.norm_sqr()).collect())
            }
            MultitaperMode::Incoherent => {
                let mut acc = vec![0.0; bins];
                for taper in self.bank.tapers() {
                    let spec = tapered(taper)?;
                    for (a, c) in acc.iter_mut().zip(&spec) {
                        *a += c.norm_sqr();
                    }
                }
                let q = self.bank.count() as f64;
                Ok(acc.into_iter().map(|a| a / q).collect())
            }
        }
    }

    pub fn estimate(&self, x: &[f64], fs: f64) -> Result<Spectrum> {
        if !(fs > 0.0) {
            return Err(invalid("sampling rate must be positive"));
        }
        let values = self.estimate_values(x)?;
        Ok(Spectrum::from_bins(values, fs, self.bank.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{dft, dpss, power_spectrum};
    use alloc::vec::Vec;

    fn signal(n: usize, seed: f64) -> Vec<f64> {
        (0..n)
            .map(|i| libm::sin(i as f64 * seed) + 0.5 * libm::cos(i as f64 * seed * 2.7 + 0.3))
            .collect()
    }

    fn naive_tapered(x: &[f64], taper: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        let phase = -2.0 * core::f64::consts::PI * ((k * i) % n) as f64 / n as f64;
                        Complex64::new(libm::cos(phase), libm::sin(phase)) * (taper[i] * x[i])
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn rectangular_single_taper_is_scaled_dft() {
        let n = 48;
        let x = signal(n, 0.41);
        let scale = 1.0 / libm::sqrt(n as f64);
        let bank = TaperBank::from_parts(vec![vec![scale; n]], vec![1.0], 0.5).unwrap();
        let y = multitaper_components(&x, &bank).unwrap();
        let d = dft(&x).unwrap();
        for (a, b) in y[0].iter().zip(&d) {
            assert!((a - b * scale).norm() < 1e-12);
        }
    }

    #[test]
    fn components_match_naive_tapered_dft() {
        let n = 60;
        let x = signal(n, 0.23);
        let bank = dpss(n, 2.0, 3).unwrap();
        let y = multitaper_components(&x, &bank).unwrap();
        for (row, taper) in y.iter().zip(bank.tapers()) {
            let want = naive_tapered(&x, taper);
            let peak = want.iter().map(|c| c.norm()).fold(0.0, f64::max);
            for (a, b) in row.iter().zip(&want) {
                assert!((a - b).norm() <= 1e-9 * peak);
            }
        }
    }

    #[test]
    fn zeros_stay_zero() {
        let bank = dpss(32, 2.0, 3).unwrap();
        let y = multitaper_components(&[0.0; 32], &bank).unwrap();
        assert!(y.iter().flatten().all(|c| c.norm() == 0.0));
        for mode in [MultitaperMode::Coherent, MultitaperMode::Incoherent] {
            let psd = multitaper_psd(&[0.0; 32], 32.0, &bank, mode).unwrap();
            assert!(psd.values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn average_edge_cases() {
        let row = vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.25)];
        assert_eq!(multitaper_average(&[row.clone()]).unwrap(), row);
        let neg: Vec<Complex64> = row.iter().map(|c| -c).collect();
        let avg = multitaper_average(&[row, neg]).unwrap();
        assert!(avg.iter().all(|c| c.norm() == 0.0));
        assert!(multitaper_average(&[]).is_err());
    }

    #[test]
    fn average_is_column_mean() {
        let rows: Vec<Vec<Complex64>> = (0..4)
            .map(|l| {
                (0..5)
                    .map(|k| Complex64::new((l * 5 + k) as f64 * 0.3, libm::sin((l + k) as f64)))
                    .collect()
            })
            .collect();
        let avg = multitaper_average(&rows).unwrap();
        for k in 0..5 {
            let mut s = Complex64::new(0.0, 0.0);
            for r in &rows {
                s += r[k];
            }
            assert!((avg[k] - s / 4.0).norm() < 1e-15);
        }
    }

    #[test]
    fn coherent_mode_is_literal_composition() {
        let n = 40;
        let x = signal(n, 0.9);
        let bank = dpss(n, 3.0, 5).unwrap();
        let literal = power_spectrum(
            &multitaper_average(&multitaper_components(&x, &bank).unwrap()).unwrap(),
        );
        let psd = multitaper_psd(&x, 40.0, &bank, MultitaperMode::Coherent).unwrap();
        assert_eq!(psd.len(), 20);
        for k in 0..20 {
            assert!((psd.values[k] - literal[k]).abs() <= 1e-10 * literal[k].max(1e-10));
        }
    }

    #[test]
    fn single_taper_modes_agree() {
        let n = 64;
        let x = signal(n, 0.37);
        let bank = dpss(n, 2.5, 1).unwrap();
        let a = multitaper_psd(&x, 64.0, &bank, MultitaperMode::Coherent).unwrap();
        let b = multitaper_psd(&x, 64.0, &bank, MultitaperMode::Incoherent).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            assert!((u - v).abs() <= 1e-12 * u.max(1e-12));
        }
    }

    #[test]
    fn length_mismatch() {
        let bank = dpss(16, 2.0, 2).unwrap();
        assert!(matches!(
            multitaper_components(&[0.0; 15], &bank),
            Err(Error::LengthMismatch { expected: 16, found: 15 })
        ));
    }
}
