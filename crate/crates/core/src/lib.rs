//! Allocation-only kernels for turning EEG recordings into time, frequency and
//! time-frequency feature sets, and for evaluating classifiers trained on them.
//!
//! Everything here is pure computation over in-memory buffers. File formats,
//! directory scanning and the command line live in the `eegspect` crate.
//!
//! Module map:
//!
//! - [`fft`]: radix-2 and Bluestein transforms behind one plan type.
//! - [`spectral`]: DFT, periodograms, Welch PSD, Slepian tapers, multitaper
//!   PSD, STFT, multitaper spectrogram and band powers.
//! - [`recording`]: channel-major recordings, seizure annotations and the
//!   canonical bipolar montage.
//! - [`windowing`]: seizure-centred segmentation plans and window extraction.
//! - [`representation`]: feature tensors with fixed shape contracts and
//!   min-max scaling.
//! - [`splits`]: stratified holdout and k-fold partitioning.
//! - [`classifier`]: a logistic-regression baseline.
//! - [`evaluation`]: confusion matrices, derived rates, ROC/AUC and rankings.
//! - [`stats`]: Kruskal-Wallis, Dunn, Friedman, Nemenyi and the grouped battery.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod classifier;
pub mod error;
pub mod evaluation;
pub mod fft;
pub mod recording;
pub mod representation;
pub mod spectral;
pub mod splits;
pub mod stats;
pub mod windowing;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Sampling rate of the reference dataset, in Hz.
pub const REFERENCE_FS: f64 = 256.0;
