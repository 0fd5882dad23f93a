use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::Spectrum;
use crate::error::{invalid, Result};

/// A named half-open frequency interval `[lo, hi)` in Hz.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrequencyBand {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl FrequencyBand {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && lo < hi) {
            return Err(invalid("band requires 0 <= lo < hi"));
        }
        Ok(Self {
            name: name.into(),
            lo,
            hi,
        })
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.lo && f < self.hi
    }
}

/// The classical EEG rhythm bands. High gamma is open-ended and capped here
/// at infinity.
pub fn default_bands() -> Vec<FrequencyBand> {
    [
        ("Delta", 0.5, 3.5),
        ("Theta", 3.5, 7.5),
        ("Alpha", 7.5, 12.5),
        ("Beta", 12.5, 30.0),
        ("Low Gamma", 30.0, 60.0),
        ("High Gamma", 80.0, f64::INFINITY),
    ]
    .into_iter()
    .map(|(name, lo, hi)| FrequencyBand {
        name: name.to_string(),
        lo,
        hi,
    })
    .collect()
}

/// Power in `band`: the PSD summed over bins with `lo <= f < hi`, times the
/// bin spacing.
pub fn band_power(spectrum: &Spectrum, band: &FrequencyBand) -> Result<f64> {
    let mut hit = false;
    let mut total = 0.0;
    for (f, v) in spectrum.freqs.iter().zip(&spectrum.values) {
        if band.contains(*f) {
            hit = true;
            total += v;
        }
    }
    if !hit {
        return Err(invalid("band does not overlap the spectrum's frequency axis"));
    }
    Ok(total * spectrum.resolution)
}
