use alloc::vec::Vec;
use core::f64::consts::PI;

/// Segment windows for periodogram-style estimators. Coefficients are the
/// periodic (DFT-even) form used for spectral analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum WindowKind {
    Rectangular,
    Hann,
    #[default]
    Hamming,
}

impl WindowKind {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        let cosine = |a0: f64| -> Vec<f64> {
            (0..len)
                .map(|n| a0 - (1.0 - a0) * libm::cos(2.0 * PI * n as f64 / len as f64))
                .collect()
        };
        match self {
            WindowKind::Rectangular => alloc::vec![1.0; len],
            WindowKind::Hann => cosine(0.5),
            WindowKind::Hamming => cosine(0.54),
        }
    }
}
