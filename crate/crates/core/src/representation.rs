//! Feature tensors built from labelled windows, and per-feature min-max
//! scaling.
//!
//! Shape contracts for a window of `Ws` seconds at `Sr` Hz over 18 channels:
//!
//! | kind                    | dims                 |
//! |-------------------------|----------------------|
//! | `Time`                  | `(18, Sr*Ws)`        |
//! | `WelchPsd`              | `(18, Sr/2*Ws)`      |
//! | `MultitaperPsd`         | `(18, Sr/2*Ws)`      |
//! | `MultitaperSpectrogram` | `(18, F, Sr*Ws)`     |
//!
//! where `F` counts the spectrogram bins in `[0, f_hi]`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::recording::CANONICAL_CHANNELS;
use crate::spectral::{
    dpss, MultitaperMode, MultitaperPsd, SpectrogramPlan, WelchConfig, WelchPsd, WindowKind,
};
use crate::windowing::{Label, LabeledWindow};

pub const CHANNEL_COUNT: usize = CANONICAL_CHANNELS.len();

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum RepresentationKind {
    Time,
    WelchPsd,
    MultitaperPsd,
    MultitaperSpectrogram,
}

impl RepresentationKind {
    pub const ALL: [RepresentationKind; 4] = [
        RepresentationKind::Time,
        RepresentationKind::WelchPsd,
        RepresentationKind::MultitaperPsd,
        RepresentationKind::MultitaperSpectrogram,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RepresentationKind::Time => "time",
            RepresentationKind::WelchPsd => "welch-psd",
            RepresentationKind::MultitaperPsd => "multitaper-psd",
            RepresentationKind::MultitaperSpectrogram => "multitaper-spectrogram",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            RepresentationKind::Time => 0,
            RepresentationKind::WelchPsd => 1,
            RepresentationKind::MultitaperPsd => 2,
            RepresentationKind::MultitaperSpectrogram => 3,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.code() == code)
            .ok_or_else(|| invalid(format!("unknown representation code {code}")))
    }
}

impl fmt::Display for RepresentationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RepresentationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown representation {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct MultitaperParams {
    pub nw: f64,
    pub q: usize,
    pub mode: MultitaperMode,
}

impl Default for MultitaperParams {
    fn default() -> Self {
        Self {
            nw: 4.0,
            q: 7,
            mode: MultitaperMode::Coherent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct WelchParams {
    /// Segment length as a fraction of the window.
    pub seg_frac: f64,
    pub overlap: f64,
    pub window_kind: WindowKind,
}

impl Default for WelchParams {
    fn default() -> Self {
        Self {
            seg_frac: 0.5,
            overlap: 0.5,
            window_kind: WindowKind::Hamming,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct SpectrogramParams {
    /// Taper length in seconds.
    pub w_s: f64,
    pub hop: usize,
    pub f_hi: f64,
}

impl Default for SpectrogramParams {
    fn default() -> Self {
        Self {
            w_s: 0.25,
            hop: 1,
            f_hi: 60.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct SpectralConfig {
    pub multitaper: MultitaperParams,
    pub welch: WelchParams,
    pub spectrogram: SpectrogramParams,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Provenance {
    pub source_id: String,
    pub start_s: u64,
    pub window_s: u32,
}

/// A labelled, row-major feature array with a representation-specific shape.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    pub kind: RepresentationKind,
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
    pub label: Label,
    pub provenance: Provenance,
}

impl FeatureTensor {
    pub fn new(
        kind: RepresentationKind,
        dims: Vec<usize>,
        data: Vec<f64>,
        label: Label,
        provenance: Provenance,
    ) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if expected != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "dims {dims:?} describe {expected} values, payload has {}",
                data.len()
            )));
        }
        Ok(Self {
            kind,
            dims,
            data,
            label,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

enum Engine {
    Time,
    Welch(WelchPsd),
    Multitaper(MultitaperPsd),
    Spectrogram(SpectrogramPlan),
}

/// Builds tensors of one kind for windows of one length and sampling rate,
/// reusing taper banks and transform plans across calls.
pub struct FeatureBuilder {
    kind: RepresentationKind,
    fs: f64,
    n_samples: usize,
    engine: Engine,
}

impl FeatureBuilder {
    pub fn new(kind: RepresentationKind, config: &SpectralConfig, fs: f64, window_s: u32) -> Result<Self> {
        if !(fs > 0.0) {
            return Err(invalid("sampling rate must be positive"));
        }
        let n = libm::round(fs * window_s as f64) as usize;
        if n < 2 {
            return Err(invalid("window too short for spectral features"));
        }
        let engine = match kind {
            RepresentationKind::Time => Engine::Time,
            RepresentationKind::WelchPsd => {
                let p = &config.welch;
                if !(p.seg_frac > 0.0 && p.seg_frac <= 1.0) {
                    return Err(invalid("welch seg_frac must lie in (0, 1]"));
                }
                let seg_len = (libm::round(p.seg_frac * n as f64) as usize).clamp(1, n);
                Engine::Welch(WelchPsd::new(WelchConfig {
                    seg_len,
                    overlap_frac: p.overlap,
                    window: p.window_kind,
                    fft_len: n,
                })?)
            }
            RepresentationKind::MultitaperPsd => {
                let p = &config.multitaper;
                Engine::Multitaper(MultitaperPsd::new(dpss(n, p.nw, p.q)?, p.mode)?)
            }
            RepresentationKind::MultitaperSpectrogram => {
                let p = &config.multitaper;
                let s = &config.spectrogram;
                let w = libm::round(s.w_s * fs) as usize;
                if w < 2 || w > n {
                    return Err(invalid("spectrogram taper must span 2..=window samples"));
                }
                Engine::Spectrogram(SpectrogramPlan::new(dpss(w, p.nw, p.q)?, fs, s.hop, s.f_hi, p.mode)?)
            }
        };
        Ok(Self {
            kind,
            fs,
            n_samples: n,
            engine,
        })
    }

    pub fn kind(&self) -> RepresentationKind {
        self.kind
    }

    /// Output shape for every tensor this builder produces.
    pub fn dims(&self) -> Vec<usize> {
        let n = self.n_samples;
        match &self.engine {
            Engine::Time => vec![CHANNEL_COUNT, n],
            Engine::Welch(_) | Engine::Multitaper(_) => vec![CHANNEL_COUNT, n / 2],
            Engine::Spectrogram(plan) => vec![CHANNEL_COUNT, plan.freq_bins(), plan.time_bins(n)],
        }
    }

    pub fn build(&self, window: &LabeledWindow) -> Result<FeatureTensor> {
        if window.n_channels() != CHANNEL_COUNT {
            return Err(Error::ShapeMismatch(format!(
                "expected {CHANNEL_COUNT} channels, window has {}",
                window.n_channels()
            )));
        }
        if window.data.iter().any(|row| row.len() != self.n_samples) || window.fs != self.fs {
            return Err(Error::ShapeMismatch(format!(
                "expected {} samples per channel at {} Hz",
                self.n_samples, self.fs
            )));
        }
        let mut data = Vec::with_capacity(self.dims().iter().product());
        for row in &window.data {
            match &self.engine {
                Engine::Time => data.extend_from_slice(row),
                Engine::Welch(est) => data.extend(est.estimate_values(row, self.fs)?),
                Engine::Multitaper(est) => data.extend(est.estimate_values(row)?),
                Engine::Spectrogram(plan) => data.extend(plan.compute(row)?.values),
            }
        }
        FeatureTensor::new(
            self.kind,
            self.dims(),
            data,
            window.label,
            Provenance {
                source_id: window.source_id.clone(),
                start_s: window.start_s,
                window_s: window.window_s,
            },
        )
    }
}

pub fn build_representation(
    window: &LabeledWindow,
    kind: RepresentationKind,
    config: &SpectralConfig,
) -> Result<FeatureTensor> {
    FeatureBuilder::new(kind, config, window.fs, window.window_s)?.build(window)
}

/// Elementwise training-set extrema.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormalizationStats {
    pub dims: Vec<usize>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_minmax<'a, I>(tensors: I) -> Result<NormalizationStats>
where
    I: IntoIterator<Item = &'a FeatureTensor>,
{
    let mut iter = tensors.into_iter();
    let first = iter.next().ok_or(Error::EmptyInput)?;
    let mut min = first.data.clone();
    let mut max = first.data.clone();
    for t in iter {
        if t.dims != first.dims || t.kind != first.kind {
            return Err(Error::ShapeMismatch("training tensors differ in kind or shape".into()));
        }
        for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(&t.data) {
            *lo = lo.min(v);
            *hi = hi.max(v);
        }
    }
    Ok(NormalizationStats {
        dims: first.dims.clone(),
        min,
        max,
    })
}

/// Maps each feature to `(x - min) / (max - min)`, clamped to `[0, 1]`.
/// Features with `max == min` map to 0.
pub fn apply_minmax(tensor: &FeatureTensor, stats: &NormalizationStats) -> Result<FeatureTensor> {
    if tensor.dims != stats.dims {
        return Err(Error::ShapeMismatch(format!(
            "tensor dims {:?} do not match fitted dims {:?}",
            tensor.dims, stats.dims
        )));
    }
    let data = tensor
        .data
        .iter()
        .zip(stats.min.iter().zip(&stats.max))
        .map(|(&x, (&lo, &hi))| {
            let span = hi - lo;
            if span > 0.0 {
                ((x - lo) / span).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(FeatureTensor {
        data,
        ..tensor.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn window(window_s: u32, fs: usize, f: impl Fn(usize, usize) -> f64) -> LabeledWindow {
        LabeledWindow {
            data: (0..CHANNEL_COUNT)
                .map(|c| (0..window_s as usize * fs).map(|n| f(c, n)).collect())
                .collect(),
            fs: fs as f64,
            label: Label::Seizure,
            source_id: "chb00_01".to_string(),
            start_s: 42,
            window_s,
        }
    }

    #[test]
    fn reference_shapes() {
        let cfg = SpectralConfig::default();
        let w = window(2, 256, |c, n| (c * n) as f64);
        let t = build_representation(&w, RepresentationKind::Time, &cfg).unwrap();
        assert_eq!(t.dims, vec![18, 512]);
        let w1 = window(1, 256, |c, n| libm::sin((c + n) as f64));
        let p = build_representation(&w1, RepresentationKind::MultitaperPsd, &cfg).unwrap();
        assert_eq!(p.dims, vec![18, 128]);
        let s = build_representation(&w1, RepresentationKind::MultitaperSpectrogram, &cfg).unwrap();
        assert_eq!(s.dims, vec![18, 16, 256]);
        assert_eq!(s.provenance.start_s, 42);
        assert_eq!(s.label, Label::Seizure);
    }

    #[test]
    fn time_is_lossless() {
        let w = window(1, 16, |c, n| c as f64 * 100.0 + n as f64 * 0.5);
        let t = build_representation(&w, RepresentationKind::Time, &SpectralConfig::default()).unwrap();
        let flat: Vec<f64> = w.data.iter().flatten().copied().collect();
        assert_eq!(t.data, flat);
    }

    #[test]
    fn wrong_channel_count() {
        let mut w = window(1, 16, |_, _| 0.0);
        w.data.pop();
        assert!(matches!(
            build_representation(&w, RepresentationKind::Time, &SpectralConfig::default()),
            Err(Error::ShapeMismatch(_))
        ));
    }

    fn tensor(data: Vec<f64>) -> FeatureTensor {
        FeatureTensor::new(
            RepresentationKind::Time,
            vec![1, data.len()],
            data,
            Label::Nonseizure,
            Provenance {
                source_id: "x".into(),
                start_s: 0,
                window_s: 1,
            },
        )
        .unwrap()
    }

    #[test]
    fn minmax_edges() {
        let a = tensor(vec![0.0, 5.0, 3.0]);
        let b = tensor(vec![1.0, 5.0, -1.0]);
        let single = fit_minmax([&a]).unwrap();
        assert_eq!(single.min, a.data);
        assert_eq!(single.max, a.data);
        let stats = fit_minmax([&a, &b]).unwrap();
        assert_eq!(stats.min, vec![0.0, 5.0, -1.0]);
        assert_eq!(stats.max, vec![1.0, 5.0, 3.0]);
        let lo = tensor(stats.min.clone());
        let hi = tensor(stats.max.clone());
        assert_eq!(apply_minmax(&lo, &stats).unwrap().data, vec![0.0, 0.0, 0.0]);
        // the constant middle feature stays at 0
        assert_eq!(apply_minmax(&hi, &stats).unwrap().data, vec![1.0, 0.0, 1.0]);
        let outside = tensor(vec![9.0, 7.0, -9.0]);
        assert_eq!(apply_minmax(&outside, &stats).unwrap().data, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn minmax_shape_errors() {
        let a = tensor(vec![0.0, 1.0]);
        let b = tensor(vec![0.0, 1.0, 2.0]);
        assert!(fit_minmax([&a, &b]).is_err());
        let stats = fit_minmax([&a]).unwrap();
        assert!(apply_minmax(&b, &stats).is_err());
        assert!(fit_minmax(core::iter::empty()).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in RepresentationKind::ALL {
            assert_eq!(k.as_str().parse::<RepresentationKind>().unwrap(), k);
            assert_eq!(RepresentationKind::from_code(k.code()).unwrap(), k);
        }
    }
}
