//! In-memory recordings and the bipolar montage used for feature extraction.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// The 18 bipolar derivations kept for every recording, in output order.
pub const CANONICAL_CHANNELS: [&str; 18] = [
    "FP1-F7", "FP1-F3", "FP2-F8", "FP2-F4", "FZ-CZ", "F3-C3", "F4-C4", "F7-T7", "F8-T8", "C3-P3",
    "C4-P4", "CZ-PZ", "T8-P8", "T7-P7", "P7-O1", "P3-O1", "P8-O2", "P4-O2",
];

/// A seizure interval `[start_s, end_s)` in whole seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeizureAnnotation {
    pub start_s: u64,
    pub end_s: u64,
}

impl SeizureAnnotation {
    pub fn new(start_s: u64, end_s: u64) -> Result<Self> {
        if end_s <= start_s {
            return Err(Error::InvalidRecording(format!(
                "seizure end {end_s} s not after start {start_s} s"
            )));
        }
        Ok(Self { start_s, end_s })
    }

    pub fn duration_s(&self) -> u64 {
        self.end_s - self.start_s
    }

    /// Whether `[start, end)` shares any time with this seizure.
    pub fn intersects(&self, start: f64, end: f64) -> bool {
        start < self.end_s as f64 && end > self.start_s as f64
    }
}

/// Channel-major physical samples (microvolts) with seizure annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    channels: Vec<String>,
    samples: Vec<Vec<f64>>,
    fs: f64,
    annotations: Vec<SeizureAnnotation>,
    source_id: String,
}

fn normalize_label(label: &str) -> String {
    label.trim().to_uppercase()
}

impl Recording {
    pub fn new(
        source_id: impl Into<String>,
        channels: Vec<String>,
        samples: Vec<Vec<f64>>,
        fs: f64,
    ) -> Result<Self> {
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(Error::InvalidRecording("sampling rate must be positive".into()));
        }
        if channels.len() != samples.len() {
            return Err(Error::InvalidRecording(format!(
                "{} channel names for {} sample rows",
                channels.len(),
                samples.len()
            )));
        }
        if let Some(first) = samples.first() {
            if samples.iter().any(|row| row.len() != first.len()) {
                return Err(Error::InvalidRecording("channel rows differ in length".into()));
            }
        }
        for (i, name) in channels.iter().enumerate() {
            if channels[..i].iter().any(|other| other == name) {
                return Err(Error::DuplicateChannel(name.clone()));
            }
        }
        Ok(Self {
            channels,
            samples,
            fs,
            annotations: Vec::new(),
            source_id: source_id.into(),
        })
    }

    /// Attaches seizure annotations, sorted by start. Each must lie within the
    /// recording and they must not overlap.
    pub fn with_annotations(mut self, mut annotations: Vec<SeizureAnnotation>) -> Result<Self> {
        annotations.sort();
        let duration = self.duration_s();
        for a in &annotations {
            if a.end_s <= a.start_s || a.end_s as f64 > duration + 1e-9 {
                return Err(Error::InvalidRecording(format!(
                    "seizure [{}, {}) outside recording of {duration} s",
                    a.start_s, a.end_s
                )));
            }
        }
        if annotations.windows(2).any(|p| p[1].start_s < p[0].end_s) {
            return Err(Error::InvalidRecording("overlapping seizure annotations".into()));
        }
        self.annotations = annotations;
        Ok(self)
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.samples[index]
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn annotations(&self) -> &[SeizureAnnotation] {
        &self.annotations
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn n_samples(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / self.fs
    }

    /// Keeps exactly the channels in `wanted`, in that order. Labels are
    /// compared after trimming and upper-casing; aliases are not resolved.
    pub fn select_channels(&self, wanted: &[&str]) -> Result<Recording> {
        let normalized: Vec<String> = self.channels.iter().map(|c| normalize_label(c)).collect();
        let mut channels = Vec::with_capacity(wanted.len());
        let mut samples = Vec::with_capacity(wanted.len());
        for name in wanted {
            let key = normalize_label(name);
            let idx = normalized
                .iter()
                .position(|c| *c == key)
                .ok_or_else(|| Error::MissingChannel(name.to_string()))?;
            channels.push(key);
            samples.push(self.samples[idx].clone());
        }
        let out = Recording::new(self.source_id.clone(), channels, samples, self.fs)?;
        Ok(Recording {
            annotations: self.annotations.clone(),
            ..out
        })
    }

    /// [`select_channels`](Self::select_channels) with the canonical montage.
    pub fn select_canonical(&self) -> Result<Recording> {
        self.select_channels(&CANONICAL_CHANNELS)
    }
}
