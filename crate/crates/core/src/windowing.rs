//! Seizure-centred segmentation.
//!
//! For every annotated seizure `[s, e)` the plan emits seizure windows starting
//! at `s, s + step, ...` for every start strictly before `e`, so the last one
//! may run past the seizure end and is still labelled seizure. Non-seizure
//! windows are then taken from the flanks: walking backwards from `s - window`
//! and forwards from `e`, never touching any annotation. Together the two
//! flanks contribute `round(2 * ratio * K)` windows for a seizure with `K`
//! seizure windows, split as evenly as possible with the extra one (if any)
//! going before the seizure. When one flank runs out the other is extended;
//! if both run out the plan records a shortfall.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::recording::{Recording, SeizureAnnotation};

/// Largest window length used in the reference study, in seconds.
pub const RECOMMENDED_MAX_WINDOW_S: u32 = 10;

/// Binary window label; the positive class is `Seizure`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Label {
    Nonseizure,
    Seizure,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        match self {
            Label::Nonseizure => 0,
            Label::Seizure => 1,
        }
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Label::Nonseizure),
            1 => Ok(Label::Seizure),
            other => Err(Error::NonBinary(other)),
        }
    }

    pub fn is_seizure(self) -> bool {
        self == Label::Seizure
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Nonseizure => "nonseizure",
            Label::Seizure => "seizure",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Nonseizure => Label::Seizure,
            Label::Seizure => Label::Nonseizure,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub window_s: u32,
    pub step_s: u32,
    /// Share of the seizure-window count drawn from each flank.
    pub nonseizure_ratio: f64,
}

impl WindowSpec {
    pub fn new(window_s: u32, step_s: u32) -> Result<Self> {
        let spec = Self {
            window_s,
            step_s,
            nonseizure_ratio: 0.5,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_s == 0 || self.step_s == 0 {
            return Err(invalid("window and step must be positive"));
        }
        if self.step_s > self.window_s {
            return Err(invalid("step longer than window would skip samples"));
        }
        if !(self.nonseizure_ratio >= 0.0 && self.nonseizure_ratio.is_finite()) {
            return Err(invalid("nonseizure ratio must be nonnegative"));
        }
        Ok(())
    }

    /// Seconds shared by consecutive windows.
    pub fn overlap_s(&self) -> u32 {
        self.window_s - self.step_s
    }

    pub fn exceeds_recommended_max(&self) -> bool {
        self.window_s > RECOMMENDED_MAX_WINDOW_S
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannedWindow {
    pub start_s: u64,
    pub label: Label,
}

/// Per-seizure window counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeizureTally {
    pub seizure: SeizureAnnotation,
    pub seizure_windows: usize,
    pub nonseizure_windows: usize,
    pub nonseizure_target: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationPlan {
    pub window_s: u32,
    /// Sorted by strictly increasing start.
    pub windows: Vec<PlannedWindow>,
    pub tallies: Vec<SeizureTally>,
    /// Set when some seizure could not be balanced with enough flank windows.
    pub shortfall: bool,
}

impl SegmentationPlan {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.windows.iter().filter(|w| w.label == label).count()
    }
}

/// Starts of every full window inside `[start_s, end_s)` stepping by
/// `spec.step_s`.
pub fn tile_region(start_s: u64, end_s: u64, spec: &WindowSpec) -> Vec<u64> {
    let w = spec.window_s as u64;
    let mut starts = Vec::new();
    let mut t = start_s;
    while t + w <= end_s {
        starts.push(t);
        t += spec.step_s as u64;
    }
    starts
}

fn check_annotations(annotations: &[SeizureAnnotation], duration_s: u64) -> Result<()> {
    for a in annotations {
        if a.end_s <= a.start_s || a.end_s > duration_s {
            return Err(invalid("seizure annotation outside recording"));
        }
    }
    if annotations.windows(2).any(|p| p[1].start_s < p[0].end_s) {
        return Err(invalid("seizure annotations must be sorted and disjoint"));
    }
    Ok(())
}

pub fn plan_segments(
    annotations: &[SeizureAnnotation],
    duration_s: u64,
    spec: &WindowSpec,
) -> Result<SegmentationPlan> {
    spec.validate()?;
    let w = spec.window_s as u64;
    let step = spec.step_s as u64;
    if duration_s < w {
        return Err(Error::Insufficient(alloc::format!(
            "recording of {duration_s} s is shorter than one {w} s window"
        )));
    }
    check_annotations(annotations, duration_s)?;

    let clear = |start: u64| {
        annotations
            .iter()
            .all(|a| !a.intersects(start as f64, (start + w) as f64))
    };

    let mut used: BTreeSet<u64> = BTreeSet::new();
    let mut windows = Vec::new();
    let mut tallies = Vec::with_capacity(annotations.len());
    let mut shortfall = false;

    for seizure in annotations {
        let mut k = 0;
        let mut start = seizure.start_s;
        while start < seizure.end_s {
            if start + w <= duration_s && used.insert(start) {
                windows.push(PlannedWindow {
                    start_s: start,
                    label: Label::Seizure,
                });
                k += 1;
            }
            start += step;
        }

        let target = libm::round(2.0 * spec.nonseizure_ratio * k as f64) as usize;
        let want_before = target.div_ceil(2);
        let want_after = target - want_before;

        // walk each flank until it hits the recording edge or another seizure
        let mut before = Vec::new();
        let mut offset = w;
        while offset <= seizure.start_s {
            let s = seizure.start_s - offset;
            if !clear(s) {
                break;
            }
            if !used.contains(&s) {
                before.push(s);
            }
            if before.len() >= target {
                break;
            }
            offset += step;
        }
        let mut after = Vec::new();
        let mut s = seizure.end_s;
        while s + w <= duration_s && clear(s) {
            if !used.contains(&s) {
                after.push(s);
            }
            if after.len() >= target {
                break;
            }
            s += step;
        }

        let mut take_before = want_before.min(before.len());
        let mut take_after = want_after.min(after.len());
        take_after = (take_after + (want_before - take_before)).min(after.len());
        take_before = (take_before + (want_after.saturating_sub(take_after))).min(before.len());
        let got = take_before + take_after;
        if got < target {
            shortfall = true;
        }
        for &s in before[..take_before].iter().chain(&after[..take_after]) {
            used.insert(s);
            windows.push(PlannedWindow {
                start_s: s,
                label: Label::Nonseizure,
            });
        }
        tallies.push(SeizureTally {
            seizure: *seizure,
            seizure_windows: k,
            nonseizure_windows: got,
            nonseizure_target: target,
        });
    }

    windows.sort_by_key(|p| p.start_s);
    Ok(SegmentationPlan {
        window_s: spec.window_s,
        windows,
        tallies,
        shortfall,
    })
}

/// A fixed-length multichannel excerpt with its label and origin.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledWindow {
    /// Channel-major, `channels x (window_s * fs)`.
    pub data: Vec<Vec<f64>>,
    pub fs: f64,
    pub label: Label,
    pub source_id: String,
    pub start_s: u64,
    pub window_s: u32,
}

impl LabeledWindow {
    pub fn n_channels(&self) -> usize {
        self.data.len()
    }

    pub fn n_samples(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }
}

fn seconds_to_samples(seconds: u64, fs: f64) -> usize {
    libm::round(seconds as f64 * fs) as usize
}

/// Copies samples `[start*fs, (start + window)*fs)` for every planned window,
/// preserving plan order.
pub fn extract_windows(
    recording: &Recording,
    plan: &SegmentationPlan,
    spec: &WindowSpec,
) -> Result<Vec<LabeledWindow>> {
    let fs = recording.fs();
    let len = seconds_to_samples(spec.window_s as u64, fs);
    let total = recording.n_samples();
    plan.windows
        .iter()
        .map(|p| {
            let from = seconds_to_samples(p.start_s, fs);
            if from + len > total {
                return Err(Error::WindowOutOfBounds {
                    start_s: p.start_s,
                    duration_s: libm::floor(recording.duration_s()) as u64,
                });
            }
            Ok(LabeledWindow {
                data: recording
                    .samples()
                    .iter()
                    .map(|row| row[from..from + len].to_vec())
                    .collect(),
                fs,
                label: p.label,
                source_id: recording.source_id().into(),
                start_s: p.start_s,
                window_s: spec.window_s,
            })
        })
        .collect()
}
