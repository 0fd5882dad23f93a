//! Desk-scale synthetic corpus in the CHB-MIT layout: 16-bit EDFs with a
//! 23-channel bipolar montage plus a summary file in the same grammar.
//!
//! Background is per-channel pink noise; during a seizure every channel
//! gains a theta-band oscillation with a per-channel random phase, so the
//! seizure is visible in power spectra but averages out in raw amplitude.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use eegspect_core::recording::SeizureAnnotation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::edf::{microvolt_signal, write_edf, EdfHeader};
use crate::summary::render_summary;

/// Channel order of the CHB-MIT files, including the repeated `T8-P8`.
pub const MONTAGE: [&str; 23] = [
    "FP1-F7", "F7-T7", "T7-P7", "P7-O1", "FP1-F3", "F3-C3", "C3-P3", "P3-O1", "FP2-F4", "F4-C4", "C4-P4",
    "P4-O2", "FP2-F8", "F8-T8", "T8-P8", "P8-O2", "FZ-CZ", "CZ-PZ", "P7-T7", "T7-FT9", "FT9-FT10", "FT10-T8",
    "T8-P8",
];

pub const SUMMARY_FILE: &str = "synth-summary.txt";

/// Recorded span of the physical range, in µV; one digital step is 0.1 µV.
const PHYSICAL_RANGE: f64 = 3276.8;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("invalid synth parameters: {0}")]
    Invalid(String),

    #[error(transparent)]
    Edf(#[from] crate::edf::EdfError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub fs: usize,
    pub duration_s: u64,
    /// Seizure durations per recording, in seconds; one recording per entry.
    pub seizures: Vec<Vec<u64>>,
    /// Minimum seizure-free margin at either edge and between seizures.
    pub min_gap_s: u64,
    pub background_rms_uv: f64,
    /// Seizure theta power over background theta power, per channel.
    pub theta_gain: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            fs: 256,
            duration_s: 600,
            seizures: vec![vec![45, 75], vec![50, 70], vec![55, 65], vec![40, 80], vec![60], vec![60]],
            min_gap_s: 100,
            background_rms_uv: 20.0,
            theta_gain: 25.0,
        }
    }
}

impl SynthConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn file_name(index: usize) -> String {
        format!("synth_{:02}.edf", index + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthRecording {
    pub file_name: String,
    pub seizures: Vec<SeizureAnnotation>,
}

/// Paul Kellet's economy-grade 1/f filter over white noise.
struct Pink([f64; 7]);

impl Pink {
    fn next(&mut self, white: f64) -> f64 {
        let b = &mut self.0;
        b[0] = 0.99886 * b[0] + white * 0.0555179;
        b[1] = 0.99332 * b[1] + white * 0.0750759;
        b[2] = 0.96900 * b[2] + white * 0.1538520;
        b[3] = 0.86650 * b[3] + white * 0.3104856;
        b[4] = 0.55000 * b[4] + white * 0.5329522;
        b[5] = -0.7616 * b[5] - white * 0.0168980;
        let out = b[0] + b[1] + b[2] + b[3] + b[4] + b[5] + b[6] + white * 0.5362;
        b[6] = white * 0.115926;
        out
    }
}

fn place(durations: &[u64], cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Vec<SeizureAnnotation>, SynthError> {
    if durations.is_empty() {
        return Ok(Vec::new());
    }
    let busy: u64 = durations.iter().sum::<u64>() + cfg.min_gap_s * (durations.len() as u64 + 1);
    let slack = cfg.duration_s.checked_sub(busy).ok_or_else(|| {
        SynthError::Invalid(format!("{durations:?} s of seizures with gaps do not fit in {} s", cfg.duration_s))
    })?;
    // split the slack into len+1 pieces at sorted random cut points
    let mut cuts: Vec<u64> = (0..durations.len()).map(|_| rng.random_range(0..=slack)).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(durations.len());
    let mut t = 0;
    let mut prev_cut = 0;
    for (&d, &cut) in durations.iter().zip(&cuts) {
        t += cfg.min_gap_s + (cut - prev_cut);
        prev_cut = cut;
        out.push(SeizureAnnotation { start_s: t, end_s: t + d });
        t += d;
    }
    Ok(out)
}

/// Band-limited background share in 3.5–7.5 Hz of a 1/f spectrum spanning
/// 0.5 Hz to Nyquist.
fn pink_theta_fraction(fs: f64) -> f64 {
    (7.5f64 / 3.5).ln() / (fs / 2.0 / 0.5).ln()
}

fn synthesize(cfg: &SynthConfig, seizures: &[SeizureAnnotation], rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let fs = cfg.fs as f64;
    let n = cfg.duration_s as usize * cfg.fs;
    let theta_power = cfg.theta_gain * pink_theta_fraction(fs) * cfg.background_rms_uv.powi(2);
    let amplitude = (2.0 * theta_power).sqrt();
    let freqs: Vec<f64> = seizures.iter().map(|_| rng.random_range(4.5..6.5)).collect();

    MONTAGE
        .iter()
        .map(|_| {
            let mut pink = Pink([0.0; 7]);
            // let the slow filter poles settle before recording
            for _ in 0..4 * cfg.fs {
                pink.next(rng.sample(StandardNormal));
            }
            let mut x: Vec<f64> = (0..n).map(|_| pink.next(rng.sample(StandardNormal))).collect();
            let mean = x.iter().sum::<f64>() / n as f64;
            let rms = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
            let scale = cfg.background_rms_uv / rms;
            x.iter_mut().for_each(|v| *v = (*v - mean) * scale);

            let gain = rng.random_range(0.8..1.2);
            for (a, &f) in seizures.iter().zip(&freqs) {
                let phase = rng.random_range(0.0..TAU);
                let (lo, hi) = (a.start_s as usize * cfg.fs, a.end_s as usize * cfg.fs);
                for (i, v) in x[lo..hi].iter_mut().enumerate() {
                    *v += gain * amplitude * (TAU * f * i as f64 / fs + phase).sin();
                }
            }
            x
        })
        .collect()
}

fn header(cfg: &SynthConfig, index: usize) -> EdfHeader {
    EdfHeader {
        version: "0".into(),
        patient: format!("synth_{:02}", index + 1),
        recording: "synthetic pink-noise background with theta seizures".into(),
        start_date: "01.01.00".into(),
        start_time: "00.00.00".into(),
        record_count: cfg.duration_s as usize,
        record_duration: 1.0,
        signals: MONTAGE
            .iter()
            .map(|l| microvolt_signal(l, cfg.fs, PHYSICAL_RANGE))
            .collect(),
    }
}

/// Encoded EDF bytes per recording, plus the summary text. Pure function of
/// the config.
pub fn generate(cfg: &SynthConfig) -> Result<(Vec<(SynthRecording, Vec<u8>)>, String), SynthError> {
    if cfg.fs == 0 || cfg.seizures.is_empty() {
        return Err(SynthError::Invalid("need fs > 0 and at least one recording".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.seizures.len());
    for (i, durations) in cfg.seizures.iter().enumerate() {
        let seizures = place(durations, cfg, &mut rng)?;
        let samples = synthesize(cfg, &seizures, &mut rng);
        let bytes = write_edf(&header(cfg, i), &samples)?;
        out.push((
            SynthRecording {
                file_name: SynthConfig::file_name(i),
                seizures,
            },
            bytes,
        ));
    }
    let channels: Vec<String> = MONTAGE.iter().map(|s| s.to_string()).collect();
    let files: Vec<(String, Vec<SeizureAnnotation>)> =
        out.iter().map(|(r, _)| (r.file_name.clone(), r.seizures.clone())).collect();
    let summary = render_summary(cfg.fs as f64, &channels, &files);
    Ok((out, summary))
}

/// Writes the corpus into `dir`, creating it if needed.
pub fn write_corpus(cfg: &SynthConfig, dir: &Path) -> Result<Vec<SynthRecording>, SynthError> {
    let write = |path: PathBuf, bytes: &[u8]| {
        std::fs::write(&path, bytes).map_err(|source| SynthError::Write { path, source })
    };
    std::fs::create_dir_all(dir).map_err(|source| SynthError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let (recordings, summary) = generate(cfg)?;
    let mut out = Vec::with_capacity(recordings.len());
    for (rec, bytes) in recordings {
        write(dir.join(&rec.file_name), &bytes)?;
        out.push(rec);
    }
    write(dir.join(SUMMARY_FILE), summary.as_bytes())?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_layout() {
        let cfg = SynthConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut total = 0;
        let mut count = 0;
        for durations in &cfg.seizures {
            let placed = place(durations, &cfg, &mut rng).unwrap();
            assert!(placed[0].start_s >= cfg.min_gap_s);
            assert!(placed.last().unwrap().end_s + cfg.min_gap_s <= cfg.duration_s);
            for p in placed.windows(2) {
                assert!(p[1].start_s >= p[0].end_s + cfg.min_gap_s);
            }
            total += placed.iter().map(|a| a.duration_s()).sum::<u64>();
            count += placed.len();
        }
        assert_eq!((count, total), (10, 600));
    }

    #[test]
    fn overfull_recording_rejected() {
        let cfg = SynthConfig {
            seizures: vec![vec![500]],
            ..SynthConfig::default()
        };
        assert!(matches!(generate(&cfg), Err(SynthError::Invalid(_))));
    }
}
