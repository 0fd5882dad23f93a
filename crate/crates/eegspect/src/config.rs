//! Experiment configuration, read from TOML. Every field has a default, so an
//! empty file is a valid config; unknown keys are rejected.

use std::path::{Path, PathBuf};

use eegspect_core::classifier::TrainConfig;
use eegspect_core::representation::{
    MultitaperParams, RepresentationKind, SpectralConfig, SpectrogramParams, WelchParams,
};
use eegspect_core::spectral::{default_bands, FrequencyBand};
use eegspect_core::stats::Adjustment;
use eegspect_core::windowing::WindowSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Parse(#[from] toml::de::Error),

    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub seed: u64,
    pub k: usize,
    /// Keep all windows of a recording in the same fold.
    pub group_by_source: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            k: 10,
            group_by_source: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            lr: t.learning_rate,
            epochs: t.epochs,
            batch: t.batch_size,
        }
    }
}

impl BaselineConfig {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.lr,
            epochs: self.epochs,
            batch_size: self.batch,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub dataset_dir: PathBuf,
    pub output_dir: PathBuf,
    /// Defaults to `<dataset_dir>/catalog.json`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog: Option<PathBuf>,
    pub windows: Vec<u32>,
    /// Step between window starts, capped at each window's length.
    pub step_s: u32,
    /// Share of the seizure-window count drawn from each flank.
    pub nonseizure_ratio: f64,
    pub representations: Vec<RepresentationKind>,
    pub adjustment: Adjustment,
    /// Reuse feature files whose cache key matches.
    pub cache: bool,
    pub multitaper: MultitaperParams,
    pub welch: WelchParams,
    pub spectrogram: SpectrogramParams,
    pub split: SplitConfig,
    pub baseline: BaselineConfig,
    pub bands: Vec<FrequencyBand>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dataset_dir: PathBuf::from("data"),
            output_dir: PathBuf::from("out"),
            catalog: None,
            windows: vec![1, 2, 5, 10],
            step_s: 1,
            nonseizure_ratio: WindowSpec::new(1, 1).expect("valid").nonseizure_ratio,
            representations: RepresentationKind::ALL.to_vec(),
            adjustment: Adjustment::default(),
            cache: true,
            multitaper: MultitaperParams::default(),
            welch: WelchParams::default(),
            spectrogram: SpectrogramParams::default(),
            split: SplitConfig::default(),
            baseline: BaselineConfig::default(),
            bands: default_bands(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Loads a config; relative directories are resolved against the
    /// config file's own directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            let resolve = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            };
            resolve(&mut config.dataset_dir);
            resolve(&mut config.output_dir);
            if let Some(c) = config.catalog.as_mut() {
                resolve(c);
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Hash of the canonical serialization, so formatting and comments in
    /// the source file do not matter.
    pub fn sha256(&self) -> String {
        hex(&Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn catalog_path(&self) -> PathBuf {
        self.catalog
            .clone()
            .unwrap_or_else(|| self.dataset_dir.join(crate::catalog::CATALOG_FILE))
    }

    pub fn spectral(&self) -> SpectralConfig {
        SpectralConfig {
            multitaper: self.multitaper,
            welch: self.welch,
            spectrogram: self.spectrogram,
        }
    }

    pub fn window_spec(&self, window_s: u32) -> Result<WindowSpec, ConfigError> {
        let mut spec = WindowSpec::new(window_s, self.step_s.min(window_s)).map_err(|e| invalid(e.to_string()))?;
        spec.nonseizure_ratio = self.nonseizure_ratio;
        spec.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.step_s == 0 {
            return Err(invalid("step_s must be positive"));
        }
        if self.windows.is_empty() {
            return Err(invalid("windows must not be empty"));
        }
        let mut sorted = self.windows.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.windows.len() {
            return Err(invalid("windows contain duplicates"));
        }
        for &w in &self.windows {
            self.window_spec(w)?;
        }
        if self.representations.is_empty() {
            return Err(invalid("representations must not be empty"));
        }
        let mut reps = self.representations.clone();
        reps.sort_unstable();
        reps.dedup();
        if reps.len() != self.representations.len() {
            return Err(invalid("representations contain duplicates"));
        }
        if self.split.k < 2 {
            return Err(invalid("split.k must be at least 2"));
        }
        let b = &self.baseline;
        if !(b.lr > 0.0 && b.lr.is_finite()) || b.epochs == 0 || b.batch == 0 {
            return Err(invalid("baseline needs lr > 0, epochs > 0 and batch > 0"));
        }
        let mt = &self.multitaper;
        if !(mt.nw > 0.0) || mt.q == 0 {
            return Err(invalid("multitaper needs nw > 0 and q > 0"));
        }
        let w = &self.welch;
        if !(w.seg_frac > 0.0 && w.seg_frac <= 1.0) || !(0.0..1.0).contains(&w.overlap) {
            return Err(invalid("welch needs 0 < seg_frac <= 1 and 0 <= overlap < 1"));
        }
        let s = &self.spectrogram;
        if !(s.w_s > 0.0) || s.hop == 0 || !(s.f_hi > 0.0) {
            return Err(invalid("spectrogram needs w_s > 0, hop > 0 and f_hi > 0"));
        }
        for band in &self.bands {
            FrequencyBand::new(band.name.clone(), band.lo, band.hi)
                .map_err(|e| invalid(format!("band {:?}: {e}", band.name)))?;
        }
        Ok(())
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
