//! The `run` command: catalog → segment → featurize → split → train →
//! evaluate → stats → report.
//!
//! Stages run in sequence; inside a stage, recordings, windows and folds fan
//! out over the current rayon pool. Every parallel map collects in input
//! order, so outputs do not depend on the worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use eegspect_core::classifier::train;
use eegspect_core::evaluation::{confusion, metrics, rank_models, roc, MetricsReport, ModelScores, RocCurve};
use eegspect_core::recording::Recording;
use eegspect_core::representation::{
    apply_minmax, fit_minmax, FeatureBuilder, FeatureTensor, RepresentationKind,
};
use eegspect_core::spectral::{band_power, Spectrum};
use eegspect_core::splits::{group_kfold, holdout_split, kfold, FoldPlan};
use eegspect_core::stats::{run_battery, AccuracyTable, CellKey, ALPHA};
use eegspect_core::windowing::{extract_windows, plan_segments, Label, LabeledWindow, SegmentationPlan};
use log::{info, warn};
use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::catalog::{CatalogEntry, RecordCatalog};
use crate::config::{hex, PipelineConfig};
use crate::edf::parse_edf;
use crate::formats::{self, MetricsRow};

/// Name of the single baseline architecture in every output table.
pub const MODEL: &str = "logreg";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Catalog,
    Segment,
    Featurize,
    Split,
    Train,
    Evaluate,
    Stats,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Catalog => "catalog",
            Stage::Segment => "segment",
            Stage::Featurize => "featurize",
            Stage::Split => "split",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Stats => "stats",
            Stage::Report => "report",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T, E: fmt::Display> StageExt<T> for Result<T, E> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError {
            stage,
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    /// Written files relative to the output directory, sorted.
    pub outputs: Vec<String>,
    /// Recordings dropped at load time.
    pub skipped: Vec<(String, String)>,
    pub cache_hits: usize,
}

impl RunSummary {
    pub fn is_partial(&self) -> bool {
        !self.skipped.is_empty()
    }
}

/// Collects output paths as they are written.
struct Outputs {
    root: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn path(&self, rel: &str) -> Result<PathBuf, std::io::Error> {
        let p = self.root.join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        Ok(p)
    }

    fn create(&mut self, rel: &str) -> Result<BufWriter<File>, std::io::Error> {
        let p = self.path(rel)?;
        self.written.push(rel.to_string());
        Ok(BufWriter::new(File::create(p)?))
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), std::io::Error> {
        let p = self.path(rel)?;
        self.written.push(rel.to_string());
        fs::write(p, bytes)
    }

    /// Registers a file that already exists (a cache hit).
    fn keep(&mut self, rel: &str) {
        self.written.push(rel.to_string());
    }
}

fn load_recording(dataset_dir: &Path, entry: &CatalogEntry) -> Result<Recording, String> {
    let bytes = fs::read(dataset_dir.join(&entry.path)).map_err(|e| e.to_string())?;
    let (_, rec) = parse_edf(&bytes, &entry.source_id).map_err(|e| e.to_string())?;
    rec.select_canonical()
        .and_then(|r| r.with_annotations(entry.seizures.clone()))
        .map_err(|e| e.to_string())
}

fn file_sha256(path: &Path) -> Result<String, std::io::Error> {
    let mut hasher = Sha256::new();
    std::io::copy(&mut BufReader::new(File::open(path)?), &mut hasher)?;
    Ok(hex(&hasher.finalize()))
}

/// Everything a feature file depends on: format and crate versions, the
/// window spec, spectral parameters, and each source recording's bytes and
/// annotations.
fn feature_cache_key(
    config: &PipelineConfig,
    window_s: u32,
    kind: RepresentationKind,
    sources: &[(&CatalogEntry, String)],
) -> String {
    let spec = config.window_spec(window_s).expect("validated");
    let mut h = Sha256::new();
    h.update(format!(
        "eegspect {} tensor-format {}\n",
        env!("CARGO_PKG_VERSION"),
        formats::FORMAT_VERSION
    ));
    h.update(format!("{kind} {} {} {}\n", spec.window_s, spec.step_s, spec.nonseizure_ratio));
    h.update(serde_json::to_string(&config.spectral()).expect("serializes"));
    for (entry, digest) in sources {
        h.update(serde_json::to_string(entry).expect("serializes"));
        h.update(digest.as_bytes());
    }
    hex(&h.finalize())
}

fn fold_plan(config: &PipelineConfig, tensors_meta: &[(String, Label)]) -> Result<FoldPlan, String> {
    let s = &config.split;
    if s.group_by_source {
        let groups: Vec<&str> = tensors_meta.iter().map(|(g, _)| g.as_str()).collect();
        group_kfold(&groups, s.k, s.seed).map_err(|e| e.to_string())
    } else {
        let labels: Vec<Label> = tensors_meta.iter().map(|m| m.1).collect();
        kfold(labels.len(), &labels, s.k, s.seed).map_err(|e| e.to_string())
    }
}

struct FoldResult {
    report: MetricsReport,
    scores: Vec<(usize, f64)>,
}

fn evaluate_fold(
    tensors: &[FeatureTensor],
    plan: &FoldPlan,
    fold: usize,
    config: &PipelineConfig,
) -> Result<FoldResult, PipelineError> {
    let train_idx = plan.train_indices(fold);
    let test_idx = &plan.folds[fold];
    let stats = fit_minmax(train_idx.iter().map(|&i| &tensors[i])).stage(Stage::Train)?;
    let rows = train_idx
        .iter()
        .map(|&i| apply_minmax(&tensors[i], &stats).map(|t| t.data))
        .collect::<Result<Vec<_>, _>>()
        .stage(Stage::Train)?;
    let labels: Vec<Label> = train_idx.iter().map(|&i| tensors[i].label).collect();
    let seed = config.split.seed.wrapping_add(fold as u64);
    let model = train(&rows, &labels, config.baseline.train_config(seed)).stage(Stage::Train)?;
    drop(rows);

    let mut scores = Vec::with_capacity(test_idx.len());
    for &i in test_idx {
        let x = apply_minmax(&tensors[i], &stats).stage(Stage::Evaluate)?;
        scores.push((i, model.predict_proba(&x.data).stage(Stage::Evaluate)?));
    }
    let truth: Vec<Label> = test_idx.iter().map(|&i| tensors[i].label).collect();
    let predicted: Vec<Label> = scores
        .iter()
        .map(|&(_, p)| if p >= 0.5 { Label::Seizure } else { Label::Nonseizure })
        .collect();
    let cm = confusion(&truth, &predicted).stage(Stage::Evaluate)?;
    Ok(FoldResult {
        report: metrics(&cm),
        scores,
    })
}

/// Mean band power over channels, per window label, for a PSD tensor set.
fn band_rows(config: &PipelineConfig, tensors: &[FeatureTensor]) -> Result<Vec<[String; 5]>, String> {
    let mut out = Vec::new();
    let Some(first) = tensors.first() else { return Ok(out) };
    // PSD tensors hold the N/2 one-sided bins of an N = fs * window_s transform
    let bins = first.dims[1];
    let n_fft = 2 * bins;
    let fs = n_fft as f64 / first.provenance.window_s as f64;
    for label in [Label::Seizure, Label::Nonseizure] {
        let group: Vec<&FeatureTensor> = tensors.iter().filter(|t| t.label == label).collect();
        if group.is_empty() {
            continue;
        }
        for band in &config.bands {
            let mut total = 0.0;
            for t in &group {
                for row in t.data.chunks_exact(bins) {
                    let spectrum = Spectrum::from_bins(row.to_vec(), fs, n_fft);
                    total += band_power(&spectrum, band).map_err(|e| e.to_string())?;
                }
            }
            let mean = total / (group.len() * first.dims[0]) as f64;
            out.push([
                first.provenance.window_s.to_string(),
                first.kind.as_str().to_string(),
                label.as_str().to_string(),
                band.name.clone(),
                formats::fmt_f64(mean),
            ]);
        }
    }
    Ok(out)
}

struct WindowResults {
    metrics: Vec<MetricsRow>,
    scores: Vec<ModelScores>,
    bands: Vec<[String; 5]>,
}

fn run_window(
    config: &PipelineConfig,
    window_s: u32,
    entries: &[&CatalogEntry],
    digests: &[String],
    out: &mut Outputs,
    summary: &mut RunSummary,
) -> Result<WindowResults, PipelineError> {
    let spec = config.window_spec(window_s).stage(Stage::Segment)?;
    let tag = format!("{window_s}s");

    // segment: plans come from the catalog alone
    let plans: Vec<SegmentationPlan> = entries
        .iter()
        .map(|e| {
            plan_segments(&e.seizures, e.duration_s.floor() as u64, &spec)
                .map_err(|err| format!("{}: {err}", e.source_id))
        })
        .collect::<Result<_, _>>()
        .stage(Stage::Segment)?;
    for (e, p) in entries.iter().zip(&plans) {
        if p.shortfall {
            warn!("{}: fewer nonseizure windows than targeted at {tag}", e.source_id);
        }
    }
    let plan_rel = format!("plans/segments_{tag}.csv");
    formats::write_plan_csv(
        out.create(&plan_rel).stage(Stage::Segment)?,
        entries.iter().map(|e| e.source_id.as_str()).zip(&plans),
    )
    .stage(Stage::Segment)?;

    // featurize: reuse cached datasets where the key matches
    let sources: Vec<(&CatalogEntry, String)> = entries.iter().copied().zip(digests.iter().cloned()).collect();
    let keys: Vec<String> = config
        .representations
        .iter()
        .map(|&k| feature_cache_key(config, window_s, k, &sources))
        .collect();
    let base = |k: RepresentationKind| format!("features/{tag}/{}", k.as_str());
    let cached: Vec<bool> = config
        .representations
        .iter()
        .zip(&keys)
        .map(|(&k, key)| {
            config.cache
                && fs::read_to_string(out.root.join(format!("{}.key", base(k)))).is_ok_and(|s| s.trim() == key)
                && out.root.join(format!("{}.eegt", base(k))).is_file()
        })
        .collect();

    let windows: Vec<LabeledWindow> = if cached.iter().all(|&c| c) {
        Vec::new()
    } else {
        let loaded: Vec<Result<Vec<LabeledWindow>, String>> = entries
            .par_iter()
            .zip(&plans)
            .map(|(e, plan)| {
                let rec = load_recording(&config.dataset_dir, e)?;
                extract_windows(&rec, plan, &spec).map_err(|err| err.to_string())
            })
            .collect();
        let mut windows = Vec::new();
        for (e, r) in entries.iter().zip(loaded) {
            match r {
                Ok(w) => windows.extend(w),
                Err(reason) => {
                    warn!("skipping {}: {reason}", e.source_id);
                    if !summary.skipped.iter().any(|(s, _)| s == &e.source_id) {
                        summary.skipped.push((e.source_id.clone(), reason));
                    }
                }
            }
        }
        windows
    };

    let mut results = WindowResults {
        metrics: Vec::new(),
        scores: Vec::new(),
        bands: Vec::new(),
    };
    let mut fold_plan_written = false;
    for ((&kind, key), hit) in config.representations.iter().zip(&keys).zip(cached) {
        let rel = base(kind);
        let tensors: Vec<FeatureTensor> = if hit {
            info!("{tag} {kind}: cached");
            summary.cache_hits += 1;
            let mut r = BufReader::new(File::open(out.root.join(format!("{rel}.eegt"))).stage(Stage::Featurize)?);
            let t = formats::read_dataset(&mut r).stage(Stage::Featurize)?;
            out.keep(&format!("{rel}.eegt"));
            out.keep(&format!("{rel}.csv"));
            out.keep(&format!("{rel}.key"));
            t
        } else {
            info!("{tag} {kind}: featurizing {} windows", windows.len());
            let fs = windows.first().map_or(eegspect_core::REFERENCE_FS, |w| w.fs);
            let builder = FeatureBuilder::new(kind, &config.spectral(), fs, window_s).stage(Stage::Featurize)?;
            let t = windows
                .par_iter()
                .map(|w| builder.build(w))
                .collect::<Result<Vec<_>, _>>()
                .stage(Stage::Featurize)?;
            let mut f = out.create(&format!("{rel}.eegt")).stage(Stage::Featurize)?;
            formats::write_dataset(&mut f, t.iter()).stage(Stage::Featurize)?;
            f.flush().stage(Stage::Featurize)?;
            formats::write_tensor_manifest(out.create(&format!("{rel}.csv")).stage(Stage::Featurize)?, &t)
                .stage(Stage::Featurize)?;
            out.write(&format!("{rel}.key"), format!("{key}\n").as_bytes()).stage(Stage::Featurize)?;
            t
        };
        if tensors.is_empty() {
            return Err(PipelineError {
                stage: Stage::Featurize,
                message: format!("no windows at {tag}"),
            });
        }

        // split: identical for every representation of this window size
        let meta: Vec<(String, Label)> =
            tensors.iter().map(|t| (t.provenance.source_id.clone(), t.label)).collect();
        let plan = fold_plan(config, &meta).stage(Stage::Split)?;
        if !fold_plan_written {
            let labels: Vec<Label> = meta.iter().map(|m| m.1).collect();
            let holdout = match holdout_split(labels.len(), &labels, config.split.seed) {
                Ok(h) => json!({
                    "tuning_fit": h.tuning_fit, "tuning_val": h.tuning_val,
                    "train": h.train, "val": h.val, "test": h.test,
                }),
                Err(e) => {
                    warn!("no holdout split at {tag}: {e}");
                    serde_json::Value::Null
                }
            };
            let doc = json!({ "window_s": window_s, "kfold": plan, "holdout": holdout });
            let mut text = serde_json::to_string_pretty(&doc).stage(Stage::Split)?;
            text.push('\n');
            out.write(&format!("splits/splits_{tag}.json"), text.as_bytes()).stage(Stage::Split)?;
            fold_plan_written = true;
        }

        // train + evaluate, folds in parallel
        let folds: Vec<FoldResult> = (0..plan.k())
            .into_par_iter()
            .map(|f| evaluate_fold(&tensors, &plan, f, config))
            .collect::<Result<_, _>>()?;
        let mut pooled = vec![0.0; tensors.len()];
        for (f, r) in folds.iter().enumerate() {
            for &(i, p) in &r.scores {
                pooled[i] = p;
            }
            results.metrics.push(MetricsRow {
                model: MODEL.into(),
                representation: kind,
                window_s,
                fold: f,
                report: r.report,
            });
        }
        let labels: Vec<Label> = meta.iter().map(|m| m.1).collect();
        let curve: RocCurve = roc(&pooled, &labels).stage(Stage::Evaluate)?;
        formats::write_roc_csv(
            out.create(&format!("roc/{MODEL}_{}_{tag}.csv", kind.as_str())).stage(Stage::Evaluate)?,
            &curve,
        )
        .stage(Stage::Evaluate)?;
        results.scores.push(ModelScores {
            name: format!("{MODEL}|{}|{window_s}", kind.as_str()),
            folds: folds.iter().map(|r| r.report).collect(),
            auc: Some(curve.auc),
        });

        if matches!(kind, RepresentationKind::WelchPsd | RepresentationKind::MultitaperPsd) && !config.bands.is_empty() {
            results.bands.extend(band_rows(config, &tensors).stage(Stage::Report)?);
        }
    }
    Ok(results)
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect::<String>()
        .split('_')
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

/// Runs the pipeline on the current rayon pool.
pub fn run(config: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    config.validate().stage(Stage::Catalog)?;
    let catalog_path = config.catalog_path();
    let catalog = RecordCatalog::load(&catalog_path)
        .map_err(|e| format!("{}: {e}", catalog_path.display()))
        .stage(Stage::Catalog)?;
    let entries: Vec<&CatalogEntry> = catalog.seizure_entries().collect();
    if entries.is_empty() {
        return Err(PipelineError {
            stage: Stage::Catalog,
            message: format!("{} lists no recordings with seizures", catalog_path.display()),
        });
    }
    info!("{} recordings with seizures", entries.len());
    let digests: Vec<String> = entries
        .par_iter()
        .map(|e| {
            let p = config.dataset_dir.join(&e.path);
            file_sha256(&p).map_err(|err| format!("{}: {err}", p.display()))
        })
        .collect::<Result<_, _>>()
        .stage(Stage::Catalog)?;

    fs::create_dir_all(&config.output_dir).stage(Stage::Report)?;
    let mut out = Outputs {
        root: config.output_dir.clone(),
        written: Vec::new(),
    };
    let mut summary = RunSummary::default();
    let mut metrics_rows = Vec::new();
    let mut scores = Vec::new();
    let mut band_table = Vec::new();
    for &w in &config.windows {
        let r = run_window(config, w, &entries, &digests, &mut out, &mut summary)?;
        metrics_rows.extend(r.metrics);
        scores.extend(r.scores);
        band_table.extend(r.bands);
    }

    formats::write_metrics_csv(out.create("metrics.csv").stage(Stage::Report)?, &metrics_rows).stage(Stage::Report)?;
    let ranking = rank_models(&scores, "auc").stage(Stage::Report)?;
    formats::write_ranking_csv(out.create("ranking.csv").stage(Stage::Report)?, &ranking).stage(Stage::Report)?;
    if !band_table.is_empty() {
        let mut w = csv::Writer::from_writer(out.create("band_power.csv").stage(Stage::Report)?);
        w.write_record(["window_s", "representation", "label", "band", "mean_power"]).stage(Stage::Report)?;
        for row in &band_table {
            w.write_record(row).stage(Stage::Report)?;
        }
        w.flush().stage(Stage::Report)?;
    }

    let mut table = AccuracyTable::new();
    for row in &metrics_rows {
        table
            .entry(CellKey {
                architecture: row.model.clone(),
                representation: row.representation.as_str().to_string(),
                window_s: row.window_s,
            })
            .or_default()
            .push(row.report.accuracy.unwrap_or(f64::NAN));
    }
    if table.values().flatten().any(|v| v.is_nan()) {
        return Err(PipelineError {
            stage: Stage::Stats,
            message: "a test fold was empty, accuracy undefined".into(),
        });
    }
    let battery = run_battery(&table, config.adjustment, ALPHA).stage(Stage::Stats)?;
    out.write("stats.json", formats::battery_json(&battery).as_bytes()).stage(Stage::Stats)?;
    for e in &battery.entries {
        let rel = format!("stats/{}_{}_{}.csv", e.test, e.grouping.as_str(), sanitize(&e.fixed));
        formats::write_matrix_csv(out.create(&rel).stage(Stage::Stats)?, &e.pairwise).stage(Stage::Stats)?;
    }

    write_manifest(config, &mut out).stage(Stage::Report)?;
    out.written.sort();
    summary.outputs = out.written;
    Ok(summary)
}

fn write_manifest(config: &PipelineConfig, out: &mut Outputs) -> Result<(), std::io::Error> {
    let mut files: BTreeMap<String, String> = BTreeMap::new();
    for rel in &out.written {
        files.insert(rel.clone(), file_sha256(&out.root.join(rel))?);
    }
    let doc = json!({
        "config_sha256": config.sha256(),
        "versions": {
            "eegspect": env!("CARGO_PKG_VERSION"),
            "tensor_format": formats::FORMAT_VERSION,
        },
        "outputs": files,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    text.push('\n');
    out.write("manifest.json", text.as_bytes())
}
