//! Directory scan that pairs every EDF with its summary annotations and
//! persists the result as `catalog.json`.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use eegspect_core::recording::SeizureAnnotation;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::edf::read_header;
use crate::summary::parse_summary;

pub const SCHEMA_VERSION: u32 = 1;
pub const CATALOG_FILE: &str = "catalog.json";

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("cannot read directory {path}: {source}")]
    Unreadable { path: PathBuf, source: std::io::Error },

    #[error("duplicate source id {0:?}")]
    DuplicateSourceId(String),

    #[error("unsupported catalog schema version {0}")]
    SchemaVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub source_id: String,
    /// Relative to the scanned directory, `/`-separated.
    pub path: String,
    pub duration_s: f64,
    pub seizures: Vec<SeizureAnnotation>,
}

impl CatalogEntry {
    pub fn seizure_count(&self) -> usize {
        self.seizures.len()
    }

    pub fn seizure_seconds(&self) -> u64 {
        self.seizures.iter().map(SeizureAnnotation::duration_s).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordCatalog {
    pub schema_version: u32,
    pub entries: Vec<CatalogEntry>,
}

impl Default for RecordCatalog {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            entries: Vec::new(),
        }
    }
}

impl RecordCatalog {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("catalog serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let catalog: RecordCatalog = serde_json::from_str(text)?;
        if catalog.schema_version != SCHEMA_VERSION {
            return Err(CatalogError::SchemaVersion(catalog.schema_version));
        }
        Ok(catalog)
    }

    pub fn save(&self, path: &Path) -> Result<(), CatalogError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CatalogError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn seizure_entries(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.iter().filter(|e| !e.seizures.is_empty())
    }
}

/// A catalog plus what had to be left out or assumed while building it.
#[derive(Debug, Clone, Default)]
pub struct CatalogReport {
    pub catalog: RecordCatalog,
    /// Files that failed to parse, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
    pub warnings: Vec<String>,
}

impl CatalogReport {
    pub fn is_partial(&self) -> bool {
        !self.skipped.is_empty()
    }
}

fn relative(dir: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(dir).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn inspect_edf(path: &Path) -> Result<f64, String> {
    let file = File::open(path).map_err(|e| e.to_string())?;
    let size = file.metadata().map_err(|e| e.to_string())?.len() as usize;
    let header = read_header(std::io::BufReader::new(file)).map_err(|e| e.to_string())?;
    if size < header.file_bytes() {
        return Err(format!("truncated: header implies {} bytes, file has {size}", header.file_bytes()));
    }
    let spr = header.signals[0].samples_per_record;
    if header.signals.iter().any(|s| s.samples_per_record != spr) {
        return Err("signals have different sampling rates".into());
    }
    Ok(header.duration_s())
}

/// Scans `dir` recursively for `*.edf` and `*summary.txt` files. EDFs that
/// fail to parse and summaries that fail to parse are skipped and reported;
/// EDFs without a summary entry are catalogued with no seizures and a
/// warning. Entries come out sorted by source id.
pub fn build_catalog(dir: &Path) -> Result<CatalogReport, CatalogError> {
    let mut edfs = Vec::new();
    let mut summaries = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| CatalogError::Unreadable {
            path: e.path().unwrap_or(dir).to_path_buf(),
            source: e.into_io_error().unwrap_or_else(|| std::io::Error::other("filesystem loop")),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.into_path();
        let name = path.file_name().map(|n| n.to_string_lossy().to_lowercase()).unwrap_or_default();
        if has_extension(&path, "edf") {
            edfs.push(path);
        } else if name.ends_with("summary.txt") {
            summaries.push(path);
        }
    }

    let mut report = CatalogReport::default();
    let mut annotations: BTreeMap<String, Vec<SeizureAnnotation>> = BTreeMap::new();
    for path in summaries {
        let parsed = std::fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|text| parse_summary(&text).map_err(|e| e.to_string()));
        match parsed {
            Ok(map) => {
                for (file, seizures) in map {
                    if let Some(prev) = annotations.get(&file) {
                        if *prev != seizures {
                            report.warnings.push(format!("{file}: conflicting summary entries, keeping the first"));
                        }
                        continue;
                    }
                    annotations.insert(file, seizures);
                }
            }
            Err(reason) => report.skipped.push((path, reason)),
        }
    }

    let inspected: Vec<(PathBuf, Result<f64, String>)> =
        edfs.into_par_iter().map(|p| (p.clone(), inspect_edf(&p))).collect();

    let mut entries: Vec<CatalogEntry> = Vec::new();
    for (path, result) in inspected {
        let duration_s = match result {
            Ok(d) => d,
            Err(reason) => {
                report.skipped.push((path, reason));
                continue;
            }
        };
        let file_name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let source_id = path.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let seizures = match annotations.get(&file_name) {
            Some(s) => s.clone(),
            None => {
                report.warnings.push(format!("{file_name}: no summary entry, assuming no seizures"));
                Vec::new()
            }
        };
        if let Some(a) = seizures.iter().find(|a| a.end_s as f64 > duration_s) {
            report.skipped.push((
                path,
                format!("seizure [{}, {}) extends past the {duration_s} s recording", a.start_s, a.end_s),
            ));
            continue;
        }
        entries.push(CatalogEntry {
            source_id,
            path: relative(dir, &path),
            duration_s,
            seizures,
        });
    }
    entries.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    if let Some(pair) = entries.windows(2).find(|p| p[0].source_id == p[1].source_id) {
        return Err(CatalogError::DuplicateSourceId(pair[0].source_id.clone()));
    }
    report.catalog.entries = entries;
    Ok(report)
}
