mod common;

use std::fs;

use common::{eegspect, stderr};
use eegspect::catalog::{build_catalog, RecordCatalog};
use eegspect::synth::{write_corpus, SynthConfig, SUMMARY_FILE};

fn three_files(dir: &std::path::Path) {
    let cfg = SynthConfig {
        duration_s: 120,
        seizures: vec![vec![20], vec![], vec![]],
        min_gap_s: 40,
        ..SynthConfig::default()
    };
    write_corpus(&cfg, dir).unwrap();
}

#[test]
fn fixture_directory_gives_three_entries() {
    let dir = tempfile::tempdir().unwrap();
    three_files(dir.path());
    let out = eegspect(&["catalog", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("catalog.json")).unwrap();
    let catalog = RecordCatalog::from_json(&text).unwrap();
    let ids: Vec<&str> = catalog.entries.iter().map(|e| e.source_id.as_str()).collect();
    assert_eq!(ids, ["synth_01", "synth_02", "synth_03"]);
    let counts: Vec<usize> = catalog.entries.iter().map(|e| e.seizure_count()).collect();
    assert_eq!(counts, [1, 0, 0]);
    assert!(catalog.entries.iter().all(|e| e.duration_s == 120.0));
    // bit-identical re-serialization
    assert_eq!(catalog.to_json(), text);
}

#[test]
fn empty_directory_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = eegspect(&["catalog", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let catalog = RecordCatalog::load(&dir.path().join("catalog.json")).unwrap();
    assert!(catalog.entries.is_empty());
}

#[test]
fn unreadable_file_is_partial() {
    let dir = tempfile::tempdir().unwrap();
    three_files(dir.path());
    fs::write(dir.path().join("broken.edf"), b"not an edf at all").unwrap();
    let out = eegspect(&["catalog", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("broken.edf"), "{}", stderr(&out));
    let catalog = RecordCatalog::load(&dir.path().join("catalog.json")).unwrap();
    assert_eq!(catalog.entries.len(), 3);
}

#[test]
fn truncated_edf_is_skipped() {
    let dir = tempfile::tempdir().unwrap();
    three_files(dir.path());
    let p = dir.path().join("synth_02.edf");
    let bytes = fs::read(&p).unwrap();
    fs::write(&p, &bytes[..bytes.len() - 100]).unwrap();
    let report = build_catalog(dir.path()).unwrap();
    assert!(report.is_partial());
    assert_eq!(report.catalog.entries.len(), 2);
}

#[test]
fn missing_summary_entry_warns() {
    let dir = tempfile::tempdir().unwrap();
    three_files(dir.path());
    fs::remove_file(dir.path().join(SUMMARY_FILE)).unwrap();
    let report = build_catalog(dir.path()).unwrap();
    assert!(!report.is_partial());
    assert_eq!(report.warnings.len(), 3);
    assert!(report.catalog.entries.iter().all(|e| e.seizures.is_empty()));
}

#[test]
fn duplicate_source_id_is_fatal() {
    let dir = tempfile::tempdir().unwrap();
    three_files(&dir.path().join("a"));
    three_files(&dir.path().join("b"));
    let out = eegspect(&["catalog", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("duplicate"), "{}", stderr(&out));
}

#[test]
fn nested_paths_are_relative() {
    let dir = tempfile::tempdir().unwrap();
    three_files(&dir.path().join("chb01"));
    let out_file = dir.path().join("elsewhere.json");
    let out = eegspect(&["catalog", dir.path().to_str().unwrap(), "--out", out_file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let catalog = RecordCatalog::load(&out_file).unwrap();
    assert_eq!(catalog.entries[0].path, "chb01/synth_01.edf");
}
