#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use eegspect::catalog::build_catalog;
use eegspect::synth::{write_corpus, SynthConfig};

pub fn eegspect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eegspect"))
        .args(args)
        .env_remove("EEGSPECT_JOBS")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Two short recordings with one 30 s seizure each.
pub fn small_synth(seed: u64) -> SynthConfig {
    SynthConfig {
        seed,
        duration_s: 200,
        seizures: vec![vec![30], vec![30]],
        min_gap_s: 60,
        ..SynthConfig::default()
    }
}

/// Writes a corpus and its catalog.json into `dir`.
pub fn corpus_with_catalog(cfg: &SynthConfig, dir: &Path) {
    write_corpus(cfg, dir).unwrap();
    let report = build_catalog(dir).unwrap();
    assert!(!report.is_partial(), "{:?}", report.skipped);
    report.catalog.save(&dir.join("catalog.json")).unwrap();
}
