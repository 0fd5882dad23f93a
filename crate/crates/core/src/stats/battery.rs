//! Grouped comparisons over a per-fold accuracy table keyed by architecture,
//! representation and window length.
//!
//! - window groups (architecture and representation fixed): Kruskal-Wallis + Dunn
//! - representation groups (architecture and window fixed): Kruskal-Wallis + Dunn
//! - architecture groups (representation and window fixed): Friedman + Nemenyi,
//!   with folds as blocks

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{dunn, friedman, kruskal_wallis, nemenyi, Adjustment, PairwiseMatrix, TestResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub architecture: String,
    pub representation: String,
    pub window_s: u32,
}

/// Per-fold accuracies for each (architecture, representation, window) cell.
pub type AccuracyTable = BTreeMap<CellKey, Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Grouping {
    Window,
    Representation,
    Architecture,
}

impl Grouping {
    pub fn as_str(self) -> &'static str {
        match self {
            Grouping::Window => "window",
            Grouping::Representation => "representation",
            Grouping::Architecture => "architecture",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryEntry {
    /// `kruskal-wallis` or `friedman`.
    pub test: &'static str,
    pub grouping: Grouping,
    /// Description of the held-fixed factors, e.g. `logreg / multitaper-psd`.
    pub fixed: String,
    pub result: TestResult,
    pub pairwise: PairwiseMatrix,
    /// Per pair `(a, b, p_adj, significant)`.
    pub significant_pairs: Vec<(String, String, f64, bool)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryReport {
    pub alpha: f64,
    pub entries: Vec<BatteryEntry>,
}

impl BatteryReport {
    pub fn count(&self, grouping: Grouping) -> usize {
        self.entries.iter().filter(|e| e.grouping == grouping).count()
    }
}

fn window_name(w: u32) -> String {
    format!("{w}s")
}

fn entry(
    test: &'static str,
    grouping: Grouping,
    fixed: String,
    result: TestResult,
    pairwise: PairwiseMatrix,
    alpha: f64,
) -> BatteryEntry {
    let significant_pairs = pairwise
        .pairs()
        .map(|(i, j, p)| {
            (
                pairwise.names[i].clone(),
                pairwise.names[j].clone(),
                p,
                p < alpha,
            )
        })
        .collect();
    BatteryEntry {
        test,
        grouping,
        fixed,
        result,
        pairwise,
        significant_pairs,
    }
}

/// Runs every grouped test the table supports. A grouping whose varying
/// factor has a single level is skipped. Every combination of the observed
/// factor levels must be present.
pub fn run_battery(table: &AccuracyTable, adjustment: Adjustment, alpha: f64) -> Result<BatteryReport> {
    if table.is_empty() {
        return Err(Error::EmptyInput);
    }
    let archs: BTreeSet<&str> = table.keys().map(|k| k.architecture.as_str()).collect();
    let reprs: BTreeSet<&str> = table.keys().map(|k| k.representation.as_str()).collect();
    let windows: BTreeSet<u32> = table.keys().map(|k| k.window_s).collect();

    let cell = |a: &str, r: &str, w: u32| -> Result<&Vec<f64>> {
        table
            .get(&CellKey {
                architecture: a.into(),
                representation: r.into(),
                window_s: w,
            })
            .ok_or_else(|| Error::Insufficient(format!("accuracy table lacks cell {a} / {r} / {w}s")))
    };

    let mut entries = Vec::new();

    if windows.len() >= 2 {
        for &a in &archs {
            for &r in &reprs {
                let groups = windows.iter().map(|&w| cell(a, r, w).cloned()).collect::<Result<Vec<_>>>()?;
                let names = windows.iter().map(|&w| window_name(w)).collect();
                let result = kruskal_wallis(&groups)?;
                let pairwise = dunn(&groups, adjustment)?.with_names(names)?;
                entries.push(entry("kruskal-wallis", Grouping::Window, format!("{a} / {r}"), result, pairwise, alpha));
            }
        }
    }

    if reprs.len() >= 2 {
        for &a in &archs {
            for &w in &windows {
                let groups = reprs.iter().map(|&r| cell(a, r, w).cloned()).collect::<Result<Vec<_>>>()?;
                let names = reprs.iter().map(|r| String::from(*r)).collect();
                let result = kruskal_wallis(&groups)?;
                let pairwise = dunn(&groups, adjustment)?.with_names(names)?;
                entries.push(entry(
                    "kruskal-wallis",
                    Grouping::Representation,
                    format!("{a} / {}", window_name(w)),
                    result,
                    pairwise,
                    alpha,
                ));
            }
        }
    }

    if archs.len() >= 2 {
        for &r in &reprs {
            for &w in &windows {
                let columns = archs.iter().map(|&a| cell(a, r, w)).collect::<Result<Vec<_>>>()?;
                let folds = columns[0].len();
                if columns.iter().any(|c| c.len() != folds) {
                    return Err(Error::Insufficient(format!(
                        "architectures have unequal fold counts for {r} / {}",
                        window_name(w)
                    )));
                }
                let blocks: Vec<Vec<f64>> = (0..folds).map(|f| columns.iter().map(|c| c[f]).collect()).collect();
                let names = archs.iter().map(|a| String::from(*a)).collect();
                let result = friedman(&blocks)?;
                let pairwise = nemenyi(&blocks)?.with_names(names)?;
                entries.push(entry(
                    "friedman",
                    Grouping::Architecture,
                    format!("{r} / {}", window_name(w)),
                    result,
                    pairwise,
                    alpha,
                ));
            }
        }
    }

    Ok(BatteryReport { alpha, entries })
}
