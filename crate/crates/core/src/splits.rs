//! Reproducible, label-stratified partitioning.
//!
//! Both splitters first shuffle each class independently with a seeded
//! ChaCha stream, then merge the classes into one sequence ordered by each
//! item's relative position within its class, `(i + 0.5) / n_class`. Any
//! contiguous run of that sequence, and any every-`k`-th subsequence, holds
//! each class in proportion to within one item. Holdout partitions are
//! contiguous runs; fold `f` takes positions `f, f + k, f + 2k, ...`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::windowing::Label;

/// Tuning holdout plus the main train/validation/test partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub seed: u64,
    pub tuning_fit: Vec<usize>,
    pub tuning_val: Vec<usize>,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitPlan {
    pub fn partitions(&self) -> [&[usize]; 5] {
        [
            &self.tuning_fit,
            &self.tuning_val,
            &self.train,
            &self.val,
            &self.test,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FoldPlan {
    pub seed: u64,
    /// Test indices of each fold, ascending.
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// Every index outside fold `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(f, _)| *f != fold)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Shuffle each class and merge by relative in-class position.
fn stratified_order(labels: &[Label], seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut keyed: Vec<(f64, Label, usize)> = Vec::with_capacity(labels.len());
    for (label, mut idx) in by_class {
        idx.shuffle(&mut rng);
        let n = idx.len() as f64;
        keyed.extend(
            idx.into_iter()
                .enumerate()
                .map(|(i, item)| ((i as f64 + 0.5) / n, label, item)),
        );
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, _, item)| item).collect()
}

fn round(x: f64) -> usize {
    libm::round(x) as usize
}

/// Sizes `[fit, tuning_val, train, val, test]`: 20% tuning (80/20 inside),
/// then 64/16/20 of the remainder, each set holding at least one item.
fn holdout_sizes(n: usize) -> [usize; 5] {
    let tuning = round(0.2 * n as f64).max(2);
    let fit = round(0.8 * tuning as f64).clamp(1, tuning - 1);
    let rest = n - tuning;
    let val = round(0.16 * rest as f64).max(1);
    let test = round(0.2 * rest as f64).max(1);
    let train = rest - val - test;
    [fit, tuning - fit, train, val, test]
}

pub fn holdout_split(n: usize, labels: &[Label], seed: u64) -> Result<SplitPlan> {
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    if n < 10 {
        return Err(invalid("holdout split needs at least 10 samples"));
    }
    for label in [Label::Nonseizure, Label::Seizure] {
        let count = labels.iter().filter(|&&l| l == label).count();
        if count > 0 && count < 5 {
            return Err(Error::Insufficient(format!(
                "class {} has {count} samples, fewer than the 5 partitions",
                label.as_str()
            )));
        }
    }
    let order = stratified_order(labels, seed);
    let mut parts: Vec<Vec<usize>> = Vec::with_capacity(5);
    let mut at = 0;
    for size in holdout_sizes(n) {
        let mut part = order[at..at + size].to_vec();
        part.sort_unstable();
        parts.push(part);
        at += size;
    }
    let mut parts = parts.into_iter();
    let mut next = || parts.next().unwrap_or_default();
    Ok(SplitPlan {
        seed,
        tuning_fit: next(),
        tuning_val: next(),
        train: next(),
        val: next(),
        test: next(),
    })
}

pub fn kfold(n: usize, labels: &[Label], k: usize, seed: u64) -> Result<FoldPlan> {
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    if k < 2 {
        return Err(invalid("k-fold needs k >= 2"));
    }
    if k > n {
        return Err(invalid(format!("k = {k} exceeds sample count {n}")));
    }
    // deal each shuffled class round-robin, continuing the fold counter
    // across classes, so per-fold class counts differ by at most one
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut folds = alloc::vec![Vec::with_capacity(n / k + 1); k];
    let mut pos = 0;
    for (_, mut idx) in by_class {
        idx.shuffle(&mut rng);
        for item in idx {
            folds[pos % k].push(item);
            pos += 1;
        }
    }
    for f in folds.iter_mut() {
        f.sort_unstable();
    }
    Ok(FoldPlan { seed, folds })
}

/// K-fold over whole groups (for example source recordings) so no group is
/// split between training and test. Groups are shuffled, then each goes to
/// the currently smallest fold.
pub fn group_kfold<G: Ord + Clone>(groups: &[G], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(invalid("k-fold needs k >= 2"));
    }
    let mut members: BTreeMap<G, Vec<usize>> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        members.entry(g.clone()).or_default().push(i);
    }
    if k > members.len() {
        return Err(invalid(format!(
            "k = {k} exceeds the number of groups {}",
            members.len()
        )));
    }
    let mut blocks: Vec<Vec<usize>> = members.into_values().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    blocks.shuffle(&mut rng);
    let mut folds: Vec<Vec<usize>> = alloc::vec![Vec::new(); k];
    for block in blocks {
        let smallest = (0..k).min_by_key(|&f| (folds[f].len(), f)).unwrap_or(0);
        folds[smallest].extend(block);
    }
    for f in folds.iter_mut() {
        f.sort_unstable();
    }
    Ok(FoldPlan { seed, folds })
}
