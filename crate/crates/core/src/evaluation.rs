//! Confusion-matrix rates, ROC curves and ranking tables.
//!
//! The positive class is [`Label::Seizure`]. Rates whose denominator is zero
//! are reported as `None` rather than 0 so that fold averages are not skewed.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::windowing::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }
}

pub fn confusion(labels: &[Label], predictions: &[Label]) -> Result<ConfusionMatrix> {
    if labels.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            found: predictions.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut m = ConfusionMatrix::default();
    for (&truth, &pred) in labels.iter().zip(predictions) {
        match (truth.is_seizure(), pred.is_seizure()) {
            (true, true) => m.tp += 1,
            (false, false) => m.tn += 1,
            (false, true) => m.fp += 1,
            (true, false) => m.fn_ += 1,
        }
    }
    Ok(m)
}

/// [`confusion`] over raw 0/1 codes.
pub fn confusion_from_codes(labels: &[u8], predictions: &[u8]) -> Result<ConfusionMatrix> {
    let decode = |xs: &[u8]| xs.iter().map(|&v| Label::from_u8(v)).collect::<Result<Vec<_>>>();
    confusion(&decode(labels)?, &decode(predictions)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Accuracy,
    Precision,
    Sensitivity,
    Specificity,
    F1,
    Auc,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Accuracy,
        Metric::Precision,
        Metric::Sensitivity,
        Metric::Specificity,
        Metric::F1,
        Metric::Auc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Precision => "precision",
            Metric::Sensitivity => "sensitivity",
            Metric::Specificity => "specificity",
            Metric::F1 => "f1",
            Metric::Auc => "auc",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_lowercase();
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == key)
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub f1: Option<f64>,
}

impl MetricsReport {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Accuracy => self.accuracy,
            Metric::Precision => self.precision,
            Metric::Sensitivity => self.sensitivity,
            Metric::Specificity => self.specificity,
            Metric::F1 => self.f1,
            Metric::Auc => None,
        }
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(m: &ConfusionMatrix) -> MetricsReport {
    let accuracy = ratio(m.tp + m.tn, m.total());
    let precision = ratio(m.tp, m.tp + m.fp);
    let sensitivity = ratio(m.tp, m.tp + m.fn_);
    let specificity = ratio(m.tn, m.tn + m.fp);
    let f1 = match (precision, sensitivity) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    MetricsReport {
        accuracy,
        precision,
        sensitivity,
        specificity,
        f1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores `>= threshold` are called positive; the first point uses `+inf`.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// ROC over every distinct score, descending, plus the `+inf` sentinel.
///
/// Area is accumulated in integer units of `1 / (2 P N)`, so it equals the
/// Mann-Whitney probability `P(s+ > s-) + P(s+ = s-)/2` exactly.
pub fn roc(scores: &[f64], labels: &[Label]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: scores.len(),
            found: labels.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite);
    }
    let pos = labels.iter().filter(|l| l.is_seizure()).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = Vec::with_capacity(scores.len() + 1);
    points.push(RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    });
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut twice_area: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        let (tp_prev, fp_prev) = (tp, fp);
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]].is_seizure() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        twice_area += (fp - fp_prev) as u128 * (tp + tp_prev) as u128;
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold,
        });
    }
    let auc = twice_area as f64 / (2 * pos as u128 * neg as u128) as f64;
    Ok(RocCurve { points, auc })
}

/// Mean and sample standard deviation over the defined values.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

pub fn summarize<I: IntoIterator<Item = Option<f64>>>(values: I) -> Option<Summary> {
    let defined: Vec<f64> = values.into_iter().flatten().collect();
    if defined.is_empty() {
        return None;
    }
    let n = defined.len();
    let mean = defined.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        let ss: f64 = defined.iter().map(|v| (v - mean) * (v - mean)).sum();
        libm::sqrt(ss / (n - 1) as f64)
    } else {
        0.0
    };
    Some(Summary { mean, std, n })
}

/// One model's per-fold reports and, optionally, its pooled AUC.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelScores {
    pub name: String,
    pub folds: Vec<MetricsReport>,
    pub auc: Option<f64>,
}

impl ModelScores {
    pub fn mean(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Auc => self.auc,
            m => summarize(self.folds.iter().map(|r| r.get(m))).map(|s| s.mean),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedRow {
    pub rank: usize,
    pub name: String,
    pub value: Option<f64>,
}

/// Sorts descending by the metric's mean; ties go to the lexicographically
/// smaller name and undefined values sink to the bottom.
pub fn rank_models(entries: &[ModelScores], metric: &str) -> Result<Vec<RankedRow>> {
    let metric: Metric = metric.parse()?;
    if entries.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rows: Vec<(String, Option<f64>)> =
        entries.iter().map(|e| (e.name.clone(), e.mean(metric))).collect();
    rows.sort_by(|a, b| {
        let by_value = match (a.1, b.1) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        };
        by_value.then_with(|| a.0.cmp(&b.0))
    });
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(i, (name, value))| RankedRow {
            rank: i + 1,
            name,
            value,
        })
        .collect())
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tp={} tn={} fp={} fn={}", self.tp, self.tn, self.fp, self.fn_)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use Label::{Nonseizure as N, Seizure as S};

    #[test]
    fn confusion_basics() {
        let all_pos = vec![S; 7];
        assert_eq!(
            confusion(&all_pos, &all_pos).unwrap(),
            ConfusionMatrix { tp: 7, tn: 0, fp: 0, fn_: 0 }
        );
        let labels = [S, N, S, N];
        let flipped: Vec<Label> = labels.iter().map(|l| l.flipped()).collect();
        let m = confusion(&labels, &flipped).unwrap();
        assert_eq!((m.tp, m.tn), (0, 0));
        assert!(confusion(&labels, &flipped[..3]).is_err());
        assert_eq!(confusion_from_codes(&[0, 2], &[0, 1]).unwrap_err(), Error::NonBinary(2));
    }

    #[test]
    fn worked_example() {
        let r = metrics(&ConfusionMatrix { tp: 3, tn: 4, fp: 1, fn_: 2 });
        assert!((r.accuracy.unwrap() - 0.7).abs() < 1e-12);
        assert!((r.precision.unwrap() - 0.75).abs() < 1e-12);
        assert!((r.sensitivity.unwrap() - 0.6).abs() < 1e-12);
        assert!((r.specificity.unwrap() - 0.8).abs() < 1e-12);
        assert!((r.f1.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_degenerate() {
        let r = metrics(&ConfusionMatrix { tp: 5, tn: 9, fp: 0, fn_: 0 });
        for m in [r.accuracy, r.precision, r.sensitivity, r.specificity, r.f1] {
            assert_eq!(m, Some(1.0));
        }
        let r = metrics(&ConfusionMatrix { tp: 0, tn: 4, fp: 0, fn_: 3 });
        assert_eq!(r.precision, None);
        assert_eq!(r.specificity, Some(1.0));
        assert_eq!(r.f1, None);
    }

    #[test]
    fn roc_edges() {
        let labels = [N, N, S, S];
        let sep = roc(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap();
        assert_eq!(sep.auc, 1.0);
        let first = sep.points[0];
        let last = sep.points[sep.points.len() - 1];
        assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        let tied = roc(&[0.5; 4], &labels).unwrap();
        assert_eq!(tied.auc, 0.5);
        assert_eq!(tied.points.len(), 2);
        assert_eq!(roc(&[0.5; 2], &[S, S]).unwrap_err(), Error::SingleClass);
    }

    #[test]
    fn ranking_rules() {
        let entry = |name: &str, acc: Option<f64>| ModelScores {
            name: name.into(),
            folds: vec![MetricsReport {
                accuracy: acc,
                ..Default::default()
            }],
            auc: None,
        };
        let table = [
            entry("b", Some(0.8)),
            entry("z", None),
            entry("c", Some(0.9)),
            entry("a", Some(0.8)),
        ];
        let ranked = rank_models(&table, "accuracy").unwrap();
        let names: Vec<&str> = ranked.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, vec!["c", "a", "b", "z"]);
        assert_eq!(ranked[3].rank, 4);
        assert!(matches!(rank_models(&table, "mcc"), Err(Error::UnknownMetric(_))));
    }

    #[test]
    fn summary_uses_sample_std() {
        let s = summarize([Some(1.0), None, Some(3.0)]).unwrap();
        assert_eq!(s.n, 2);
        assert_eq!(s.mean, 2.0);
        assert!((s.std - libm::sqrt(2.0)).abs() < 1e-15);
        assert!(summarize([None]).is_none());
    }
}
