//! Logistic-regression baseline trained by mini-batch gradient descent on
//! flattened feature tensors.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::windowing::Label;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 30,
            batch_size: 32,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: TrainConfig,
    /// Mean cross-entropy on the training set after each epoch.
    pub loss_history: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(n_features: usize, config: TrainConfig) -> Self {
        Self {
            weights: vec![0.0; n_features],
            bias: 0.0,
            config,
            loss_history: Vec::new(),
        }
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.loss_history.last().copied()
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        predict_proba(self, x)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `-[y ln p + (1 - y) ln(1 - p)]` with `p = sigmoid(z)`, evaluated without
/// forming `p`.
fn cross_entropy(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + libm::log1p(libm::exp(-z.abs()))
}

fn logit(weights: &[f64], bias: f64, x: &[f64]) -> f64 {
    weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias
}

fn target(label: Label) -> f64 {
    if label.is_seizure() {
        1.0
    } else {
        0.0
    }
}

/// Mean cross-entropy over `rows` and its gradient with respect to the weights
/// and the bias.
pub fn loss_and_gradient<X: AsRef<[f64]>>(
    weights: &[f64],
    bias: f64,
    rows: &[X],
    labels: &[Label],
) -> (f64, Vec<f64>, f64) {
    let mut grad = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    let mut loss = 0.0;
    let n = rows.len().max(1) as f64;
    for (x, &label) in rows.iter().zip(labels) {
        let x = x.as_ref();
        let z = logit(weights, bias, x);
        let y = target(label);
        loss += cross_entropy(z, y);
        let r = sigmoid(z) - y;
        for (g, v) in grad.iter_mut().zip(x) {
            *g += r * v;
        }
        grad_b += r;
    }
    for g in grad.iter_mut() {
        *g /= n;
    }
    (loss / n, grad, grad_b / n)
}

fn mean_loss<X: AsRef<[f64]>>(model: &LinearModel, rows: &[X], labels: &[Label]) -> f64 {
    rows.iter()
        .zip(labels)
        .map(|(x, &l)| cross_entropy(logit(&model.weights, model.bias, x.as_ref()), target(l)))
        .sum::<f64>()
        / rows.len() as f64
}

/// Fits a zero-initialised model. Each epoch visits the samples in a fresh
/// permutation drawn from a ChaCha stream seeded with `config.seed`.
pub fn train<X: AsRef<[f64]>>(rows: &[X], labels: &[Label], config: TrainConfig) -> Result<LinearModel> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: rows.len(),
            found: labels.len(),
        });
    }
    let n_features = rows.first().ok_or(Error::EmptyInput)?.as_ref().len();
    if rows.iter().any(|r| r.as_ref().len() != n_features) {
        return Err(Error::ShapeMismatch("training rows differ in length".into()));
    }
    if rows.iter().any(|r| r.as_ref().iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite);
    }
    let positives = labels.iter().filter(|l| l.is_seizure()).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::SingleClass);
    }
    if config.batch_size == 0 || !(config.learning_rate > 0.0) || !config.learning_rate.is_finite() {
        return Err(invalid("batch size and learning rate must be positive"));
    }

    let mut model = LinearModel::zeros(n_features, config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut grad = vec![0.0; n_features];
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_b = 0.0;
            for &i in batch {
                let x = rows[i].as_ref();
                let r = sigmoid(logit(&model.weights, model.bias, x)) - target(labels[i]);
                for (g, v) in grad.iter_mut().zip(x) {
                    *g += r * v;
                }
                grad_b += r;
            }
            let step = config.learning_rate / batch.len() as f64;
            for (w, g) in model.weights.iter_mut().zip(&grad) {
                *w -= step * g;
            }
            model.bias -= step * grad_b;
        }
        model.loss_history.push(mean_loss(&model, rows, labels));
    }
    if model.weights.iter().any(|w| !w.is_finite()) || !model.bias.is_finite() {
        return Err(invalid("training diverged; lower the learning rate"));
    }
    Ok(model)
}

/// `sigmoid(w . x + b)`.
pub fn predict_proba(model: &LinearModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.weights.len() {
        return Err(Error::LengthMismatch {
            expected: model.weights.len(),
            found: x.len(),
        });
    }
    Ok(sigmoid(logit(&model.weights, model.bias, x)))
}
