use eegspect_core::classifier::{loss_and_gradient, predict_proba, train, LinearModel, TrainConfig};
use eegspect_core::windowing::Label;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<Label>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let positive = i % 2 == 0;
        let shift = if positive { 0.3 } else { -0.3 };
        rows.push((0..d).map(|_| rng.random::<f64>() + shift).collect());
        labels.push(if positive { Label::Seizure } else { Label::Nonseizure });
    }
    (rows, labels)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>(), d in 1usize..6) {
        let (rows, labels) = fixture(seed, 8, d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let b = rng.random::<f64>() - 0.5;
        let (_, grad, grad_b) = loss_and_gradient(&w, b, &rows, &labels);
        let h = 1e-6;
        for j in 0..=d {
            let bump = |delta: f64| {
                let mut w2 = w.clone();
                let mut b2 = b;
                if j < d { w2[j] += delta } else { b2 += delta }
                loss_and_gradient(&w2, b2, &rows, &labels).0
            };
            let numeric = (bump(h) - bump(-h)) / (2.0 * h);
            let analytic = if j < d { grad[j] } else { grad_b };
            prop_assert!((numeric - analytic).abs() <= 1e-5 * analytic.abs().max(1e-3), "{j}: {numeric} vs {analytic}");
        }
    }

    #[test]
    fn probabilities_in_open_interval(w in prop::collection::vec(-2.0f64..2.0, 4), x in prop::collection::vec(-2.0f64..2.0, 4), b in -2.0f64..2.0) {
        let mut model = LinearModel::zeros(4, TrainConfig::default());
        model.weights = w.clone();
        model.bias = b;
        let p = predict_proba(&model, &x).unwrap();
        let z: f64 = w.iter().zip(&x).map(|(a, c)| a * c).sum::<f64>() + b;
        prop_assert!(p > 0.0 && p < 1.0);
        prop_assert!((p - 1.0 / (1.0 + (-z).exp())).abs() < 1e-15);
    }
}

#[test]
fn small_learning_rate_loss_is_monotone() {
    let (rows, labels) = fixture(5, 64, 6);
    let cfg = TrainConfig {
        learning_rate: 1e-3,
        epochs: 50,
        batch_size: 8,
        seed: 3,
    };
    let model = train(&rows, &labels, cfg).unwrap();
    for pair in model.loss_history.windows(2) {
        assert!(pair[1] <= pair[0], "{:?}", model.loss_history);
    }
}

#[test]
fn label_flip_symmetry() {
    let (rows, labels) = fixture(9, 40, 3);
    let flipped: Vec<Label> = labels.iter().map(|l| l.flipped()).collect();
    let cfg = TrainConfig {
        learning_rate: 0.5,
        epochs: 20,
        batch_size: 4,
        seed: 1,
    };
    let a = train(&rows, &labels, cfg).unwrap();
    let b = train(&rows, &flipped, cfg).unwrap();
    for x in &rows {
        let (p, q) = (a.predict_proba(x).unwrap(), b.predict_proba(x).unwrap());
        assert!((p + q - 1.0).abs() < 1e-6);
    }
}

#[test]
fn training_is_deterministic() {
    let (rows, labels) = fixture(2, 30, 4);
    let cfg = TrainConfig::default();
    assert_eq!(train(&rows, &labels, cfg).unwrap(), train(&rows, &labels, cfg).unwrap());
}
