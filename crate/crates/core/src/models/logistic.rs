use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{decide, log_loss, sigmoid, Dataset, ModelError, TrainReport};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Weight on `½‖w‖²`; the bias is not penalized.
    pub l2: f64,
    pub seed: u64,
}

impl Default for LogisticHyper {
    fn default() -> Self {
        LogisticHyper { learning_rate: 1.0, epochs: 500, l2: 1e-5, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticModel {
    pub fn zeros(dimension: usize) -> Self {
        LogisticModel { weights: vec![0.0; dimension], bias: 0.0 }
    }

    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    pub fn margin(&self, x: &FeatureVector) -> f64 {
        self.bias + x.active().iter().map(|&i| self.weights[i as usize]).sum::<f64>()
    }

    pub fn predict_proba(&self, x: &FeatureVector) -> f64 {
        sigmoid(self.margin(x))
    }

    /// Mean logistic loss plus `l2/2 · ‖w‖²`.
    pub fn objective(&self, data: &Dataset, l2: f64) -> f64 {
        let n = data.len().max(1) as f64;
        let loss: f64 = data.rows().iter().zip(data.labels()).map(|(x, &y)| log_loss(self.margin(x), y)).sum();
        loss / n + 0.5 * l2 * self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Gradient of [`LogisticModel::objective`] as `(d/dw, d/db)`.
    pub fn gradient(&self, data: &Dataset, l2: f64) -> (Vec<f64>, f64) {
        let n = data.len().max(1) as f64;
        let mut gw = vec![0.0; self.dimension()];
        let mut gb = 0.0;
        for (x, &y) in data.rows().iter().zip(data.labels()) {
            let r = (sigmoid(self.margin(x)) - if y { 1.0 } else { 0.0 }) / n;
            gb += r;
            for &i in x.active() {
                gw[i as usize] += r;
            }
        }
        for (g, w) in gw.iter_mut().zip(&self.weights) {
            *g += l2 * w;
        }
        (gw, gb)
    }
}

fn check_hyper(h: &LogisticHyper) -> Result<(), ModelError> {
    if !(h.learning_rate.is_finite() && h.learning_rate > 0.0) {
        return Err(ModelError::InvalidHyper(format!("learning rate {}", h.learning_rate)));
    }
    if !(h.l2.is_finite() && h.l2 >= 0.0) {
        return Err(ModelError::InvalidHyper(format!("l2 {}", h.l2)));
    }
    Ok(())
}

/// Full-batch gradient descent from zero weights.
pub fn train_logistic(
    train: &Dataset,
    dev: Option<&Dataset>,
    hyper: &LogisticHyper,
) -> Result<(LogisticModel, TrainReport), ModelError> {
    check_hyper(hyper)?;
    if train.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    if let Some(dev) = dev {
        dev.check_dimension(train.dimension())?;
    }
    let start = Instant::now();
    let mut model = LogisticModel::zeros(train.dimension());
    let initial_loss = model.objective(train, hyper.l2);
    let mut losses = Vec::with_capacity(hyper.epochs);
    let mut dev_losses = Vec::new();
    for epoch in 0..hyper.epochs {
        let (gw, gb) = model.gradient(train, hyper.l2);
        for (w, g) in model.weights.iter_mut().zip(&gw) {
            *w -= hyper.learning_rate * g;
        }
        model.bias -= hyper.learning_rate * gb;
        let loss = model.objective(train, hyper.l2);
        if !loss.is_finite() {
            return Err(ModelError::Diverged { epoch, loss });
        }
        losses.push(loss);
        if let Some(dev) = dev {
            dev_losses.push(model.objective(dev, 0.0));
        }
    }
    let dev_accuracy = dev.filter(|d| !d.is_empty()).map(|d| {
        let correct =
            d.rows().iter().zip(d.labels()).filter(|(x, &y)| decide(model.predict_proba(x)) == y).count();
        correct as f64 / d.len() as f64
    });
    let report = TrainReport {
        initial_loss,
        losses,
        dev_losses,
        dev_accuracy,
        seed: hyper.seed,
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::testutil::{random_dataset, vector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_model_is_one_half() {
        let m = LogisticModel::zeros(5);
        assert_eq!(m.predict_proba(&vector(&[0, 3], 5)), 0.5);
        assert_eq!(m.predict_proba(&vector(&[], 5)), 0.5);
    }

    #[test]
    fn separable_pair() {
        let data = Dataset::new(2, vec![vector(&[0], 2), vector(&[1], 2)], vec![true, false]).unwrap();
        let (m, report) = train_logistic(&data, None, &LogisticHyper { epochs: 100, ..Default::default() }).unwrap();
        assert!(decide(m.predict_proba(&data.rows()[0])));
        assert!(!decide(m.predict_proba(&data.rows()[1])));
        assert!(report.losses.last().unwrap() < &report.initial_loss);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..10 {
            let data = random_dataset(seed, 12, 6, 0.4);
            let mut m = LogisticModel::zeros(6);
            m.weights.iter_mut().for_each(|w| *w = rng.gen_range(-1.0..1.0));
            m.bias = rng.gen_range(-1.0..1.0);
            let l2 = 0.1;
            let (gw, gb) = m.gradient(&data, l2);
            let h = 1e-6;
            let analytic: Vec<f64> = gw.iter().copied().chain([gb]).collect();
            for (i, &analytic) in analytic.iter().enumerate() {
                let bump = |delta: f64| {
                    let mut p = m.clone();
                    if i < 6 {
                        p.weights[i] += delta;
                    } else {
                        p.bias += delta;
                    }
                    p.objective(&data, l2)
                };
                let numeric = (bump(h) - bump(-h)) / (2.0 * h);
                assert!((numeric - analytic).abs() < 1e-6, "param {i}: {numeric} vs {analytic}");
            }
        }
    }

    #[test]
    fn deterministic() {
        let data = random_dataset(3, 40, 8, 0.3);
        let h = LogisticHyper { epochs: 20, ..Default::default() };
        let (a, _) = train_logistic(&data, None, &h).unwrap();
        let (b, _) = train_logistic(&data, None, &h).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        let data = random_dataset(3, 10, 8, 0.3);
        let other = random_dataset(3, 10, 9, 0.3);
        assert!(matches!(
            train_logistic(&data, Some(&other), &LogisticHyper::default()),
            Err(ModelError::DimensionMismatch { .. })
        ));
        let bad = LogisticHyper { learning_rate: -1.0, ..Default::default() };
        assert!(matches!(train_logistic(&data, None, &bad), Err(ModelError::InvalidHyper(_))));
        let huge = LogisticHyper { learning_rate: 1e308, epochs: 5, ..Default::default() };
        assert!(matches!(train_logistic(&data, None, &huge), Err(ModelError::Diverged { .. })));
    }
}
