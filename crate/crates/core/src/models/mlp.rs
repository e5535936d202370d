//! One-hidden-layer perceptron: rectifier hidden units, sigmoid output,
//! logistic loss, trained with Adam on seeded mini-batches.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{decide, log_loss, sigmoid, Dataset, ModelError, TrainReport};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpHyper {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    /// Epochs without dev-loss improvement before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for MlpHyper {
    fn default() -> Self {
        MlpHyper { hidden: 250, learning_rate: 1e-4, epochs: 100, batch_size: 32, l2: 1e-4, patience: 10, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub dimension: usize,
    pub hidden: usize,
    /// Row-major `dimension × hidden`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

/// Gradient with the same shape as the model's parameters.
pub type MlpGradient = MlpModel;

impl MlpModel {
    /// Glorot-uniform initialization, biases included.
    pub fn init(dimension: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b1_bound = (6.0 / (dimension + hidden) as f64).sqrt();
        let b2_bound = (6.0 / (hidden + 1) as f64).sqrt();
        let mut draw = |n: usize, bound: f64| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-bound..bound)).collect() };
        let w1 = draw(dimension * hidden, b1_bound);
        let b1 = draw(hidden, b1_bound);
        let w2 = draw(hidden, b2_bound);
        let b2 = draw(1, b2_bound)[0];
        MlpModel { dimension, hidden, w1, b1, w2, b2 }
    }

    fn zeros_like(&self) -> MlpGradient {
        MlpModel {
            dimension: self.dimension,
            hidden: self.hidden,
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.hidden],
            w2: vec![0.0; self.hidden],
            b2: 0.0,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    fn hidden_pre(&self, x: &FeatureVector) -> Vec<f64> {
        let mut z = self.b1.clone();
        for &i in x.active() {
            let row = &self.w1[i as usize * self.hidden..(i as usize + 1) * self.hidden];
            for (zh, w) in z.iter_mut().zip(row) {
                *zh += w;
            }
        }
        z
    }

    pub fn margin(&self, x: &FeatureVector) -> f64 {
        let z = self.hidden_pre(x);
        self.b2 + z.iter().zip(&self.w2).map(|(z, w)| z.max(0.0) * w).sum::<f64>()
    }

    pub fn predict_proba(&self, x: &FeatureVector) -> f64 {
        sigmoid(self.margin(x))
    }

    fn weight_norm_sq(&self) -> f64 {
        self.w1.iter().chain(&self.w2).map(|w| w * w).sum()
    }

    /// Mean logistic loss over `rows` plus `l2/2 · (‖W1‖² + ‖w2‖²)`.
    pub fn objective(&self, data: &Dataset, rows: &[usize], l2: f64) -> f64 {
        let n = rows.len().max(1) as f64;
        let loss: f64 = rows.iter().map(|&r| log_loss(self.margin(&data.rows()[r]), data.labels()[r])).sum();
        loss / n + 0.5 * l2 * self.weight_norm_sq()
    }

    /// Backpropagated gradient of [`MlpModel::objective`].
    pub fn gradient(&self, data: &Dataset, rows: &[usize], l2: f64) -> MlpGradient {
        let mut g = self.zeros_like();
        self.accumulate_gradient(data, rows, l2, &mut g);
        g
    }

    fn accumulate_gradient(&self, data: &Dataset, rows: &[usize], l2: f64, g: &mut MlpGradient) {
        let n = rows.len().max(1) as f64;
        let h = self.hidden;
        let mut dz1 = vec![0.0; h];
        for &r in rows {
            let x = &data.rows()[r];
            let y = if data.labels()[r] { 1.0 } else { 0.0 };
            let z1 = self.hidden_pre(x);
            let out = self.b2 + z1.iter().zip(&self.w2).map(|(z, w)| z.max(0.0) * w).sum::<f64>();
            let dz2 = (sigmoid(out) - y) / n;
            g.b2 += dz2;
            for k in 0..h {
                let a = z1[k].max(0.0);
                g.w2[k] += dz2 * a;
                dz1[k] = if z1[k] > 0.0 { dz2 * self.w2[k] } else { 0.0 };
                g.b1[k] += dz1[k];
            }
            for &i in x.active() {
                let row = &mut g.w1[i as usize * h..(i as usize + 1) * h];
                for (gw, d) in row.iter_mut().zip(&dz1) {
                    *gw += d;
                }
            }
        }
        for (gw, w) in g.w1.iter_mut().zip(&self.w1) {
            *gw += l2 * w;
        }
        for (gw, w) in g.w2.iter_mut().zip(&self.w2) {
            *gw += l2 * w;
        }
    }

    /// All parameters in the order `w1, b1, w2, b2`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.w1.len() + 2 * self.hidden + 1);
        p.extend(&self.w1);
        p.extend(&self.b1);
        p.extend(&self.w2);
        p.push(self.b2);
        p
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w1.iter_mut().chain(self.b1.iter_mut()).chain(self.w2.iter_mut()).chain(std::iter::once(&mut self.b2))
    }

    fn is_finite(&self) -> bool {
        self.params().iter().all(|p| p.is_finite())
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Adam { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, model: &mut MlpModel, grad: &MlpGradient, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        let grads = grad.w1.iter().chain(&grad.b1).chain(&grad.w2).chain(std::iter::once(&grad.b2));
        for (((p, g), m), v) in model.params_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

fn check_hyper(h: &MlpHyper) -> Result<(), ModelError> {
    if h.hidden == 0 || h.batch_size == 0 {
        return Err(ModelError::InvalidHyper("hidden size and batch size must be positive".into()));
    }
    if !(h.learning_rate.is_finite() && h.learning_rate > 0.0) {
        return Err(ModelError::InvalidHyper(format!("learning rate {}", h.learning_rate)));
    }
    if !(h.l2.is_finite() && h.l2 >= 0.0) {
        return Err(ModelError::InvalidHyper(format!("l2 {}", h.l2)));
    }
    Ok(())
}

/// Trains with Adam. With a dev set, stops after `patience` epochs without
/// dev-loss improvement and returns the best-dev-loss parameters.
pub fn train_mlp(train: &Dataset, dev: Option<&Dataset>, hyper: &MlpHyper) -> Result<(MlpModel, TrainReport), ModelError> {
    check_hyper(hyper)?;
    if train.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    if let Some(dev) = dev {
        dev.check_dimension(train.dimension())?;
    }
    let dev = dev.filter(|d| !d.is_empty());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut model = MlpModel::init(train.dimension(), hyper.hidden, rng.gen());
    let all: Vec<usize> = (0..train.len()).collect();
    let dev_all: Vec<usize> = dev.map(|d| (0..d.len()).collect()).unwrap_or_default();
    let initial_loss = model.objective(train, &all, hyper.l2);
    let mut adam = Adam::new(model.params().len());
    let mut grad = model.zeros_like();
    let mut order = all.clone();
    let mut losses = Vec::new();
    let mut dev_losses = Vec::new();
    let mut best: Option<(f64, MlpModel)> = None;
    let mut since_best = 0;

    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(hyper.batch_size) {
            grad.w1.iter_mut().for_each(|g| *g = 0.0);
            grad.b1.iter_mut().for_each(|g| *g = 0.0);
            grad.w2.iter_mut().for_each(|g| *g = 0.0);
            grad.b2 = 0.0;
            model.accumulate_gradient(train, batch, hyper.l2, &mut grad);
            adam.step(&mut model, &grad, hyper.learning_rate);
        }
        let loss = model.objective(train, &all, hyper.l2);
        if !loss.is_finite() || !model.is_finite() {
            return Err(ModelError::Diverged { epoch, loss });
        }
        losses.push(loss);
        if let Some(dev) = dev {
            let dev_loss = model.objective(dev, &dev_all, 0.0);
            dev_losses.push(dev_loss);
            if best.as_ref().is_none_or(|(b, _)| dev_loss < *b) {
                best = Some((dev_loss, model.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= hyper.patience {
                    break;
                }
            }
        }
    }
    if let Some((_, m)) = best {
        model = m;
    }
    let dev_accuracy = dev.map(|d| {
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
