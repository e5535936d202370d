//! Binary schwa classifiers over sparse binary feature vectors.
//!
//! All three learners predict the probability that a schwa is *retained*.
//! Labels follow the same convention: `true` means retained.

pub mod dump;
pub mod gbdt;
pub mod io;
pub mod logistic;
pub mod mlp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;
pub use gbdt::{train_gbdt, GbdtHyper, GbdtModel, Node, Tree};
pub use io::{load_model, save_model, SavedModel};
pub use logistic::{train_logistic, LogisticHyper, LogisticModel};
pub use mlp::{train_mlp, MlpHyper, MlpModel};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{rows} rows but {labels} labels")]
    LabelCount { rows: usize, labels: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("invalid hyperparameter: {0}")]
    InvalidHyper(String),
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("model file version {found} is not supported (this build reads version {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("model file checksum mismatch (file truncated or modified)")]
    ChecksumMismatch,
    #[error("malformed model file: {0}")]
    Format(String),
    #[error("feature name table has {found} names, model dimension is {expected}")]
    NameTableMismatch { expected: usize, found: usize },
}

/// Feature vectors with retained/deleted labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dimension: usize,
    rows: Vec<FeatureVector>,
    labels: Vec<bool>,
}

impl Dataset {
    pub fn new(dimension: usize, rows: Vec<FeatureVector>, labels: Vec<bool>) -> Result<Self, ModelError> {
        if rows.len() != labels.len() {
            return Err(ModelError::LabelCount { rows: rows.len(), labels: labels.len() });
        }
        if let Some(bad) = rows.iter().find(|r| r.dimension() != dimension) {
            return Err(ModelError::DimensionMismatch { expected: dimension, found: bad.dimension() });
        }
        Ok(Dataset { dimension, rows, labels })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[FeatureVector] {
        &self.rows
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn retention_rate(&self) -> Option<f64> {
        (!self.is_empty()).then(|| self.labels.iter().filter(|&&l| l).count() as f64 / self.len() as f64)
    }

    fn check_dimension(&self, expected: usize) -> Result<(), ModelError> {
        if self.dimension != expected {
            return Err(ModelError::DimensionMismatch { expected, found: self.dimension });
        }
        Ok(())
    }
}

/// Training trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Training loss before the first update.
    pub initial_loss: f64,
    /// Training loss after each epoch or boosting round.
    pub losses: Vec<f64>,
    pub dev_losses: Vec<f64>,
    pub dev_accuracy: Option<f64>,
    pub seed: u64,
    pub wall_time_secs: f64,
}

/// Any of the three trained classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Logistic(LogisticModel),
    Mlp(MlpModel),
    Gbdt(GbdtModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Logistic(_) => "logistic",
            Model::Mlp(_) => "mlp",
            Model::Gbdt(_) => "gbdt",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Model::Logistic(m) => m.dimension(),
            Model::Mlp(m) => m.dimension(),
            Model::Gbdt(m) => m.dimension(),
        }
    }

    /// Probability that the schwa is retained.
    pub fn predict_proba(&self, x: &FeatureVector) -> Result<f64, ModelError> {
        if x.dimension() != self.dimension() {
            return Err(ModelError::DimensionMismatch { expected: self.dimension(), found: x.dimension() });
        }
        Ok(match self {
            Model::Logistic(m) => m.predict_proba(x),
            Model::Mlp(m) => m.predict_proba(x),
            Model::Gbdt(m) => m.predict_proba(x),
        })
    }

    /// Retained iff the probability is at least one half.
    pub fn predict(&self, x: &FeatureVector) -> Result<bool, ModelError> {
        self.predict_proba(x).map(decide)
    }
}

/// The decision rule shared by every classifier; a tie keeps the schwa.
pub fn decide(p_retained: f64) -> bool {
    p_retained >= 0.5
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Logistic loss of margin `z` for label `y`, computed without overflow.
pub fn log_loss(z: f64, y: bool) -> f64 {
    let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
    if y {
        softplus - z
    } else {
        softplus
    }
}

/// Fraction of rows where `predict` agrees with the label.
pub fn accuracy(model: &Model, data: &Dataset) -> Result<f64, ModelError> {
    let mut correct = 0usize;
    for (x, &y) in data.rows().iter().zip(data.labels()) {
        if model.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len().max(1) as f64)
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn random_dataset(seed: u64, n: usize, dimension: usize, density: f64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<FeatureVector> = (0..n)
            .map(|_| {
                let active = (0..dimension as u32).filter(|_| rng.gen_bool(density)).collect();
                FeatureVector::new(active, dimension).unwrap()
            })
            .collect();
        let labels = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        Dataset::new(dimension, rows, labels).unwrap()
    }

    pub fn vector(active: &[u32], dimension: usize) -> FeatureVector {
        FeatureVector::new(active.to_vec(), dimension).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(800.0) - 1.0).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(-800.0) < 1e-300);
        assert!(log_loss(-800.0, true).is_finite());
        assert!((log_loss(0.0, false) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((log_loss(2.0, true) - (-(sigmoid(2.0)).ln())).abs() < 1e-12);
    }

    #[test]
    fn tie_goes_to_retained() {
        assert!(decide(0.5));
        assert!(!decide(0.4999999));
    }

    #[test]
    fn dataset_validation() {
        let v = testutil::vector(&[1], 3);
        assert!(matches!(
            Dataset::new(4, vec![v.clone()], vec![true]),
            Err(ModelError::DimensionMismatch { expected: 4, found: 3 })
        ));
        assert!(matches!(Dataset::new(3, vec![v], vec![]), Err(ModelError::LabelCount { .. })));
    }
}
