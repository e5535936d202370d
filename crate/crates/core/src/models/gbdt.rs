//! Second-order gradient boosting of binary-split regression trees on the
//! logistic loss.
//!
//! Features are binary, so each split is "is feature `f` active": inactive
//! rows go left, active rows go right. Splits are chosen by exact greedy
//! search over every feature present in the node, maximizing
//!
//! ```text
//! gain = ½ [G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ
//! ```
//!
//! and leaves hold `−G/(H+λ)` already multiplied by the shrinkage.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{decide, log_loss, sigmoid, Dataset, ModelError, TrainReport};
use crate::features::FeatureVector;

/// Gains at or below this are treated as no improvement.
const MIN_GAIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtHyper {
    pub rounds: usize,
    pub max_depth: usize,
    pub shrinkage: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_hessian: f64,
    pub seed: u64,
    /// Evaluate split candidates on the rayon pool. Produces the same trees.
    pub parallel: bool,
}

impl Default for GbdtHyper {
    fn default() -> Self {
        GbdtHyper {
            rounds: 200,
            max_depth: 11,
            shrinkage: 0.1,
            lambda: 1.0,
            gamma: 0.0,
            min_child_hessian: 1.0,
            seed: 0,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Split { feature: u32, inactive: u32, active: u32 },
    Leaf { value: f64 },
}

/// Nodes in preorder; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree { nodes: vec![Node::Leaf { value }] }
    }

    /// Index of the leaf `x` falls into.
    pub fn leaf_index(&self, x: &FeatureVector) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split { feature, inactive, active } => {
                    i = if x.contains(feature as usize) { active } else { inactive } as usize;
                }
            }
        }
    }

    pub fn predict(&self, x: &FeatureVector) -> f64 {
        match self.nodes[self.leaf_index(x)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }

    /// Depth of the deepest leaf (a lone leaf has depth 0).
    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { inactive, active, .. } => 1 + go(nodes, inactive as usize).max(go(nodes, active as usize)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Checks single-root, acyclic, in-range structure.
    pub fn validate(&self, dimension: usize) -> Result<(), String> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        while let Some(i) = stack.pop() {
            if i >= self.nodes.len() {
                return Err(format!("child index {i} out of range"));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(format!("node {i} reached twice"));
            }
            if let Node::Split { feature, inactive, active } = self.nodes[i] {
                if feature as usize >= dimension {
                    return Err(format!("feature {feature} out of range for dimension {dimension}"));
                }
                stack.push(inactive as usize);
                stack.push(active as usize);
            }
        }
        if let Some(orphan) = seen.iter().position(|s| !s) {
            return Err(format!("node {orphan} is unreachable"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub dimension: usize,
    /// Log-odds of the training retention rate.
    pub base_score: f64,
    pub shrinkage: f64,
    pub max_depth: usize,
    pub trees: Vec<Tree>,
}

impl GbdtModel {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rounds(&self) -> usize {
        self.trees.len()
    }

    pub fn margin(&self, x: &FeatureVector) -> f64 {
        let mut f = self.base_score;
        for t in &self.trees {
            f += t.predict(x);
        }
        f
    }

    pub fn predict_proba(&self, x: &FeatureVector) -> f64 {
        sigmoid(self.margin(x))
    }

    pub fn validate(&self) -> Result<(), String> {
        for (i, t) in self.trees.iter().enumerate() {
            t.validate(self.dimension).map_err(|e| format!("tree {i}: {e}"))?;
            if t.depth() > self.max_depth {
                return Err(format!("tree {i} is deeper than {}", self.max_depth));
            }
        }
        Ok(())
    }
}

/// Log-odds of `rate`, clamped away from 0 and 1.
pub fn base_score_for(rate: f64) -> f64 {
    let r = rate.clamp(1e-6, 1.0 - 1e-6);
    (r / (1.0 - r)).ln()
}

fn check_hyper(h: &GbdtHyper) -> Result<(), ModelError> {
    let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
    if !(h.shrinkage.is_finite() && h.shrinkage > 0.0) {
        return Err(ModelError::InvalidHyper(format!("shrinkage {}", h.shrinkage)));
    }
    if !finite_nonneg(h.lambda) || !finite_nonneg(h.gamma) || !finite_nonneg(h.min_child_hessian) {
        return Err(ModelError::InvalidHyper("lambda, gamma and min_child_hessian must be finite and >= 0".into()));
    }
    Ok(())
}

struct Builder<'a> {
    data: &'a Dataset,
    grad: Vec<f64>,
    hess: Vec<f64>,
    hyper: &'a GbdtHyper,
    /// Per-feature gradient/hessian/count sums, reset after each node.
    hist_g: Vec<f64>,
    hist_h: Vec<f64>,
    hist_n: Vec<u32>,
    touched: Vec<u32>,
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: u32,
}

impl Candidate {
    /// Higher gain wins; equal gains go to the lower feature index.
    fn better(a: Candidate, b: Candidate) -> Candidate {
        if b.gain > a.gain || (b.gain == a.gain && b.feature < a.feature) {
            b
        } else {
            a
        }
    }
}

impl<'a> Builder<'a> {
    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.hyper.lambda)
    }

    fn build(&mut self, rows: Vec<usize>, margins: &mut [f64]) -> Tree {
        let mut nodes = Vec::new();
        self.grow(rows, 0, &mut nodes, margins);
        Tree { nodes }
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize, nodes: &mut Vec<Node>, margins: &mut [f64]) -> u32 {
        let (g, h) = rows.iter().fold((0.0, 0.0), |(g, h), &r| (g + self.grad[r], h + self.hess[r]));
        let id = nodes.len() as u32;
        let split = if depth < self.hyper.max_depth { self.best_split(&rows, g, h) } else { None };
        let Some(feature) = split else {
            let value = -g / (h + self.hyper.lambda) * self.hyper.shrinkage;
            for &r in &rows {
                margins[r] += value;
            }
            nodes.push(Node::Leaf { value });
            return id;
        };
        nodes.push(Node::Split { feature, inactive: 0, active: 0 });
        let (active_rows, inactive_rows): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&r| self.data.rows()[r].contains(feature as usize));
        let inactive = self.grow(inactive_rows, depth + 1, nodes, margins);
        let active = self.grow(active_rows, depth + 1, nodes, margins);
        nodes[id as usize] = Node::Split { feature, inactive, active };
        id
    }

    fn best_split(&mut self, rows: &[usize], g: f64, h: f64) -> Option<u32> {
        for &r in rows {
            for &f in self.data.rows()[r].active() {
                let fi = f as usize;
                if self.hist_n[fi] == 0 {
                    self.touched.push(f);
                }
                self.hist_g[fi] += self.grad[r];
                self.hist_h[fi] += self.hess[r];
                self.hist_n[fi] += 1;
            }
        }
        self.touched.sort_unstable();
        let parent = self.score(g, h);
        let n = rows.len() as u32;
        let min_h = self.hyper.min_child_hessian;
        let gamma = self.hyper.gamma;
        let (hist_g, hist_h, hist_n) = (&self.hist_g, &self.hist_h, &self.hist_n);
        let lambda = self.hyper.lambda;
        let evaluate = |&f: &u32| -> Option<Candidate> {
            let fi = f as usize;
            if hist_n[fi] == n {
                return None;
            }
            let (gr, hr) = (hist_g[fi], hist_h[fi]);
            let (gl, hl) = (g - gr, h - hr);
            if hl < min_h || hr < min_h {
                return None;
            }
            let gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent) - gamma;
            Some(Candidate { gain, feature: f })
        };
        let best = if self.hyper.parallel {
            self.touched.par_iter().filter_map(evaluate).reduce_with(Candidate::better)
        } else {
            self.touched.iter().filter_map(evaluate).reduce(Candidate::better)
        };
        for &f in &self.touched {
            let fi = f as usize;
            self.hist_g[fi] = 0.0;
            self.hist_h[fi] = 0.0;
            self.hist_n[fi] = 0;
        }
        self.touched.clear();
        best.filter(|c| c.gain > MIN_GAIN).map(|c| c.feature)
    }
}

fn mean_log_loss(margins: &[f64], labels: &[bool]) -> f64 {
    margins.iter().zip(labels).map(|(&z, &y)| log_loss(z, y)).sum::<f64>() / margins.len().max(1) as f64
}

/// Boosts `hyper.rounds` trees. Training is deterministic: there is no row or
/// column sampling, and `seed` is only recorded.
pub fn train_gbdt(train: &Dataset, dev: Option<&Dataset>, hyper: &GbdtHyper) -> Result<(GbdtModel, TrainReport), ModelError> {
    check_hyper(hyper)?;
    let Some(rate) = train.retention_rate() else {
        return Err(ModelError::EmptyTrainingSet);
    };
    if let Some(dev) = dev {
        dev.check_dimension(train.dimension())?;
    }
    let dev = dev.filter(|d| !d.is_empty());
    let start = Instant::now();
    let base_score = base_score_for(rate);
    let n = train.len();
    let d = train.dimension();
    let mut margins = vec![base_score; n];
    let mut dev_margins: Vec<f64> = dev.map(|d| vec![base_score; d.len()]).unwrap_or_default();
    let mut builder = Builder {
        data: train,
        grad: vec![0.0; n],
        hess: vec![0.0; n],
        hyper,
        hist_g: vec![0.0; d],
        hist_h: vec![0.0; d],
        hist_n: vec![0; d],
        touched: Vec::new(),
    };
    let initial_loss = mean_log_loss(&margins, train.labels());
    let mut trees = Vec::with_capacity(hyper.rounds);
    let mut losses = Vec::with_capacity(hyper.rounds);
    let mut dev_losses = Vec::new();
    for round in 0..hyper.rounds {
        for (r, (&m, &y)) in margins.iter().zip(train.labels()).enumerate() {
            let p = sigmoid(m);
            builder.grad[r] = p - if y { 1.0 } else { 0.0 };
            builder.hess[r] = p * (1.0 - p);
        }
        let tree = builder.build((0..n).collect(), &mut margins);
        let loss = mean_log_loss(&margins, train.labels());
        if !loss.is_finite() {
            return Err(ModelError::Diverged { epoch: round, loss });
        }
        losses.push(loss);
        if let Some(dev) = dev {
            for (m, x) in dev_margins.iter_mut().zip(dev.rows()) {
                *m += tree.predict(x);
            }
            dev_losses.push(mean_log_loss(&dev_margins, dev.labels()));
        }
        trees.push(tree);
    }
    let dev_accuracy = dev.map(|d| {
        let correct = dev_margins.iter().zip(d.labels()).filter(|(&m, &y)| decide(sigmoid(m)) == y).count();
        correct as f64 / d.len() as f64
    });
    let model = GbdtModel { dimension: d, base_score, shrinkage: hyper.shrinkage, max_depth: hyper.max_depth, trees };
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
