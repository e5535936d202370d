//! Per-schwa and word-level metrics, the weakened-schwa slice, and sampled
//! error reports.
//!
//! The positive class is *retained*: precision is the fraction of predicted
//! retentions that are correct, recall the fraction of gold retentions found.

use std::collections::HashMap;
use std::fmt::Write;
use std::ops::{Add, AddAssign};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{Label, SchwaInstance};
use crate::lexicon::LexEntry;
use crate::script::render;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("{predictions} predictions for {gold} gold instances")]
    CountMismatch { predictions: usize, gold: usize },
    #[error("instance refers to entry {0}, which is not in the lexicon")]
    MissingEntry(u64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn record(&mut self, predicted: Label, gold: Label) {
        match (predicted.is_retained(), gold.is_retained()) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

impl Add for Confusion {
    type Output = Confusion;

    fn add(self, o: Confusion) -> Confusion {
        Confusion { tp: self.tp + o.tp, fp: self.fp + o.fp, tn: self.tn + o.tn, fn_: self.fn_ + o.fn_ }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub confusion: Confusion,
    pub n_instances: usize,
    /// Words with at least one schwa.
    pub n_words: usize,
    /// Words whose schwas were all classified correctly.
    pub words_correct: usize,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl Metrics {
    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.confusion.tp + self.confusion.tn, self.n_instances)
    }

    pub fn precision(&self) -> Option<f64> {
        ratio(self.confusion.tp, self.confusion.tp + self.confusion.fp)
    }

    pub fn recall(&self) -> Option<f64> {
        ratio(self.confusion.tp, self.confusion.tp + self.confusion.fn_)
    }

    pub fn word_accuracy(&self) -> Option<f64> {
        ratio(self.words_correct, self.n_words)
    }
}

/// Counts of two disjoint corpora add up.
impl Add for Metrics {
    type Output = Metrics;

    fn add(self, o: Metrics) -> Metrics {
        Metrics {
            confusion: self.confusion + o.confusion,
            n_instances: self.n_instances + o.n_instances,
            n_words: self.n_words + o.n_words,
            words_correct: self.words_correct + o.words_correct,
        }
    }
}

impl AddAssign for Metrics {
    fn add_assign(&mut self, o: Metrics) {
        *self = *self + o;
    }
}

fn check_counts(predictions: &[Label], gold: &[SchwaInstance]) -> Result<(), EvalError> {
    if predictions.len() != gold.len() {
        return Err(EvalError::CountMismatch { predictions: predictions.len(), gold: gold.len() });
    }
    Ok(())
}

/// `predictions[i]` is the label predicted for `gold[i]`. Words are identified
/// by `entry_id`; instances of one word need not be contiguous.
pub fn evaluate(predictions: &[Label], gold: &[SchwaInstance]) -> Result<Metrics, EvalError> {
    check_counts(predictions, gold)?;
    let mut m = Metrics { n_instances: gold.len(), ..Default::default() };
    let mut words: HashMap<u64, bool> = HashMap::new();
    for (&p, g) in predictions.iter().zip(gold) {
        m.confusion.record(p, g.label);
        *words.entry(g.entry_id).or_insert(true) &= p == g.label;
    }
    m.n_words = words.len();
    m.words_correct = words.values().filter(|&&ok| ok).count();
    Ok(m)
}

/// Metrics over weakened schwas only; `None` when there are none.
pub fn weakened_slice(predictions: &[Label], gold: &[SchwaInstance]) -> Result<Option<Metrics>, EvalError> {
    check_counts(predictions, gold)?;
    let (p, g): (Vec<Label>, Vec<SchwaInstance>) =
        predictions.iter().zip(gold).filter(|(_, g)| g.weak).map(|(p, g)| (*p, *g)).unzip();
    if g.is_empty() {
        return Ok(None);
    }
    evaluate(&p, &g).map(Some)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchwaOutcome {
    pub orth_index: usize,
    pub gold: Label,
    pub predicted: Label,
    pub weak: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorWord {
    pub entry_id: u64,
    pub headword: String,
    pub orth: String,
    pub schwas: Vec<SchwaOutcome>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ErrorReport {
    pub words: Vec<ErrorWord>,
}

impl ErrorReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for w in &self.words {
            let _ = writeln!(out, "{}\t{}", w.headword, w.orth);
            for s in &w.schwas {
                let mark = if s.gold == s.predicted { ' ' } else { '*' };
                let weak = if s.weak { " weak" } else { "" };
                let _ = writeln!(out, "  {mark} {:>2} gold {:<8} predicted {}{weak}", s.orth_index, s.gold.as_str(), s.predicted);
            }
        }
        out
    }
}

/// A seeded sample of up to `k` misclassified words, listed in entry order.
pub fn error_report(
    predictions: &[Label],
    gold: &[SchwaInstance],
    entries: &[LexEntry],
    k: usize,
    seed: u64,
) -> Result<ErrorReport, EvalError> {
    check_counts(predictions, gold)?;
    let mut order: Vec<u64> = Vec::new();
    let mut by_word: HashMap<u64, Vec<SchwaOutcome>> = HashMap::new();
    for (&predicted, g) in predictions.iter().zip(gold) {
        let list = by_word.entry(g.entry_id).or_insert_with(|| {
            order.push(g.entry_id);
            Vec::new()
        });
        list.push(SchwaOutcome { orth_index: g.orth_index, gold: g.label, predicted, weak: g.weak });
    }
    let mut wrong: Vec<u64> =
        order.into_iter().filter(|id| by_word[id].iter().any(|s| s.gold != s.predicted)).collect();
    wrong.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    wrong.truncate(k);
    wrong.sort_unstable();
    let lookup: HashMap<u64, &LexEntry> = entries.iter().map(|e| (e.id, e)).collect();
    let words = wrong
        .into_iter()
        .map(|id| {
            let entry = lookup.get(&id).ok_or(EvalError::MissingEntry(id))?;
            let mut schwas = by_word.remove(&id).unwrap_or_default();
            schwas.sort_by_key(|s| s.orth_index);
            Ok(ErrorWord { entry_id: id, headword: entry.headword.clone(), orth: render(&entry.orth), schwas })
        })
        .collect::<Result<_, EvalError>>()?;
    Ok(ErrorReport { words })
}

/// Two-decimal percentage, or `-` when the value is undefined.
pub fn percent(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{:.2}", v * 100.0))
}

/// Fixed-layout table with one row per named result.
pub fn render_table(rows: &[(String, Option<Metrics>)]) -> String {
    let width = rows.iter().map(|(n, _)| n.chars().count()).max().unwrap_or(0).max("Model".len());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>8}  {:>9}  {:>8}  {:>8}  {:>9}  {:>7}",
        "Model", "Accuracy", "Precision", "Recall", "Word acc", "Instances", "Words"
    );
    for (name, m) in rows {
        let pad = width + name.len() - name.chars().count();
        match m {
            Some(m) => {
                let _ = writeln!(
                    out,
                    "{name:<pad$}  {:>8}  {:>9}  {:>8}  {:>8}  {:>9}  {:>7}",
                    percent(m.accuracy()),
                    percent(m.precision()),
                    percent(m.recall()),
                    percent(m.word_accuracy()),
                    m.n_instances,
                    m.n_words
                );
            }
            None => {
                let _ = writeln!(out, "{name:<pad$}  {:>8}  {:>9}  {:>8}  {:>8}  {:>9}  {:>7}", "-", "-", "-", "-", 0, 0);
            }
        }
    }
    out
}

/// `key=value` lines; fractions are printed at full precision.
pub fn render_kv(prefix: &str, m: &Metrics) -> String {
    let frac = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| v.to_string());
    let c = &m.confusion;
    let mut out = String::new();
    for (k, v) in [
        ("accuracy", frac(m.accuracy())),
        ("precision", frac(m.precision())),
        ("recall", frac(m.recall())),
        ("word_accuracy", frac(m.word_accuracy())),
        ("tp", c.tp.to_string()),
        ("fp", c.fp.to_string()),
        ("tn", c.tn.to_string()),
        ("fn", c.fn_.to_string()),
        ("n_instances", m.n_instances.to_string()),
        ("n_words", m.n_words.to_string()),
    ] {
        let _ = writeln!(out, "{prefix}.{k}={v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(entry_id: u64, orth_index: usize, label: Label, weak: bool) -> SchwaInstance {
        SchwaInstance { entry_id, orth_index, label, weak }
    }

    use Label::{Deleted as D, Retained as R};

    #[test]
    fn perfect_predictions() {
        let gold = [inst(0, 1, R, false), inst(0, 3, D, false), inst(1, 1, R, false)];
        let preds: Vec<Label> = gold.iter().map(|g| g.label).collect();
        let m = evaluate(&preds, &gold).unwrap();
        for v in [m.accuracy(), m.precision(), m.recall(), m.word_accuracy()] {
            assert_eq!(v, Some(1.0));
        }
    }

    #[test]
    fn one_wrong_in_a_three_schwa_word() {
        let gold = [inst(0, 3, D, false), inst(0, 7, R, false), inst(0, 9, D, false)];
        let m = evaluate(&[R, R, D], &gold).unwrap();
        assert_eq!(m.accuracy(), Some(2.0 / 3.0));
        assert_eq!(m.word_accuracy(), Some(0.0));
        assert_eq!(m.confusion, Confusion { tp: 1, fp: 1, tn: 1, fn_: 0 });
    }

    #[test]
    fn absent_ratios() {
        let m = evaluate(&[], &[]).unwrap();
        assert_eq!((m.accuracy(), m.precision(), m.recall(), m.word_accuracy()), (None, None, None, None));
        let m = evaluate(&[D], &[inst(0, 1, D, false)]).unwrap();
        assert_eq!((m.precision(), m.recall()), (None, None));
        assert!(matches!(evaluate(&[D], &[]), Err(EvalError::CountMismatch { predictions: 1, gold: 0 })));
    }

    #[test]
    fn weak_slice() {
        let gold = [inst(0, 1, R, false), inst(1, 1, D, false)];
        assert_eq!(weakened_slice(&[R, D], &gold).unwrap(), None);
        let gold = [inst(0, 1, R, true), inst(1, 1, R, true), inst(2, 1, R, false)];
        let m = weakened_slice(&[R, D, D], &gold).unwrap().unwrap();
        assert_eq!(m.accuracy(), Some(0.5));
        assert_eq!(m.n_instances, 2);
    }

    fn entries(n: u64) -> Vec<LexEntry> {
        let tokens = crate::script::parse_token_string("k a l a", crate::script::Side::Orthographic).unwrap();
        (0..n)
            .map(|id| LexEntry {
                id,
                headword: format!("w{id}"),
                orth: tokens.clone(),
                phon: tokens.clone(),
                source: String::new(),
            })
            .collect()
    }

    #[test]
    fn error_reports() {
        let gold: Vec<SchwaInstance> = (0..10).flat_map(|e| [inst(e, 1, R, false), inst(e, 3, D, false)]).collect();
        let right: Vec<Label> = gold.iter().map(|g| g.label).collect();
        assert!(error_report(&right, &gold, &entries(10), 5, 0).unwrap().words.is_empty());

        let mut preds = right.clone();
        for e in [1usize, 4, 7] {
            preds[2 * e + 1] = R;
        }
        let all = error_report(&preds, &gold, &entries(10), 50, 0).unwrap();
        assert_eq!(all.words.iter().map(|w| w.entry_id).collect::<Vec<_>>(), [1, 4, 7]);
        assert_eq!(all.words[0].schwas.len(), 2);

        let a = error_report(&preds, &gold, &entries(10), 2, 9).unwrap();
        let b = error_report(&preds, &gold, &entries(10), 2, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.words.len(), 2);
        assert!(a.render().contains("gold deleted  predicted retained"));
    }

    #[test]
    fn table_and_kv_agree() {
        let gold = [inst(0, 1, R, false), inst(0, 3, D, false), inst(1, 1, R, false)];
        let m = evaluate(&[R, R, R], &gold).unwrap();
        let table = render_table(&[("gbdt".into(), Some(m)), ("none".into(), None)]);
        let row: Vec<&str> = table.lines().nth(1).unwrap().split_whitespace().collect();
        assert_eq!(row, ["gbdt", "66.67", "66.67", "100.00", "50.00", "3", "2"]);
        let kv = render_kv("test", &m);
        let acc: f64 = kv.lines().next().unwrap().strip_prefix("test.accuracy=").unwrap().parse().unwrap();
        assert_eq!(format!("{:.2}", acc * 100.0), row[1]);
        assert!(table.lines().nth(2).unwrap().contains('-'));
    }
}
