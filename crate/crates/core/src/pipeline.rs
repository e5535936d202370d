//! End-to-end glue: instance files, dataset construction, training from a
//! lexicon, and prediction with either a trained model or a rule set.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::align::{extract_instances, realize, AlignFailure, AlignedSchwa, Label, SchwaInstance};
use crate::baseline::RuleSet;
use crate::eval::{evaluate, weakened_slice, EvalError, Metrics};
use crate::features::{FeatureConfig, FeatureError, FeatureSpace, Vocabulary};
use crate::lexicon::{split_assignment, LexEntry, SplitError, SplitSpec};
use crate::models::io::Hyper;
use crate::models::{
    train_gbdt, train_logistic, train_mlp, Dataset, Model, ModelError, SavedModel, TrainReport,
};
use crate::script::PhoneToken;

pub const INSTANCES_HEADER: &str = "schwa-instances v1";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("instances line {line}: {message}")]
    Instances { line: usize, message: String },
    #[error("instance refers to entry {0}, which is not in the lexicon")]
    MissingEntry(u64),
    #[error("instance at entry {entry_id} index {orth_index} is not an inherent schwa")]
    NotASchwa { entry_id: u64, orth_index: usize },
    #[error("model file carries no feature space, so it cannot encode words")]
    NoFeatureSpace,
    #[error("no training instances after splitting")]
    EmptyTrain,
}

impl PipelineError {
    /// Training blew up numerically, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, PipelineError::Model(ModelError::Diverged { .. }))
    }
}

pub fn write_instances(instances: &[SchwaInstance]) -> String {
    let mut out = format!("{INSTANCES_HEADER}\n# entry_id\torth_index\tlabel\tweak\n");
    for i in instances {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", i.entry_id, i.orth_index, i.label, u8::from(i.weak));
    }
    out
}

pub fn parse_instances(text: &str) -> Result<Vec<SchwaInstance>, PipelineError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == INSTANCES_HEADER => {}
        Some((_, h)) => {
            return Err(PipelineError::Instances { line: 1, message: format!("expected `{INSTANCES_HEADER}`, found `{h}`") })
        }
        None => return Ok(Vec::new()),
    }
    let mut out = Vec::new();
    for (n, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| PipelineError::Instances { line: n + 1, message };
        let cols: Vec<&str> = line.split('\t').collect();
        let [entry_id, orth_index, label, weak] = cols[..] else {
            return Err(bad(format!("expected 4 columns, found {}", cols.len())));
        };
        out.push(SchwaInstance {
            entry_id: entry_id.parse().map_err(|_| bad(format!("bad entry id `{entry_id}`")))?,
            orth_index: orth_index.parse().map_err(|_| bad(format!("bad index `{orth_index}`")))?,
            label: Label::parse(label).ok_or_else(|| bad(format!("bad label `{label}`")))?,
            weak: match weak {
                "0" => false,
                "1" => true,
                _ => return Err(bad(format!("bad weak flag `{weak}`"))),
            },
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discard {
    pub entry_id: u64,
    pub failure: AlignFailure,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuiltDataset {
    pub instances: Vec<SchwaInstance>,
    pub discards: Vec<Discard>,
}

impl BuiltDataset {
    pub fn discard_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut counts = BTreeMap::new();
        for d in &self.discards {
            *counts.entry(d.failure.reason.as_str()).or_insert(0) += 1;
        }
        counts
    }
}

/// Aligns every entry; order follows `entries`.
pub fn build_dataset(entries: &[LexEntry]) -> BuiltDataset {
    let results: Vec<_> = entries.par_iter().map(|e| (e.id, extract_instances(e))).collect();
    let mut built = BuiltDataset::default();
    for (entry_id, r) in results {
        match r {
            Ok(instances) => built.instances.extend(instances),
            Err(failure) => built.discards.push(Discard { entry_id, failure }),
        }
    }
    built
}

pub fn entry_index(entries: &[LexEntry]) -> HashMap<u64, &LexEntry> {
    entries.iter().map(|e| (e.id, e)).collect()
}

fn resolve<'a>(index: &HashMap<u64, &'a LexEntry>, inst: &SchwaInstance) -> Result<&'a LexEntry, PipelineError> {
    let entry = *index.get(&inst.entry_id).ok_or(PipelineError::MissingEntry(inst.entry_id))?;
    if !entry.orth.get(inst.orth_index).is_some_and(PhoneToken::is_inherent_schwa) {
        return Err(PipelineError::NotASchwa { entry_id: inst.entry_id, orth_index: inst.orth_index });
    }
    Ok(entry)
}

/// Anything that can label the schwa at `orth[index]`.
pub trait SchwaPredictor: Sync {
    fn predict_schwa(&self, orth: &[PhoneToken], index: usize) -> Result<Label, PipelineError>;
}

impl SchwaPredictor for RuleSet {
    fn predict_schwa(&self, orth: &[PhoneToken], index: usize) -> Result<Label, PipelineError> {
        Ok(self.predict(orth, index))
    }
}

/// A trained model with the feature space it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub model: Model,
    pub space: FeatureSpace,
}

impl Classifier {
    pub fn new(model: Model, space: FeatureSpace) -> Result<Self, PipelineError> {
        if model.dimension() != space.dimension() {
            return Err(ModelError::DimensionMismatch { expected: model.dimension(), found: space.dimension() }.into());
        }
        Ok(Classifier { model, space })
    }

    pub fn from_saved(saved: SavedModel) -> Result<Self, PipelineError> {
        let space = saved.features.ok_or(PipelineError::NoFeatureSpace)?;
        Classifier::new(saved.model, space)
    }

    pub fn probability(&self, orth: &[PhoneToken], index: usize) -> Result<f64, PipelineError> {
        Ok(self.model.predict_proba(&self.space.encode(orth, index))?)
    }
}

impl SchwaPredictor for Classifier {
    fn predict_schwa(&self, orth: &[PhoneToken], index: usize) -> Result<Label, PipelineError> {
        Ok(Label::from_retained(self.model.predict(&self.space.encode(orth, index))?))
    }
}

/// One prediction per instance, in order.
pub fn predict_instances(
    predictor: &dyn SchwaPredictor,
    entries: &[LexEntry],
    instances: &[SchwaInstance],
) -> Result<Vec<Label>, PipelineError> {
    let index = entry_index(entries);
    instances
        .par_iter()
        .map(|inst| predictor.predict_schwa(&resolve(&index, inst)?.orth, inst.orth_index))
        .collect()
}

/// Per-schwa metrics plus the weakened-schwa slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub predictions: Vec<Label>,
    pub metrics: Metrics,
    pub weak: Option<Metrics>,
}

pub fn evaluate_predictor(
    predictor: &dyn SchwaPredictor,
    entries: &[LexEntry],
    instances: &[SchwaInstance],
) -> Result<Evaluation, PipelineError> {
    let predictions = predict_instances(predictor, entries, instances)?;
    let metrics = evaluate(&predictions, instances)?;
    let weak = weakened_slice(&predictions, instances)?;
    Ok(Evaluation { predictions, metrics, weak })
}

/// Phonemic tokens for an orthographic word: every inherent schwa is
/// classified from the full orthographic context, then deleted ones are
/// dropped.
pub fn transcribe(predictor: &dyn SchwaPredictor, orth: &[PhoneToken]) -> Result<Vec<PhoneToken>, PipelineError> {
    let mut labels = Vec::new();
    for (i, t) in orth.iter().enumerate() {
        if t.is_inherent_schwa() {
            labels.push(AlignedSchwa { orth_index: i, label: predictor.predict_schwa(orth, i)?, weak: false });
        }
    }
    Ok(realize(orth, &labels))
}

pub fn to_dataset(
    space: &FeatureSpace,
    entries: &[LexEntry],
    instances: &[SchwaInstance],
) -> Result<Dataset, PipelineError> {
    let index = entry_index(entries);
    let rows = instances
        .par_iter()
        .map(|inst| Ok(space.encode(&resolve(&index, inst)?.orth, inst.orth_index)))
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let labels = instances.iter().map(|i| i.label.is_retained()).collect();
    Ok(Dataset::new(space.dimension(), rows, labels)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subset {
    Train,
    Dev,
    Test,
    All,
}

impl FromStr for Subset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "train" => Ok(Subset::Train),
            "dev" => Ok(Subset::Dev),
            "test" => Ok(Subset::Test),
            "all" => Ok(Subset::All),
            _ => Err(format!("unknown subset `{s}` (expected train, dev, test or all)")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstanceSplit {
    pub train_entries: Vec<LexEntry>,
    pub train: Vec<SchwaInstance>,
    pub dev: Vec<SchwaInstance>,
    pub test: Vec<SchwaInstance>,
}

impl InstanceSplit {
    pub fn subset(&self, which: Subset) -> Vec<SchwaInstance> {
        match which {
            Subset::Train => self.train.clone(),
            Subset::Dev => self.dev.clone(),
            Subset::Test => self.test.clone(),
            Subset::All => {
                let mut all: Vec<SchwaInstance> =
                    self.train.iter().chain(&self.dev).chain(&self.test).copied().collect();
                all.sort_by_key(|i| (i.entry_id, i.orth_index));
                all
            }
        }
    }
}

/// Splits by entry, so all schwas of one word land in the same part.
pub fn split_instances(
    entries: &[LexEntry],
    instances: &[SchwaInstance],
    spec: &SplitSpec,
) -> Result<InstanceSplit, PipelineError> {
    let assignment = split_assignment(entries.len(), spec)?;
    let part: HashMap<u64, u8> = entries.iter().zip(&assignment).map(|(e, &p)| (e.id, p)).collect();
    let mut split = InstanceSplit {
        train_entries: entries.iter().zip(&assignment).filter(|(_, &p)| p == 0).map(|(e, _)| e.clone()).collect(),
        ..Default::default()
    };
    for inst in instances {
        match part.get(&inst.entry_id) {
            Some(0) => split.train.push(*inst),
            Some(1) => split.dev.push(*inst),
            Some(_) => split.test.push(*inst),
            None => return Err(PipelineError::MissingEntry(inst.entry_id)),
        }
    }
    Ok(split)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub features: FeatureConfig,
    pub hyper: Hyper,
    pub split: SplitSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub saved: SavedModel,
    pub report: TrainReport,
    /// Per-schwa metrics on the dev part, when it has instances.
    pub dev: Option<Metrics>,
}

/// Splits, builds the vocabulary from training entries only, trains, and
/// scores the dev part.
pub fn train(entries: &[LexEntry], instances: &[SchwaInstance], config: &TrainConfig) -> Result<TrainOutcome, PipelineError> {
    config.features.validate()?;
    let split = split_instances(entries, instances, &config.split)?;
    if split.train.is_empty() {
        return Err(PipelineError::EmptyTrain);
    }
    let space = FeatureSpace::new(config.features, Vocabulary::build(&split.train_entries));
    let train_set = to_dataset(&space, entries, &split.train)?;
    let dev_set = to_dataset(&space, entries, &split.dev)?;
    let dev_ref = (!dev_set.is_empty()).then_some(&dev_set);
    let (model, report) = match &config.hyper {
        Hyper::Logistic(h) => train_logistic(&train_set, dev_ref, h).map(|(m, r)| (Model::Logistic(m), r))?,
        Hyper::Mlp(h) => train_mlp(&train_set, dev_ref, h).map(|(m, r)| (Model::Mlp(m), r))?,
        Hyper::Gbdt(h) => train_gbdt(&train_set, dev_ref, h).map(|(m, r)| (Model::Gbdt(m), r))?,
    };
    let classifier = Classifier::new(model, space)?;
    let dev = if split.dev.is_empty() {
        None
    } else {
        Some(evaluate_predictor(&classifier, entries, &split.dev)?.metrics)
    };
    let saved = SavedModel {
        model: classifier.model,
        features: Some(classifier.space),
        hyper: Some(config.hyper.clone()),
        split: Some(config.split),
    };
    Ok(TrainOutcome { saved, report, dev })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::parse_lexicon_str;
    use crate::models::{GbdtHyper, LogisticHyper};
    use crate::script::{parse_token_string, render, Side};
    use crate::synth::{synth_lexicon, SynthConfig};

    const TABLE: &str = "अँकड़ाहट\ta ~ k a rr aa h a tt a\ta ~ k rr aa h a tt";

    fn lex(body: &str) -> Vec<LexEntry> {
        parse_lexicon_str(&format!("{}\n{body}", crate::lexicon::HEADER)).unwrap().entries
    }

    #[test]
    fn table_entry_gives_three_rows() {
        let built = build_dataset(&lex(TABLE));
        assert_eq!(built.instances.len(), 3);
        let text = write_instances(&built.instances);
        assert_eq!(text.lines().skip(2).collect::<Vec<_>>(), ["0\t3\tdeleted\t0", "0\t7\tretained\t0", "0\t9\tdeleted\t0"]);
        assert_eq!(parse_instances(&text).unwrap(), built.instances);
    }

    #[test]
    fn discards_are_counted() {
        let built = build_dataset(&lex("x\tk a\tg\ny\tk a\tk a a\n"));
        assert!(built.instances.is_empty());
        assert_eq!(built.discards.len(), 2);
        let counts = built.discard_counts();
        assert_eq!(counts.values().sum::<usize>(), 2);
    }

    #[test]
    fn instance_file_errors() {
        assert!(parse_instances("").unwrap().is_empty());
        assert!(matches!(parse_instances("nope\n"), Err(PipelineError::Instances { line: 1, .. })));
        let bad = format!("{INSTANCES_HEADER}\n0\t1\tkept\t0\n");
        assert!(matches!(parse_instances(&bad), Err(PipelineError::Instances { line: 2, .. })));
    }

    #[test]
    fn transcribe_with_rules() {
        let orth = parse_token_string("p e p a r a", Side::Orthographic).unwrap();
        assert_eq!(render(&transcribe(&RuleSet::shipped(), &orth).unwrap()), "p e p a r");
        let none = parse_token_string("p aa n ii", Side::Orthographic).unwrap();
        assert_eq!(render(&transcribe(&RuleSet::shipped(), &none).unwrap()), "p aa n ii");
    }

    #[test]
    fn instance_must_point_at_a_schwa() {
        let entries = lex(TABLE);
        let bogus = [SchwaInstance { entry_id: 0, orth_index: 2, label: Label::Deleted, weak: false }];
        assert!(matches!(
            predict_instances(&RuleSet::shipped(), &entries, &bogus),
            Err(PipelineError::NotASchwa { orth_index: 2, .. })
        ));
        let missing = [SchwaInstance { entry_id: 5, orth_index: 3, label: Label::Deleted, weak: false }];
        assert!(matches!(predict_instances(&RuleSet::shipped(), &entries, &missing), Err(PipelineError::MissingEntry(5))));
    }

    #[test]
    fn vocabulary_comes_from_train_entries_only() {
        let entries = synth_lexicon(&SynthConfig { words: 300, seed: 2, weak_rate: 0.0 }, &RuleSet::shipped());
        let built = build_dataset(&entries);
        let config = TrainConfig {
            features: FeatureConfig::new(2, 2, false).unwrap(),
            hyper: Hyper::Logistic(LogisticHyper { epochs: 5, ..Default::default() }),
            split: SplitSpec::default(),
        };
        let outcome = train(&entries, &built.instances, &config).unwrap();
        let split = split_instances(&entries, &built.instances, &config.split).unwrap();
        let space = outcome.saved.features.as_ref().unwrap();
        assert_eq!(space.vocab, Vocabulary::build(&split.train_entries));
        assert!(outcome.dev.is_some());
    }

    #[test]
    fn split_keeps_words_together() {
        let entries = synth_lexicon(&SynthConfig { words: 200, seed: 5, weak_rate: 0.0 }, &RuleSet::shipped());
        let built = build_dataset(&entries);
        let split = split_instances(&entries, &built.instances, &SplitSpec::new(0.6, 0.2, 0.2, 1).unwrap()).unwrap();
        let ids = |v: &[SchwaInstance]| v.iter().map(|i| i.entry_id).collect::<std::collections::HashSet<_>>();
        assert!(ids(&split.train).is_disjoint(&ids(&split.test)));
        assert!(ids(&split.dev).is_disjoint(&ids(&split.test)));
        assert_eq!(split.subset(Subset::All), built.instances);
    }

    #[test]
    fn small_gbdt_learns_the_rules() {
        let entries = synth_lexicon(&SynthConfig { words: 600, seed: 4, weak_rate: 0.0 }, &RuleSet::shipped());
        let built = build_dataset(&entries);
        let config = TrainConfig {
            features: FeatureConfig::new(3, 2, false).unwrap(),
            hyper: Hyper::Gbdt(GbdtHyper { rounds: 60, max_depth: 6, ..Default::default() }),
            split: SplitSpec::default(),
        };
        let outcome = train(&entries, &built.instances, &config).unwrap();
        assert!(outcome.dev.unwrap().accuracy().unwrap() > 0.9);
    }
}
