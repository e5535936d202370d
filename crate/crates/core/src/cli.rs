//! The `schwa` command line.
//!
//! Exit codes: 0 success, 2 usage or data error, 3 numeric failure during
//! training. Every run prints its resolved configuration to stderr as a
//! `#`-prefixed header so results can be reproduced.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write as _};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::align::SchwaInstance;
use crate::baseline::RuleSet;
use crate::eval::{error_report, percent, render_kv, render_table, Metrics};
use crate::features::FeatureConfig;
use crate::lexicon::{parse_lexicon, stats, write_lexicon, LexEntry, LexiconStats, SplitSpec};
use crate::models::dump::dump_trees;
use crate::models::io::Hyper;
use crate::models::{load_model, save_model, GbdtHyper, LogisticHyper, MlpHyper, Model};
use crate::pipeline::{
    build_dataset, evaluate_predictor, parse_instances, split_instances, train, transcribe, write_instances,
    Classifier, PipelineError, SchwaPredictor, Subset, TrainConfig,
};
use crate::script::{decode_words, render, Script};
use crate::synth::{synth_lexicon, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "schwa", version, about = "Schwa-deletion prediction for Hindi and Punjabi")]
pub struct Cli {
    /// Seed for every random choice (splits, initialization, sampling).
    #[arg(long, global = true, env = "SCHWA_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Kv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Logistic,
    Mlp,
    Gbdt,
}

// Parsed once per process; boxing the big variant buys nothing.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decode native-script text into orthographic tokens, one word per line.
    Transcribe(InputArgs),
    /// Align a lexicon and write its labeled schwa instances.
    BuildDataset {
        lexicon: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Train a classifier on a lexicon.
    Train(TrainArgs),
    /// Score a model, or the rule baseline, on a lexicon.
    Evaluate(EvaluateArgs),
    /// Transcribe words with schwa deletion applied.
    Predict {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        predictor: PredictorArgs,
    },
    /// Print the trees of a boosted model as if/else rules.
    DumpTrees { model: PathBuf },
    /// Corpus statistics: entries, schwas, deletion rate.
    Stats {
        #[arg(required = true)]
        lexicons: Vec<PathBuf>,
    },
    /// Write a pseudo-word lexicon labeled by the rule baseline.
    Synth {
        #[arg(long, default_value_t = 2000)]
        words: usize,
        #[arg(long, default_value_t = 0.0)]
        weak_rate: f64,
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long, short)]
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Text to process; read from --input or stdin when absent.
    pub text: Option<String>,
    #[arg(long, conflicts_with = "text")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "devanagari")]
    pub script: Script,
}

#[derive(Debug, Args)]
pub struct PredictorArgs {
    #[arg(long, required_unless_present_any = ["baseline", "rules"])]
    pub model: Option<PathBuf>,
    /// Use the shipped rules instead of a model.
    #[arg(long, conflicts_with = "model")]
    pub baseline: bool,
    /// Use rules from a file instead of a model.
    #[arg(long, conflicts_with = "model")]
    pub rules: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub lexicon: PathBuf,
    /// Instances from `build-dataset`; built from the lexicon when absent.
    #[arg(long)]
    pub instances: Option<PathBuf>,
    /// Train/dev/test fractions.
    #[arg(long, default_value = "0.8,0.1,0.1")]
    pub split: String,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub model: ModelKind,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Sets both the left and the right window.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub left: Option<usize>,
    #[arg(long)]
    pub right: Option<usize>,
    /// Add phonological features for each window position.
    #[arg(long)]
    pub phon_features: bool,
    /// Write the training trace as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub shrinkage: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub min_child_hessian: Option<f64>,
    /// Search GBDT splits on all cores; the trees are identical.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub predictor: PredictorArgs,
    /// Which part of the split to score. A model uses the split it was
    /// trained with; rules use --split and --seed.
    #[arg(long, default_value = "test")]
    pub subset: Subset,
    /// Also list up to this many misclassified words.
    #[arg(long, default_value_t = 0)]
    pub errors: usize,
}

#[derive(Debug)]
pub enum CliError {
    Data(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Data(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

/// Parses the arguments, runs, and returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            // A closed pipe (`schwa dump-trees m | head`) is not an error.
            let _ = io::stdout().lock().write_all(out.as_bytes());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Header(Vec<(String, String)>);

impl Header {
    fn new(cli: &Cli, command: &str) -> Self {
        let format = match cli.format {
            Format::Table => "table",
            Format::Kv => "kv",
        };
        Header(vec![
            ("command".into(), command.into()),
            ("seed".into(), cli.seed.to_string()),
            ("format".into(), format.into()),
        ])
    }

    fn add(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.0.push((key.into(), value.to_string()));
        self
    }

    fn path(&mut self, key: &str, path: &Path) -> &mut Self {
        self.add(key, path.display())
    }

    fn emit(&self) {
        let line: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        eprintln!("# schwa {}", line.join(" "));
    }
}

/// Runs one command and returns what it prints on stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Transcribe(input) => cmd_transcribe(cli, input),
        Command::BuildDataset { lexicon, output } => cmd_build_dataset(cli, lexicon, output),
        Command::Train(args) => cmd_train(cli, args),
        Command::Evaluate(args) => cmd_evaluate(cli, args),
        Command::Predict { input, predictor } => cmd_predict(cli, input, predictor),
        Command::DumpTrees { model } => cmd_dump_trees(cli, model),
        Command::Stats { lexicons } => cmd_stats(cli, lexicons),
        Command::Synth { words, weak_rate, rules, output } => cmd_synth(cli, *words, *weak_rate, rules.as_deref(), output),
    }
}

fn read_input(input: &InputArgs) -> Result<String, CliError> {
    if let Some(text) = &input.text {
        return Ok(text.clone());
    }
    if let Some(path) = &input.input {
        return fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())));
    }
    let mut text = String::new();
    io::stdin().read_to_string(&mut text).map_err(data)?;
    Ok(text)
}

fn input_header(h: &mut Header, input: &InputArgs) {
    h.add("script", input.script);
    match (&input.text, &input.input) {
        (Some(_), _) => h.add("input", "<argument>"),
        (None, Some(p)) => h.path("input", p),
        (None, None) => h.add("input", "<stdin>"),
    };
}

fn cmd_transcribe(cli: &Cli, input: &InputArgs) -> Result<String, CliError> {
    let mut h = Header::new(cli, "transcribe");
    input_header(&mut h, input);
    h.emit();
    let words = decode_words(input.script, &read_input(input)?).map_err(data)?;
    Ok(words.iter().map(|w| format!("{}\n", render(w))).collect())
}

fn load_lexicon(path: &Path) -> Result<Vec<LexEntry>, CliError> {
    let parsed = parse_lexicon(path).map_err(data)?;
    for r in &parsed.rejects {
        eprintln!("warning: {}:{}: {}", path.display(), r.line, r.reason);
    }
    Ok(parsed.entries)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn cmd_build_dataset(cli: &Cli, lexicon: &Path, output: &Path) -> Result<String, CliError> {
    let mut h = Header::new(cli, "build-dataset");
    h.path("lexicon", lexicon).path("output", output);
    h.emit();
    let parsed = parse_lexicon(lexicon).map_err(data)?;
    let built = build_dataset(&parsed.entries);
    write_file(output, &write_instances(&built.instances))?;
    let mut rows = vec![
        ("entries".to_string(), parsed.entries.len()),
        ("rejected_lines".to_string(), parsed.rejects.len()),
        ("instances".to_string(), built.instances.len()),
        ("discarded".to_string(), built.discards.len()),
    ];
    for (reason, n) in built.discard_counts() {
        rows.push((format!("discarded.{reason}"), n));
    }
    let mut out = String::new();
    for (k, v) in rows {
        match cli.format {
            Format::Kv => writeln!(out, "{k}={v}"),
            Format::Table => writeln!(out, "{k:<24} {v:>8}"),
        }
        .expect("writing to a string");
    }
    Ok(out)
}

fn parse_split(text: &str, seed: u64) -> Result<SplitSpec, CliError> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Data(format!("--split expects three comma-separated fractions, got `{text}`")))?;
    let [train, dev, test] = parts[..] else {
        return Err(CliError::Data(format!("--split expects three fractions, got {}", parts.len())));
    };
    SplitSpec::new(train, dev, test, seed).map_err(data)
}

fn load_data(args: &DataArgs) -> Result<(Vec<LexEntry>, Vec<SchwaInstance>), CliError> {
    let entries = load_lexicon(&args.lexicon)?;
    let instances = match &args.instances {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            parse_instances(&text)?
        }
        None => build_dataset(&entries).instances,
    };
    Ok((entries, instances))
}

fn data_header(h: &mut Header, args: &DataArgs) {
    h.path("lexicon", &args.lexicon);
    match &args.instances {
        Some(p) => h.path("instances", p),
        None => h.add("instances", "<aligned from lexicon>"),
    };
}

fn hyper_for(args: &TrainArgs, seed: u64) -> Hyper {
    match args.model {
        ModelKind::Logistic => {
            let d = LogisticHyper::default();
            Hyper::Logistic(LogisticHyper {
                learning_rate: args.learning_rate.unwrap_or(d.learning_rate),
                epochs: args.epochs.unwrap_or(d.epochs),
                l2: args.l2.unwrap_or(d.l2),
                seed,
            })
        }
        ModelKind::Mlp => {
            let d = MlpHyper::default();
            Hyper::Mlp(MlpHyper {
                hidden: args.hidden.unwrap_or(d.hidden),
                learning_rate: args.learning_rate.unwrap_or(d.learning_rate),
                epochs: args.epochs.unwrap_or(d.epochs),
                batch_size: args.batch_size.unwrap_or(d.batch_size),
                l2: args.l2.unwrap_or(d.l2),
                patience: args.patience.unwrap_or(d.patience),
                seed,
            })
        }
        ModelKind::Gbdt => {
            let d = GbdtHyper::default();
            Hyper::Gbdt(GbdtHyper {
                rounds: args.rounds.unwrap_or(d.rounds),
                max_depth: args.max_depth.unwrap_or(d.max_depth),
                shrinkage: args.shrinkage.unwrap_or(d.shrinkage),
                lambda: args.lambda.unwrap_or(d.lambda),
                gamma: args.gamma.unwrap_or(d.gamma),
                min_child_hessian: args.min_child_hessian.unwrap_or(d.min_child_hessian),
                seed,
                parallel: args.parallel,
            })
        }
    }
}

fn cmd_train(cli: &Cli, args: &TrainArgs) -> Result<String, CliError> {
    let d = FeatureConfig::default();
    let left = args.left.or(args.window).unwrap_or(d.left);
    let right = args.right.or(args.window).unwrap_or(d.right);
    let features = FeatureConfig::new(left, right, args.phon_features).map_err(data)?;
    let split = parse_split(&args.data.split, cli.seed)?;
    let hyper = hyper_for(args, cli.seed);

    let mut h = Header::new(cli, "train");
    data_header(&mut h, &args.data);
    h.path("output", &args.output)
        .add("left", left)
        .add("right", right)
        .add("phon_features", args.phon_features)
        .add("split", format!("{},{},{}", split.train, split.dev, split.test))
        .add("hyper", serde_json::to_string(&hyper).expect("hyperparameters serialize"));
    h.emit();

    let (entries, instances) = load_data(&args.data)?;
    let config = TrainConfig { features, hyper, split };
    let outcome = train(&entries, &instances, &config)?;
    save_model(&outcome.saved, &args.output).map_err(data)?;
    if let Some(path) = &args.report {
        let json = serde_json::to_string_pretty(&outcome.report).map_err(data)?;
        write_file(path, &format!("{json}\n"))?;
    }
    let name = outcome.saved.model.kind().to_string();
    Ok(render_metrics(cli.format, &[(format!("{name} dev"), outcome.dev)]))
}

fn render_metrics(format: Format, rows: &[(String, Option<Metrics>)]) -> String {
    match format {
        Format::Table => render_table(rows),
        Format::Kv => rows
            .iter()
            .map(|(name, m)| match m {
                Some(m) => render_kv(&name.replace(' ', "."), m),
                None => format!("{}.n_instances=0\n", name.replace(' ', ".")),
            })
            .collect(),
    }
}

enum Loaded {
    Model(Box<Classifier>, Option<SplitSpec>),
    Rules(RuleSet),
}

impl Loaded {
    fn predictor(&self) -> &dyn SchwaPredictor {
        match self {
            Loaded::Model(c, _) => c.as_ref(),
            Loaded::Rules(r) => r,
        }
    }

    fn name(&self) -> String {
        match self {
            Loaded::Model(c, _) => c.model.kind().to_string(),
            Loaded::Rules(_) => "baseline".to_string(),
        }
    }
}

fn load_predictor(args: &PredictorArgs, h: &mut Header) -> Result<Loaded, CliError> {
    if let Some(path) = &args.rules {
        h.path("rules", path);
        return Ok(Loaded::Rules(RuleSet::load(path).map_err(data)?));
    }
    if args.baseline {
        h.add("rules", "<shipped>");
        return Ok(Loaded::Rules(RuleSet::shipped()));
    }
    let path = args.model.as_ref().ok_or_else(|| CliError::Data("one of --model, --baseline or --rules is required".into()))?;
    h.path("model", path);
    let saved = load_model(path).map_err(data)?;
    let split = saved.split;
    Ok(Loaded::Model(Box::new(Classifier::from_saved(saved)?), split))
}

fn cmd_evaluate(cli: &Cli, args: &EvaluateArgs) -> Result<String, CliError> {
    let mut h = Header::new(cli, "evaluate");
    data_header(&mut h, &args.data);
    let loaded = load_predictor(&args.predictor, &mut h)?;
    let split = match &loaded {
        Loaded::Model(_, Some(spec)) => *spec,
        _ => parse_split(&args.data.split, cli.seed)?,
    };
    let subset_name = format!("{:?}", args.subset).to_lowercase();
    h.add("subset", &subset_name).add("split", format!("{},{},{}/seed {}", split.train, split.dev, split.test, split.seed));
    h.emit();

    let (entries, instances) = load_data(&args.data)?;
    let chosen = if args.subset == Subset::All {
        instances
    } else {
        split_instances(&entries, &instances, &split)?.subset(args.subset)
    };
    let eval = evaluate_predictor(loaded.predictor(), &entries, &chosen)?;
    let name = loaded.name();
    let mut out = render_metrics(
        cli.format,
        &[(format!("{name} {subset_name}"), Some(eval.metrics)), (format!("{name} {subset_name} weak"), eval.weak)],
    );
    if args.errors > 0 {
        let report = error_report(&eval.predictions, &chosen, &entries, args.errors, cli.seed).map_err(data)?;
        out.push('\n');
        out.push_str(&report.render());
    }
    Ok(out)
}

fn cmd_predict(cli: &Cli, input: &InputArgs, predictor: &PredictorArgs) -> Result<String, CliError> {
    let mut h = Header::new(cli, "predict");
    input_header(&mut h, input);
    let loaded = load_predictor(predictor, &mut h)?;
    h.emit();
    let words = decode_words(input.script, &read_input(input)?).map_err(data)?;
    let mut out = String::new();
    for w in &words {
        out.push_str(&render(&transcribe(loaded.predictor(), w)?));
        out.push('\n');
    }
    Ok(out)
}

fn cmd_dump_trees(cli: &Cli, path: &Path) -> Result<String, CliError> {
    let mut h = Header::new(cli, "dump-trees");
    h.path("model", path);
    h.emit();
    let saved = load_model(path).map_err(data)?;
    let Model::Gbdt(gbdt) = &saved.model else {
        return Err(CliError::Data(format!(
            "{} holds a {} model; only gbdt models have trees to dump",
            path.display(),
            saved.model.kind()
        )));
    };
    let names = match &saved.features {
        Some(space) => space.feature_names(),
        None => (0..gbdt.dimension).map(|i| format!("f{i}")).collect(),
    };
    dump_trees(gbdt, &names).map_err(data)
}

fn cmd_stats(cli: &Cli, paths: &[PathBuf]) -> Result<String, CliError> {
    let mut h = Header::new(cli, "stats");
    h.add("lexicons", paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(","));
    h.emit();
    let mut rows: Vec<(String, LexiconStats)> = Vec::new();
    for p in paths {
        rows.push((p.display().to_string(), stats(&load_lexicon(p)?)));
    }
    if rows.len() > 1 {
        let total = rows.iter().fold(LexiconStats::default(), |acc, (_, s)| acc + *s);
        rows.push(("total".into(), total));
    }
    let mut out = String::new();
    match cli.format {
        Format::Table => {
            let width = rows.iter().map(|(n, _)| n.chars().count()).max().unwrap_or(0).max("Dataset".len());
            let _ = writeln!(
                out,
                "{:<width$}  {:>8}  {:>8}  {:>9}  {:>6}  {:>9}",
                "Dataset", "Entries", "Schwas", "Deleted %", "Weak", "Discarded"
            );
            for (name, s) in &rows {
                let pad = width + name.len() - name.chars().count();
                let _ = writeln!(
                    out,
                    "{name:<pad$}  {:>8}  {:>8}  {:>9}  {:>6}  {:>9}",
                    s.entry_count,
                    s.schwa_count,
                    percent(s.deletion_rate()),
                    s.weak_count,
                    s.discarded_count
                );
            }
        }
        Format::Kv => {
            for (name, s) in &rows {
                let rate = s.deletion_rate().map_or_else(|| "-".to_string(), |r| r.to_string());
                let _ = writeln!(out, "{name}.entries={}", s.entry_count);
                let _ = writeln!(out, "{name}.schwas={}", s.schwa_count);
                let _ = writeln!(out, "{name}.deleted={}", s.deleted_count);
                let _ = writeln!(out, "{name}.deletion_rate={rate}");
                let _ = writeln!(out, "{name}.weak={}", s.weak_count);
                let _ = writeln!(out, "{name}.discarded={}", s.discarded_count);
            }
        }
    }
    Ok(out)
}

fn cmd_synth(cli: &Cli, words: usize, weak_rate: f64, rules: Option<&Path>, output: &Path) -> Result<String, CliError> {
    let mut h = Header::new(cli, "synth");
    h.add("words", words).add("weak_rate", weak_rate).path("output", output);
    let rules = match rules {
        Some(p) => {
            h.path("rules", p);
            RuleSet::load(p).map_err(data)?
        }
        None => RuleSet::shipped(),
    };
    h.emit();
    if !(0.0..=1.0).contains(&weak_rate) {
        return Err(CliError::Data(format!("--weak-rate must be in [0, 1], got {weak_rate}")));
    }
    let lexicon = synth_lexicon(&SynthConfig { words, seed: cli.seed, weak_rate }, &rules);
    write_lexicon(&lexicon, output).map_err(data)?;
    Ok(String::new())
}
