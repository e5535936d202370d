use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use schwa::models::dump::RuleDump;
use schwa::models::load_model;
use schwa::pipeline::{build_dataset, Classifier};
use schwa::lexicon::parse_lexicon;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn schwa(args: &[&str], stdin: Option<&str>) -> Run {
    let mut child = Command::new(env!("CARGO_BIN_EXE_schwa"))
        .args(args)
        .env_remove("SCHWA_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn ok(args: &[&str]) -> String {
    let r = schwa(args, None);
    assert_eq!(r.code, 0, "schwa {args:?} failed: {}", r.stderr);
    r.stdout
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const ANKRAHAT: &str = "schwa-lexicon v1\nअँकड़ाहट\ta ~ k a rr aa h a tt a\ta ~ k rr aa h a tt\n";

fn synth(dir: &Path, words: usize, seed: u64) -> PathBuf {
    let path = dir.join(format!("synth-{words}-{seed}.tsv"));
    ok(&["--seed", &seed.to_string(), "synth", "--words", &words.to_string(), "-o", p(&path)]);
    path
}

fn kv(text: &str) -> HashMap<String, String> {
    text.lines().filter_map(|l| l.split_once('=')).map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[test]
fn transcribe_examples() {
    assert_eq!(ok(&["transcribe", "पेपर"]), "p e p a r a\n");
    let r = schwa(&["transcribe"], Some(""));
    assert_eq!((r.code, r.stdout.as_str()), (0, ""));
    assert!(r.stderr.starts_with("# schwa command=transcribe seed=0"));

    let r = schwa(&["transcribe", "पेपर ਪਰ"], None);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("position 5"), "{}", r.stderr);
    assert!(r.stderr.contains("U+0A2A"), "{}", r.stderr);

    assert_eq!(ok(&["transcribe", "--script", "gurmukhi", "ਪੱਕਾ"]), "p a k k aa\n");
}

#[test]
fn transcribe_reads_files_and_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("words.txt");
    std::fs::write(&f, "कमल\nजंगली\n").unwrap();
    let from_file = ok(&["transcribe", "--input", p(&f)]);
    let r = schwa(&["transcribe"], Some("कमल जंगली"));
    assert_eq!(from_file, r.stdout);
    assert_eq!(from_file, "k a m a l a\nj a M g a l ii\n");
}

#[test]
fn build_dataset_ankrahat_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let lex = dir.path().join("t1.tsv");
    std::fs::write(&lex, ANKRAHAT).unwrap();
    let (a, b) = (dir.path().join("a.inst"), dir.path().join("b.inst"));
    let report = ok(&["--format", "kv", "build-dataset", p(&lex), "-o", p(&a)]);
    ok(&["--format", "kv", "build-dataset", p(&lex), "-o", p(&b)]);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("schwa-")).collect();
    assert_eq!(rows, ["0\t3\tdeleted\t0", "0\t7\tretained\t0", "0\t9\tdeleted\t0"]);
    assert_eq!(kv(&report)["instances"], "3");
}

#[test]
fn build_dataset_discards() {
    let dir = tempfile::tempdir().unwrap();
    let lex = dir.path().join("bad.tsv");
    std::fs::write(&lex, "schwa-lexicon v1\nक\tk a\tg a\nकअ\tk a a\tk a\nप\tp a\tp a a\n").unwrap();
    let out = dir.path().join("o.inst");
    let m = kv(&ok(&["--format", "kv", "build-dataset", p(&lex), "-o", p(&out)]));
    assert_eq!(m["instances"], "0");
    assert_eq!(m["discarded"], "3");
    assert_eq!(m["discarded.mismatch"], "1");
    assert_eq!(m["discarded.adjacent-schwa"], "1");
    assert_eq!(m["discarded.trailing-phonemic"], "1");

    let r = schwa(&["build-dataset", "/nonexistent/lex.tsv", "-o", p(&out)], None);
    assert_eq!(r.code, 2);
}

#[test]
fn train_is_deterministic_and_logistic_learns_rules() {
    let dir = tempfile::tempdir().unwrap();
    let lex = synth(dir.path(), 5000, 4);
    let (a, b) = (dir.path().join("a.model"), dir.path().join("b.model"));
    let args = |o: &Path| -> Vec<String> {
        ["--seed", "7", "--format", "kv", "train", "--lexicon", p(&lex), "--model", "logistic", "-o", p(o)]
            .map(String::from)
            .to_vec()
    };
    let out_a = ok(&args(&a).iter().map(String::as_str).collect::<Vec<_>>());
    ok(&args(&b).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let acc: f64 = kv(&out_a)["logistic.dev.accuracy"].parse().unwrap();
    assert!(acc >= 0.98, "dev accuracy {acc}");

    // A different seed gives a different split and so a different model.
    let c = dir.path().join("c.model");
    ok(&["--seed", "8", "train", "--lexicon", p(&lex), "--model", "logistic", "--epochs", "50", "-o", p(&c)]);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn train_headline_configuration_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let lex = synth(dir.path(), 2000, 1);
    let model = dir.path().join("g.model");
    let report = dir.path().join("r.json");
    let args = [
        "train", "--lexicon", p(&lex), "--model", "gbdt", "--rounds", "200", "--max-depth", "11", "--window", "5", "-o",
        p(&model), "--report", p(&report),
    ];
    let r = schwa(&args, None);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("\"rounds\":200") && r.stderr.contains("\"max_depth\":11"), "{}", r.stderr);
    assert!(r.stderr.contains("left=5 right=5"), "{}", r.stderr);
    let trace: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(trace["losses"].as_array().unwrap().len(), 200);
    assert!(r.stdout.lines().nth(1).unwrap().starts_with("gbdt dev"));
}

#[test]
fn train_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let lex = synth(dir.path(), 200, 2);
    let out = dir.path().join("m.model");
    let base = ["train", "--lexicon", p(&lex), "-o", p(&out)];

    let diverge = [&base[..], &["--model", "logistic", "--learning-rate", "1e308", "--epochs", "20"]].concat();
    let r = schwa(&diverge, None);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("diverged"), "{}", r.stderr);
    assert!(!out.exists());

    let bad_split = [&base[..], &["--model", "gbdt", "--split", "0.5,0.5,0.5"]].concat();
    assert_eq!(schwa(&bad_split, None).code, 2);
    let bad_window = [&base[..], &["--model", "gbdt", "--window", "0"]].concat();
    assert_eq!(schwa(&bad_window, None).code, 2);
    let no_model = &base[..];
    assert_eq!(schwa(no_model, None).code, 2);
}

fn table_row<'a>(table: &'a str, name: &str) -> Vec<&'a str> {
    let line = table.lines().find(|l| l.starts_with(name) && l[name.len()..].starts_with("  ")).unwrap();
    line[name.len()..].split_whitespace().collect()
}

#[test]
fn evaluate_kv_matches_table() {
    let dir = tempfile::tempdir().unwrap();
    let lex = synth(dir.path(), 1500, 3);
    let model = dir.path().join("m.model");
    ok(&["train", "--lexicon", p(&lex), "--model", "gbdt", "--rounds", "20", "--max-depth", "3", "-o", p(&model)]);
    let table = ok(&["evaluate", "--lexicon", p(&lex), "--model", p(&model)]);
    let pairs = kv(&ok(&["--format", "kv", "evaluate", "--lexicon", p(&lex), "--model", p(&model)]));
    let row = table_row(&table, "gbdt test");
    for (col, key) in ["accuracy", "precision", "recall", "word_accuracy"].iter().enumerate() {
        let exact: f64 = pairs[&format!("gbdt.test.{key}")].parse().unwrap();
        assert_eq!(row[col], format!("{:.2}", exact * 100.0), "{key}");
    }
    assert_eq!(row[4], pairs["gbdt.test.n_instances"]);
    assert_eq!(row[5], pairs["gbdt.test.n_words"]);
    let counts: usize = ["tp", "fp", "tn", "fn"].iter().map(|k| pairs[&format!("gbdt.test.{k}")].parse::<usize>().unwrap()).sum();
    assert_eq!(counts.to_string(), pairs["gbdt.test.n_instances"]);
}

#[test]
fn evaluate_baseline_through_the_same_path() {
    let dir = tempfile::tempdir().unwrap();
    let lex = synth(dir.path(), 400, 5);
    let table = ok(&["evaluate", "--lexicon", p(&lex), "--baseline", "--subset", "all"]);
    assert_eq!(&table_row(&table, "baseline all")[..4], ["100.00"; 4]);

    let rules = dir.path().join("retain.rules");
    std::fs::write(&rules, "default -> retain\n").unwrap();
    let pairs = kv(&ok(&["--format", "kv", "evaluate", "--lexicon", p(&lex), "--rules", p(&rules), "--subset", "all"]));
    assert_eq!(pairs["baseline.all.recall"], "1");
    assert_eq!(pairs["baseline.all.tn"], "0");
}

#[test]
fn evaluate_reports_weak_slice_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let lex = dir.path().join("weak.tsv");
    ok(&["--seed", "2", "synth", "--words", "600", "--weak-rate", "0.3", "-o", p(&lex)]);
    let rules = dir.path().join("delete.rules");
    std::fs::write(&rules, "default -> delete\n").unwrap();
    let out = ok(&["evaluate", "--lexicon", p(&lex), "--rules", p(&rules), "--subset", "all", "--errors", "3"]);
    assert_eq!(&table_row(&out, "baseline all weak")[..1], ["0.00"]);
    let errors = out.split("\n\n").nth(1).unwrap();
    assert!(!errors.trim().is_empty());
    let again = ok(&["evaluate", "--lexicon", p(&lex), "--rules", p(&rules), "--subset", "all", "--errors", "3"]);
    assert_eq!(out, again);
}

#[test]
fn evaluate_rejects_unusable_models() {
    let dir = tempfile::tempdir().unwrap();
    let lex = synth(dir.path(), 100, 1);
    let junk = dir.path().join("junk.model");
    std::fs::write(&junk, "not a model\n").unwrap();
    let r = schwa(&["evaluate", "--lexicon", p(&lex), "--model", p(&junk)], None);
    assert_eq!(r.code, 2);

    // A model without an embedded feature space cannot be paired with words.
    let bare = schwa::models::SavedModel::bare(schwa::models::Model::Logistic(schwa::models::LogisticModel::zeros(4)));
    let bare_path = dir.path().join("bare.model");
    schwa::models::save_model(&bare, &bare_path).unwrap();
    let r = schwa(&["evaluate", "--lexicon", p(&lex), "--model", p(&bare_path)], None);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("feature space"), "{}", r.stderr);
}

#[test]
fn predict_with_rules_and_models() {
    assert_eq!(ok(&["predict", "--baseline", "पेपर"]), "p e p a r\n");
    // No inherent schwas: output equals the decoding.
    assert_eq!(ok(&["predict", "--baseline", "पी"]), ok(&["transcribe", "पी"]));

    let dir = tempfile::tempdir().unwrap();
    let lex = synth(dir.path(), 2000, 6);
    let model = dir.path().join("m.model");
    ok(&["train", "--lexicon", p(&lex), "--model", "gbdt", "--rounds", "100", "--max-depth", "6", "-o", p(&model)]);
    let words: Vec<String> = parse_lexicon(&lex).unwrap().entries.iter().take(300).map(|e| e.headword.clone()).collect();
    let batch = dir.path().join("batch.txt");
    std::fs::write(&batch, words.join("\n")).unwrap();
    let out = ok(&["predict", "--model", p(&model), "--input", p(&batch)]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), words.len());
    for (w, line) in words.iter().zip(&lines).step_by(37) {
        assert_eq!(ok(&["predict", "--model", p(&model), w]).trim_end(), *line);
    }
}

#[test]
fn dump_trees_reevaluates_to_model_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let lex = synth(dir.path(), 800, 7);
    let model = dir.path().join("g.model");
    ok(&["train", "--lexicon", p(&lex), "--model", "gbdt", "--rounds", "15", "--max-depth", "4", "--window", "3", "-o", p(&model)]);
    let dump = RuleDump::parse(&ok(&["dump-trees", p(&model)])).unwrap();
    assert_eq!(dump.trees.len(), 15);

    let classifier = Classifier::from_saved(load_model(&model).unwrap()).unwrap();
    let names = classifier.space.feature_names();
    let entries = parse_lexicon(&lex).unwrap().entries;
    let by_id: HashMap<u64, _> = entries.iter().map(|e| (e.id, e)).collect();
    for inst in build_dataset(&entries).instances {
        let orth = &by_id[&inst.entry_id].orth;
        let x = classifier.space.encode(orth, inst.orth_index);
        let active: HashSet<&str> = x.active().iter().map(|&i| names[i as usize].as_str()).collect();
        let expected = classifier.probability(orth, inst.orth_index).unwrap();
        let got = dump.probability(&active);
        assert!((expected - got).abs() < 1e-12, "{expected} vs {got}");
    }
}

#[test]
fn dump_trees_of_a_stump_and_a_non_tree_model() {
    let dir = tempfile::tempdir().unwrap();
    let lex = synth(dir.path(), 300, 8);
    let stump = dir.path().join("s.model");
    ok(&["train", "--lexicon", p(&lex), "--model", "gbdt", "--rounds", "1", "--max-depth", "1", "-o", p(&stump)]);
    let text = ok(&["dump-trees", p(&stump)]);
    let rules: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rules.len(), 2, "{text}");
    assert!(rules[0].starts_with("if ") && rules[1].starts_with("else score "));

    let logistic = dir.path().join("l.model");
    ok(&["train", "--lexicon", p(&lex), "--model", "logistic", "--epochs", "5", "-o", p(&logistic)]);
    let r = schwa(&["dump-trees", p(&logistic)], None);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("logistic model"), "{}", r.stderr);
}

#[test]
fn stats_rows_add_up() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth(dir.path(), 150, 1);
    let b = synth(dir.path(), 250, 2);
    let both = dir.path().join("both.tsv");
    let body = |path: &Path| std::fs::read_to_string(path).unwrap().lines().skip(1).map(|l| format!("{l}\n")).collect::<String>();
    std::fs::write(&both, format!("schwa-lexicon v1\n{}{}", body(&a), body(&b))).unwrap();

    let split = kv(&ok(&["--format", "kv", "stats", p(&a), p(&b)]));
    let joined = kv(&ok(&["--format", "kv", "stats", p(&both)]));
    for key in ["entries", "schwas", "deleted", "weak", "discarded"] {
        let total = &split[&format!("total.{key}")];
        assert_eq!(total, &joined[&format!("{}.{key}", p(&both))], "{key}");
        let sum: usize = [&a, &b].iter().map(|f| split[&format!("{}.{key}", p(f))].parse::<usize>().unwrap()).sum();
        assert_eq!(total, &sum.to_string());
    }

    let empty = dir.path().join("empty.tsv");
    std::fs::write(&empty, "").unwrap();
    let table = ok(&["stats", p(&empty)]);
    assert_eq!(table_row(&table, p(&empty)), ["0", "0", "-", "0", "0"]);
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let explicit = dir.path().join("a.tsv");
    let from_env = dir.path().join("b.tsv");
    ok(&["--seed", "11", "synth", "--words", "20", "-o", p(&explicit)]);
    let out = Command::new(env!("CARGO_BIN_EXE_schwa"))
        .args(["synth", "--words", "20", "-o", p(&from_env)])
        .env("SCHWA_SEED", "11")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed=11"));
    assert_eq!(std::fs::read(&explicit).unwrap(), std::fs::read(&from_env).unwrap());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(schwa(&["frobnicate"], None).code, 2);
    assert_eq!(schwa(&["predict", "पेपर"], None).code, 2);
    assert_eq!(schwa(&["transcribe", "--script", "tamil", "x"], None).code, 2);
}
