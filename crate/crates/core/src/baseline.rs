//! Categorical schwa-deletion rules.
//!
//! A rule looks at the vowel/consonant/boundary categories around a schwa and
//! either deletes or retains it. The first matching rule wins; if none match,
//! the set's default applies. Rules are read against the orthographic word, so
//! a neighbouring schwa counts as a vowel whether or not it is itself deleted.
//!
//! Rule files:
//!
//! ```text
//! # word-final schwa
//! _ # -> delete
//! V C C _ C V -> delete
//! default -> retain
//! ```
//!
//! `_` marks the schwa; `V`, `C` and `#` (beyond the word edge) are the only
//! pattern elements. A line starting with `#` is a comment unless it contains
//! both `_` and `->`, so `# _ -> retain` is still a rule.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::align::{extract_instances, Label};
use crate::eval::{evaluate, Metrics};
use crate::features::FeatureConfig;
use crate::lexicon::LexEntry;
use crate::script::{Category, PhoneToken};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternElem {
    Vowel,
    Consonant,
    Boundary,
}

impl PatternElem {
    /// Nasalization (`~`) rides on a vowel; anusvara and visarga close the
    /// syllable like a consonant would.
    pub fn of(token: &PhoneToken) -> Self {
        match token.category {
            Category::Vowel => PatternElem::Vowel,
            Category::Consonant => PatternElem::Consonant,
            Category::Modifier if token.symbol == "~" => PatternElem::Vowel,
            Category::Modifier => PatternElem::Consonant,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            PatternElem::Vowel => "V",
            PatternElem::Consonant => "C",
            PatternElem::Boundary => "#",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "V" => Some(PatternElem::Vowel),
            "C" => Some(PatternElem::Consonant),
            "#" => Some(PatternElem::Boundary),
            _ => None,
        }
    }
}

/// Categories around one schwa, `left` in reading order ending at `c_{-1}`,
/// `right` starting at `c_{+1}`. Positions past either edge are `Boundary`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryContext {
    pub left: Vec<PatternElem>,
    pub right: Vec<PatternElem>,
}

impl CategoryContext {
    pub fn from_orth(orth: &[PhoneToken], index: usize, left: usize, right: usize) -> Self {
        let at = |p: Option<usize>| p.and_then(|p| orth.get(p)).map_or(PatternElem::Boundary, PatternElem::of);
        CategoryContext {
            left: (1..=left).rev().map(|d| at(index.checked_sub(d))).collect(),
            right: (1..=right).map(|d| at(Some(index + d))).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub left: Vec<PatternElem>,
    pub right: Vec<PatternElem>,
    pub action: Label,
}

impl Rule {
    pub fn matches(&self, ctx: &CategoryContext) -> bool {
        self.left.len() <= ctx.left.len()
            && self.right.len() <= ctx.right.len()
            && ctx.left.ends_with(&self.left)
            && ctx.right.starts_with(&self.right)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.left {
            write!(f, "{} ", e.as_str())?;
        }
        f.write_str("_")?;
        for e in &self.right {
            write!(f, " {}", e.as_str())?;
        }
        write!(f, " -> {}", action_word(self.action))
    }
}

fn action_word(label: Label) -> &'static str {
    match label {
        Label::Deleted => "delete",
        Label::Retained => "retain",
    }
}

fn parse_action(s: &str) -> Option<Label> {
    match s {
        "delete" | "deleted" => Some(Label::Deleted),
        "retain" | "retained" => Some(Label::Retained),
        _ => None,
    }
}

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("rule file line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("cannot read rule file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("rules look {needed} positions to the {side} but the window only has {available}")]
    Window { side: &'static str, needed: usize, available: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    pub default: Label,
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet::shipped()
    }
}

impl RuleSet {
    /// Word-final deletion, then `V C C _ C V` deletion, otherwise retain.
    pub fn shipped() -> Self {
        use PatternElem::*;
        RuleSet {
            rules: vec![
                Rule { left: vec![], right: vec![Boundary], action: Label::Deleted },
                Rule { left: vec![Vowel, Consonant, Consonant], right: vec![Consonant, Vowel], action: Label::Deleted },
            ],
            default: Label::Retained,
        }
    }

    /// Retains every schwa.
    pub fn retain_all() -> Self {
        RuleSet { rules: vec![], default: Label::Retained }
    }

    pub fn parse(text: &str) -> Result<Self, RuleError> {
        let mut rules = Vec::new();
        let mut default = None;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.trim();
            if body.is_empty() || (body.starts_with('#') && !(body.contains("->") && body.contains('_'))) {
                continue;
            }
            let err = |message: String| RuleError::Syntax { line, message };
            let (pattern, action) = body.split_once("->").ok_or_else(|| err("missing `->`".into()))?;
            let action = parse_action(action.trim())
                .ok_or_else(|| err(format!("action must be `delete` or `retain`, found `{}`", action.trim())))?;
            let pattern = pattern.trim();
            if pattern == "default" {
                if default.replace(action).is_some() {
                    return Err(err("second `default` line".into()));
                }
                continue;
            }
            let words: Vec<&str> = pattern.split_whitespace().collect();
            let hole = match words.iter().filter(|w| **w == "_").count() {
                1 => words.iter().position(|w| *w == "_").unwrap(),
                k => return Err(err(format!("pattern needs exactly one `_`, found {k}"))),
            };
            let elems = |ws: &[&str]| -> Result<Vec<PatternElem>, RuleError> {
                ws.iter()
                    .map(|w| PatternElem::parse(w).ok_or_else(|| err(format!("unknown pattern element `{w}`"))))
                    .collect()
            };
            rules.push(Rule { left: elems(&words[..hole])?, right: elems(&words[hole + 1..])?, action });
        }
        Ok(RuleSet { rules, default: default.unwrap_or(Label::Retained) })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RuleError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| RuleError::Io { path: path.to_path_buf(), source })?;
        RuleSet::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out: String = self.rules.iter().map(|r| format!("{r}\n")).collect();
        out.push_str(&format!("default -> {}\n", action_word(self.default)));
        out
    }

    /// How far the rules look to the left and to the right.
    pub fn window(&self) -> (usize, usize) {
        let left = self.rules.iter().map(|r| r.left.len()).max().unwrap_or(0);
        let right = self.rules.iter().map(|r| r.right.len()).max().unwrap_or(0);
        (left, right)
    }

    pub fn check_window(&self, config: &FeatureConfig) -> Result<(), RuleError> {
        let (left, right) = self.window();
        if left > config.left {
            return Err(RuleError::Window { side: "left", needed: left, available: config.left });
        }
        if right > config.right {
            return Err(RuleError::Window { side: "right", needed: right, available: config.right });
        }
        Ok(())
    }

    pub fn context(&self, orth: &[PhoneToken], index: usize) -> CategoryContext {
        let (left, right) = self.window();
        CategoryContext::from_orth(orth, index, left, right)
    }

    /// Label for the schwa at `orth[index]`.
    pub fn predict(&self, orth: &[PhoneToken], index: usize) -> Label {
        rule_predict(self, &self.context(orth, index))
    }
}

/// First matching rule wins.
pub fn rule_predict(rules: &RuleSet, ctx: &CategoryContext) -> Label {
    rules.rules.iter().find(|r| r.matches(ctx)).map_or(rules.default, |r| r.action)
}

/// Applies `rules` to every schwa of every alignable entry.
pub fn evaluate_baseline(rules: &RuleSet, entries: &[LexEntry]) -> Metrics {
    let mut gold = Vec::new();
    let mut predictions = Vec::new();
    for entry in entries {
        let Ok(instances) = extract_instances(entry) else { continue };
        for inst in instances {
            predictions.push(rules.predict(&entry.orth, inst.orth_index));
            gold.push(inst);
        }
    }
    evaluate(&predictions, &gold).expect("one prediction per instance")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::{parse_token_string, Side};
    use proptest::prelude::*;

    fn orth(s: &str) -> Vec<PhoneToken> {
        parse_token_string(s, Side::Orthographic).unwrap()
    }

    #[test]
    fn final_schwa_of_pepar_is_deleted() {
        let w = orth("p e p a r a");
        assert_eq!(RuleSet::shipped().predict(&w, 5), Label::Deleted);
        assert_eq!(RuleSet::shipped().predict(&w, 3), Label::Retained);
    }

    #[test]
    fn medial_schwa_of_jangli_is_deleted() {
        let w = orth("j a M g a l ii");
        let rules = RuleSet::shipped();
        assert_eq!(rules.predict(&w, 4), Label::Deleted);
        assert_eq!(rules.predict(&w, 1), Label::Retained);
    }

    #[test]
    fn table_entry_third_token_is_a_baseline_miss() {
        let w = orth("a ~ k a rr aa h a tt a");
        let rules = RuleSet::shipped();
        let got: Vec<Label> = [3, 7, 9].iter().map(|&i| rules.predict(&w, i)).collect();
        assert_eq!(got, [Label::Retained, Label::Retained, Label::Deleted]);
    }

    #[test]
    fn context_pads_with_boundary() {
        let w = orth("k a");
        let ctx = CategoryContext::from_orth(&w, 1, 3, 2);
        use PatternElem::*;
        assert_eq!(ctx.left, [Boundary, Boundary, Consonant]);
        assert_eq!(ctx.right, [Boundary, Boundary]);
    }

    #[test]
    fn text_round_trip() {
        let rules = RuleSet::shipped();
        assert_eq!(rules.to_text(), "_ # -> delete\nV C C _ C V -> delete\ndefault -> retain\n");
        assert_eq!(RuleSet::parse(&rules.to_text()).unwrap(), rules);
        let written = "# comment\n_ # -> delete\n\nV C C _ C V -> delete\ndefault -> retain\n";
        assert_eq!(RuleSet::parse(written).unwrap(), rules);
    }

    #[test]
    fn syntax_errors() {
        for (text, line) in [
            ("_ # delete", 1),
            ("\nV _ _ -> delete", 2),
            ("V X _ -> delete", 1),
            ("_ -> maybe", 1),
            ("default -> retain\ndefault -> delete", 2),
        ] {
            match RuleSet::parse(text) {
                Err(RuleError::Syntax { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn window_check() {
        let rules = RuleSet::shipped();
        assert!(rules.check_window(&FeatureConfig::default()).is_ok());
        let narrow = FeatureConfig::new(2, 2, false).unwrap();
        assert!(matches!(rules.check_window(&narrow), Err(RuleError::Window { side: "left", needed: 3, .. })));
    }

    #[test]
    fn all_retain_scores_one_minus_deletion_rate() {
        let text = "x\tk a l a m a\tk a l m\nx\tp e p a r a\tp e p a r\nx\tk a\tk a\n";
        let lex = crate::lexicon::parse_lexicon_str(&format!("{}\n{text}", crate::lexicon::HEADER)).unwrap();
        let s = crate::lexicon::stats(&lex.entries);
        let m = evaluate_baseline(&RuleSet::retain_all(), &lex.entries);
        assert_eq!(m.accuracy(), Some(1.0 - s.deletion_rate().unwrap()));
    }

    fn elem() -> impl Strategy<Value = PatternElem> {
        prop_oneof![Just(PatternElem::Vowel), Just(PatternElem::Consonant), Just(PatternElem::Boundary)]
    }

    fn rule() -> impl Strategy<Value = Rule> {
        (prop::collection::vec(elem(), 0..4), prop::collection::vec(elem(), 0..4), any::<bool>())
            .prop_map(|(left, right, r)| Rule { left, right, action: Label::from_retained(r) })
    }

    /// True when some aligned position requires different elements, so no
    /// context can satisfy both rules.
    fn disjoint(a: &Rule, b: &Rule) -> bool {
        let left = a.left.iter().rev().zip(b.left.iter().rev()).any(|(x, y)| x != y);
        let right = a.right.iter().zip(&b.right).any(|(x, y)| x != y);
        left || right
    }

    proptest! {
        #[test]
        fn swapping_disjoint_neighbours_is_harmless(
            rules in prop::collection::vec(rule(), 2..6),
            at in 0usize..5,
            contexts in prop::collection::vec(
                (prop::collection::vec(elem(), 4), prop::collection::vec(elem(), 4)), 1..30),
        ) {
            let at = at % (rules.len() - 1);
            prop_assume!(disjoint(&rules[at], &rules[at + 1]));
            let a = RuleSet { rules: rules.clone(), default: Label::Retained };
            let mut swapped = rules;
            swapped.swap(at, at + 1);
            let b = RuleSet { rules: swapped, default: Label::Retained };
            for (left, right) in contexts {
                let ctx = CategoryContext { left, right };
                prop_assert_eq!(rule_predict(&a, &ctx), rule_predict(&b, &ctx));
            }
        }

        #[test]
        fn final_rule_fires_iff_next_is_boundary(
            syms in prop::collection::vec(prop::sample::select(vec!["k", "t", "aa", "i", "M", "r"]), 0..6),
        ) {
            let mut w: Vec<&str> = vec!["k", "a"];
            w.extend(syms);
            let tokens = orth(&w.join(" "));
            let final_only = RuleSet { rules: vec![RuleSet::shipped().rules[0].clone()], default: Label::Retained };
            let fired = final_only.predict(&tokens, 1) == Label::Deleted;
            prop_assert_eq!(fired, tokens.len() == 2);
        }
    }
}
