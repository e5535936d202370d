//! Human-readable rendering of boosted trees, and a reader that evaluates the
//! rendered text directly.
//!
//! ```text
//! base_score -0.11778303565638346
//! tree 0
//! if c_{+1}=# then score -0.0461
//! else
//!   if c_{-1}=r then score +0.0123
//!   else score +0.0345
//! ```
//!
//! Scores are contributions to the log-odds of *retaining* the schwa, so a
//! positive score penalizes deletion. Numbers are printed in shortest
//! round-trip form, so reading a dump back loses nothing.

use std::collections::HashSet;
use std::fmt::Write;

use thiserror::Error;

use super::gbdt::{GbdtModel, Node};
use super::ModelError;

/// Renders every tree of `model` using `names[i]` for feature `i`.
pub fn dump_trees(model: &GbdtModel, names: &[String]) -> Result<String, ModelError> {
    if names.len() != model.dimension {
        return Err(ModelError::NameTableMismatch { expected: model.dimension, found: names.len() });
    }
    let mut out = String::new();
    let _ = writeln!(out, "base_score {:+}", model.base_score);
    for (t, tree) in model.trees.iter().enumerate() {
        let _ = writeln!(out, "tree {t}");
        render(&tree.nodes, 0, 0, names, &mut out);
    }
    Ok(out)
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn render(nodes: &[Node], i: usize, depth: usize, names: &[String], out: &mut String) {
    match nodes[i] {
        Node::Leaf { value } => {
            indent(out, depth);
            let _ = writeln!(out, "score {value:+}");
        }
        Node::Split { feature, inactive, active } => {
            let head = format!("if {} then", names[feature as usize]);
            branch(nodes, active as usize, depth, &head, names, out);
            branch(nodes, inactive as usize, depth, "else", names, out);
        }
    }
}

fn branch(nodes: &[Node], child: usize, depth: usize, head: &str, names: &[String], out: &mut String) {
    indent(out, depth);
    match nodes[child] {
        Node::Leaf { value } => {
            let _ = writeln!(out, "{head} score {value:+}");
        }
        Node::Split { .. } => {
            let _ = writeln!(out, "{head}");
            render(nodes, child, depth + 1, names, out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("tree dump line {line}: {message}")]
pub struct DumpParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RuleNode {
    Score(f64),
    If { condition: String, then: Box<RuleNode>, otherwise: Box<RuleNode> },
}

impl RuleNode {
    pub fn eval(&self, active: &HashSet<&str>) -> f64 {
        match self {
            RuleNode::Score(v) => *v,
            RuleNode::If { condition, then, otherwise } => {
                if active.contains(condition.as_str()) {
                    then.eval(active)
                } else {
                    otherwise.eval(active)
                }
            }
        }
    }
}

/// A parsed dump; evaluates rules by feature *name*.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleDump {
    pub base_score: f64,
    pub trees: Vec<RuleNode>,
}

impl RuleDump {
    pub fn parse(text: &str) -> Result<Self, DumpParseError> {
        let lines: Vec<(usize, usize, &str)> = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                let body = l.trim_start_matches(' ');
                (i + 1, (l.len() - body.len()) / 2, body)
            })
            .collect();
        let mut p = Parser { lines, pos: 0 };
        let (line, _, first) = p.next("base_score line")?;
        let base_score = first
            .strip_prefix("base_score ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| DumpParseError { line, message: "expected `base_score <value>`".into() })?;
        let mut trees = Vec::new();
        while p.pos < p.lines.len() {
            let (line, depth, head) = p.next("tree header")?;
            if depth != 0 || head != format!("tree {}", trees.len()) {
                return Err(DumpParseError { line, message: format!("expected `tree {}`", trees.len()) });
            }
            trees.push(p.node(0)?);
        }
        Ok(RuleDump { base_score, trees })
    }

    pub fn margin(&self, active: &HashSet<&str>) -> f64 {
        let mut f = self.base_score;
        for t in &self.trees {
            f += t.eval(active);
        }
        f
    }

    pub fn probability(&self, active: &HashSet<&str>) -> f64 {
        1.0 / (1.0 + (-self.margin(active)).exp())
    }
}

struct Parser<'a> {
    lines: Vec<(usize, usize, &'a str)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, usize, &'a str), DumpParseError> {
        let line = self.lines.get(self.pos).copied();
        self.pos += 1;
        line.ok_or_else(|| DumpParseError { line: 0, message: format!("unexpected end, expected {what}") })
    }

    fn score(line: usize, s: &str) -> Result<f64, DumpParseError> {
        s.strip_prefix("score ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| DumpParseError { line, message: format!("expected `score <value>`, found `{s}`") })
    }

    fn node(&mut self, depth: usize) -> Result<RuleNode, DumpParseError> {
        let (line, d, body) = self.next("rule")?;
        if d != depth {
            return Err(DumpParseError { line, message: format!("expected indent {depth}, found {d}") });
        }
        let Some(rest) = body.strip_prefix("if ") else {
            return Self::score(line, body).map(RuleNode::Score);
        };
        let (condition, then) = match rest.split_once(" then score ") {
            Some((c, v)) => (c, RuleNode::Score(Self::score(line, &format!("score {v}"))?)),
            None => {
                let c = rest
                    .strip_suffix(" then")
                    .ok_or_else(|| DumpParseError { line, message: "expected `then`".into() })?;
                (c, self.node(depth + 1)?)
            }
        };
        let (line, d, body) = self.next("else")?;
        if d != depth {
            return Err(DumpParseError { line, message: format!("expected `else` at indent {depth}") });
        }
        let otherwise = if body == "else" {
            self.node(depth + 1)?
        } else {
            let v = body
                .strip_prefix("else ")
                .ok_or_else(|| DumpParseError { line, message: format!("expected `else`, found `{body}`") })?;
            RuleNode::Score(Self::score(line, v)?)
        };
        Ok(RuleNode::If { condition: condition.to_string(), then: Box::new(then), otherwise: Box::new(otherwise) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::gbdt::Tree;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn stump_is_two_lines() {
        let tree = Tree {
            nodes: vec![
                Node::Split { feature: 1, inactive: 1, active: 2 },
                Node::Leaf { value: 0.25 },
                Node::Leaf { value: -0.5 },
            ],
        };
        let m = GbdtModel { dimension: 2, base_score: 0.0, shrinkage: 0.1, max_depth: 1, trees: vec![tree] };
        let text = dump_trees(&m, &names(2)).unwrap();
        assert_eq!(text, "base_score +0\ntree 0\nif f1 then score -0.5\nelse score +0.25\n");
        let rules: Vec<&str> = text.lines().skip(2).collect();
        assert_eq!(rules.len(), 2);
    }

    #[test]
    fn empty_model_notes_base_score() {
        let m = GbdtModel { dimension: 1, base_score: -0.125, shrinkage: 0.1, max_depth: 3, trees: vec![] };
        assert_eq!(dump_trees(&m, &names(1)).unwrap(), "base_score -0.125\n");
        let parsed = RuleDump::parse("base_score -0.125\n").unwrap();
        assert_eq!(parsed, RuleDump { base_score: -0.125, trees: vec![] });
    }

    #[test]
    fn name_table_must_cover_dimension() {
        let m = GbdtModel { dimension: 3, base_score: 0.0, shrinkage: 0.1, max_depth: 3, trees: vec![] };
        assert!(matches!(dump_trees(&m, &names(2)), Err(ModelError::NameTableMismatch { expected: 3, found: 2 })));
    }

    #[test]
    fn nested_round_trip() {
        let tree = Tree {
            nodes: vec![
                Node::Split { feature: 0, inactive: 1, active: 4 },
                Node::Split { feature: 2, inactive: 2, active: 3 },
                Node::Leaf { value: 0.1 },
                Node::Leaf { value: -0.2 },
                Node::Leaf { value: 1e-17 },
            ],
        };
        let m = GbdtModel { dimension: 3, base_score: 0.3, shrinkage: 0.1, max_depth: 2, trees: vec![tree.clone(), tree] };
        let text = dump_trees(&m, &names(3)).unwrap();
        let parsed = RuleDump::parse(&text).unwrap();
        assert_eq!(parsed.trees.len(), 2);
        for active in [vec![], vec!["f0"], vec!["f2"], vec!["f0", "f2"]] {
            let set: HashSet<&str> = active.into_iter().collect();
            let idx: Vec<u32> = set.iter().map(|n| n[1..].parse().unwrap()).collect();
            let x = crate::features::FeatureVector::new(idx, 3).unwrap();
            assert_eq!(parsed.margin(&set), m.margin(&x));
        }
    }

    #[test]
    fn parse_errors_name_lines() {
        assert!(RuleDump::parse("").is_err());
        let err = RuleDump::parse("base_score +0\ntree 0\nif f1 then score +1\n").unwrap_err();
        assert!(err.message.contains("end"));
        let err = RuleDump::parse("base_score +0\ntree 1\nscore +1\n").unwrap_err();
        assert_eq!(err.line, 2);
    }
}
