use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::script::{inventory, Category, INVENTORY};

/// The shipped table, `data/phon_features.tsv`.
pub const SHIPPED_TABLE: &str = include_str!("../../data/phon_features.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Height,
    Backness,
    Roundedness,
    Length,
    Voice,
    Aspiration,
    Place,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 7] = [
        FeatureKind::Height,
        FeatureKind::Backness,
        FeatureKind::Roundedness,
        FeatureKind::Length,
        FeatureKind::Voice,
        FeatureKind::Aspiration,
        FeatureKind::Place,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Height => "height",
            FeatureKind::Backness => "backness",
            FeatureKind::Roundedness => "roundedness",
            FeatureKind::Length => "length",
            FeatureKind::Voice => "voice",
            FeatureKind::Aspiration => "aspiration",
            FeatureKind::Place => "place",
        }
    }

    /// The closed value set, in index order.
    pub fn values(self) -> &'static [&'static str] {
        match self {
            FeatureKind::Height => &["high", "mid", "low"],
            FeatureKind::Backness => &["front", "central", "back"],
            FeatureKind::Roundedness => &["rounded", "unrounded"],
            FeatureKind::Length => &["short", "long"],
            FeatureKind::Voice => &["voiced", "voiceless"],
            FeatureKind::Aspiration => &["aspirated", "unaspirated"],
            FeatureKind::Place => &["labial", "dental", "alveolar", "retroflex", "palatal", "velar", "glottal"],
        }
    }

    pub fn applies_to(self, category: Category) -> bool {
        match self {
            FeatureKind::Height | FeatureKind::Backness | FeatureKind::Roundedness | FeatureKind::Length => {
                category == Category::Vowel
            }
            FeatureKind::Voice | FeatureKind::Aspiration | FeatureKind::Place => category == Category::Consonant,
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Position of a (kind, value) pair in the flat value inventory.
pub fn value_slot(kind: FeatureKind, value: &str) -> Option<usize> {
    let mut base = 0;
    for k in FeatureKind::ALL {
        if k == kind {
            return k.values().iter().position(|v| *v == value).map(|i| base + i);
        }
        base += k.values().len();
    }
    None
}

/// Inverse of [`value_slot`].
pub fn slot_value(mut slot: usize) -> Option<(FeatureKind, &'static str)> {
    for k in FeatureKind::ALL {
        let n = k.values().len();
        if slot < n {
            return Some((k, k.values()[slot]));
        }
        slot -= n;
    }
    None
}

/// Total number of distinct feature values across all kinds.
pub fn value_count() -> usize {
    FeatureKind::ALL.iter().map(|k| k.values().len()).sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("no row for inventory symbol `{0}`")]
    MissingRow(&'static str),
}

/// Per-phone phonological features, stored as value slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhonFeatureTable {
    rows: BTreeMap<String, Vec<usize>>,
}

impl PhonFeatureTable {
    pub fn shipped() -> &'static PhonFeatureTable {
        static TABLE: OnceLock<PhonFeatureTable> = OnceLock::new();
        TABLE.get_or_init(|| PhonFeatureTable::parse(SHIPPED_TABLE).expect("shipped feature table is valid"))
    }

    /// Parses the tab-separated table format. Every inventory phone needs a
    /// row, and each row fills exactly the features that apply to its category.
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut rows = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| TableError::Line { line: line_no, message };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 1 + FeatureKind::ALL.len() {
                return Err(err(format!("expected {} columns, found {}", 1 + FeatureKind::ALL.len(), cols.len())));
            }
            let entry = inventory::lookup(cols[0]).ok_or_else(|| err(format!("unknown symbol `{}`", cols[0])))?;
            let mut slots = Vec::new();
            for (kind, raw) in FeatureKind::ALL.into_iter().zip(&cols[1..]) {
                match (*raw, kind.applies_to(entry.category)) {
                    ("-", false) => {}
                    ("-", true) => return Err(err(format!("`{}` is missing {kind}", entry.symbol))),
                    (_, false) => return Err(err(format!("{kind} does not apply to `{}`", entry.symbol))),
                    (value, true) => slots
                        .push(value_slot(kind, value).ok_or_else(|| err(format!("bad {kind} value `{value}`")))?),
                }
            }
            if rows.insert(entry.symbol.to_string(), slots).is_some() {
                return Err(err(format!("duplicate row for `{}`", entry.symbol)));
            }
        }
        if let Some(missing) = INVENTORY.iter().find(|e| !rows.contains_key(e.symbol)) {
            return Err(TableError::MissingRow(missing.symbol));
        }
        Ok(PhonFeatureTable { rows })
    }

    /// Value slots active for a symbol; empty for modifiers and unknown symbols.
    pub fn slots(&self, symbol: &str) -> &[usize] {
        self.rows.get(symbol).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn value(&self, symbol: &str, kind: FeatureKind) -> Option<&'static str> {
        self.slots(symbol).iter().filter_map(|&s| slot_value(s)).find(|(k, _)| *k == kind).map(|(_, v)| v)
    }
}
