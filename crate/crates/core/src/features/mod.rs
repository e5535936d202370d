//! Windowed one-hot context features around a schwa.
//!
//! Layout of a feature space with `p = left + right` window positions, ordered
//! `c_{-left} .. c_{-1}, c_{+1} .. c_{+right}`:
//!
//! * `[0, p·|vocab|)`: one symbol group per position, `|vocab|` wide.
//! * `[p·|vocab|, p·(|vocab| + V))`, only with phonological features: one group
//!   of `V` value slots per position (see [`table::value_count`]).
//!
//! The schwa itself is never encoded.

pub mod table;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::SchwaInstance;
use crate::lexicon::LexEntry;
use crate::script::PhoneToken;
pub use table::{FeatureKind, PhonFeatureTable};

/// The feature value for positions beyond either word edge.
pub const BOUNDARY: &str = "#";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub left: usize,
    pub right: usize,
    pub use_phon_features: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { left: 5, right: 5, use_phon_features: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("window sizes must be at least 1 (left {left}, right {right})")]
    EmptyWindow { left: usize, right: usize },
    #[error("feature index {index} out of range for dimension {dimension}")]
    OutOfRange { index: usize, dimension: usize },
    #[error("vocabulary does not contain the boundary symbol")]
    NoBoundary,
}

impl FeatureConfig {
    pub fn new(left: usize, right: usize, use_phon_features: bool) -> Result<Self, FeatureError> {
        let c = FeatureConfig { left, right, use_phon_features };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.left == 0 || self.right == 0 {
            return Err(FeatureError::EmptyWindow { left: self.left, right: self.right });
        }
        Ok(())
    }

    pub fn positions(&self) -> usize {
        self.left + self.right
    }

    /// Window offsets in group order.
    pub fn offsets(&self) -> impl Iterator<Item = isize> {
        let (l, r) = (self.left as isize, self.right as isize);
        (-l..0).chain(1..=r)
    }

    fn offset_of_slot(&self, slot: usize) -> isize {
        if slot < self.left {
            slot as isize - self.left as isize
        } else {
            (slot - self.left) as isize + 1
        }
    }

    fn slot_of_offset(&self, offset: isize) -> Option<usize> {
        if offset < 0 && offset.unsigned_abs() <= self.left {
            Some((self.left as isize + offset) as usize)
        } else if offset > 0 && offset as usize <= self.right {
            Some(self.left + offset as usize - 1)
        } else {
            None
        }
    }
}

/// Sorted symbol list; always contains [`BOUNDARY`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    symbols: Vec<String>,
}

impl Vocabulary {
    /// All symbols of the given (training) orthographies, plus the boundary.
    pub fn build<'a>(entries: impl IntoIterator<Item = &'a LexEntry>) -> Self {
        let mut set: BTreeSet<String> = BTreeSet::new();
        set.insert(BOUNDARY.to_string());
        for e in entries {
            set.extend(e.orth.iter().map(|t| t.symbol.to_string()));
        }
        Vocabulary { symbols: set.into_iter().collect() }
    }

    pub fn from_symbols(symbols: impl IntoIterator<Item = String>) -> Result<Self, FeatureError> {
        let set: BTreeSet<String> = symbols.into_iter().collect();
        if !set.contains(BOUNDARY) {
            return Err(FeatureError::NoBoundary);
        }
        Ok(Vocabulary { symbols: set.into_iter().collect() })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index(&self, symbol: &str) -> Option<usize> {
        self.symbols.binary_search_by(|s| s.as_str().cmp(symbol)).ok()
    }

    /// Index of `symbol`, falling back to the boundary for unseen symbols.
    pub fn index_or_boundary(&self, symbol: &str) -> usize {
        self.index(symbol).or_else(|| self.index(BOUNDARY)).expect("vocabulary contains the boundary")
    }
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = FeatureError;

    fn try_from(symbols: Vec<String>) -> Result<Self, Self::Error> {
        Vocabulary::from_symbols(symbols)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.symbols
    }
}

/// Sparse binary vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureVector {
    active: Vec<u32>,
    dimension: usize,
}

impl FeatureVector {
    /// Sorts and deduplicates `active`.
    pub fn new(mut active: Vec<u32>, dimension: usize) -> Result<Self, FeatureError> {
        active.sort_unstable();
        active.dedup();
        if let Some(&bad) = active.iter().find(|&&i| i as usize >= dimension) {
            return Err(FeatureError::OutOfRange { index: bad as usize, dimension });
        }
        Ok(FeatureVector { active, dimension })
    }

    pub fn active(&self) -> &[u32] {
        &self.active
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn contains(&self, index: usize) -> bool {
        self.active.binary_search(&(index as u32)).is_ok()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.dimension];
        for &i in &self.active {
            dense[i as usize] = 1.0;
        }
        dense
    }
}

/// Everything needed to turn a schwa in context into a vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub config: FeatureConfig,
    pub vocab: Vocabulary,
    pub table: PhonFeatureTable,
}

impl FeatureSpace {
    pub fn new(config: FeatureConfig, vocab: Vocabulary) -> Self {
        FeatureSpace { config, vocab, table: PhonFeatureTable::shipped().clone() }
    }

    fn symbol_block(&self) -> usize {
        self.config.positions() * self.vocab.len()
    }

    pub fn dimension(&self) -> usize {
        let mut d = self.symbol_block();
        if self.config.use_phon_features {
            d += self.config.positions() * table::value_count();
        }
        d
    }

    /// Encodes the context of `orth[index]`.
    pub fn encode(&self, orth: &[PhoneToken], index: usize) -> FeatureVector {
        let v = self.vocab.len();
        let nvals = table::value_count();
        let mut active = Vec::with_capacity(self.config.positions() * 8);
        for (slot, offset) in self.config.offsets().enumerate() {
            let token = index.checked_add_signed(offset).and_then(|p| orth.get(p));
            let symbol = token.map_or(BOUNDARY, |t| t.symbol);
            active.push((slot * v + self.vocab.index_or_boundary(symbol)) as u32);
            if self.config.use_phon_features {
                if let Some(t) = token {
                    let base = self.symbol_block() + slot * nvals;
                    active.extend(self.table.slots(t.symbol).iter().map(|s| (base + s) as u32));
                }
            }
        }
        active.sort_unstable();
        FeatureVector { active, dimension: self.dimension() }
    }

    pub fn encode_instance(&self, instance: &SchwaInstance, entry: &LexEntry) -> FeatureVector {
        debug_assert_eq!(instance.entry_id, entry.id);
        self.encode(&entry.orth, instance.orth_index)
    }

    /// Human-readable name, e.g. `c_{+1}=#` or `c_{-2}.place=velar`.
    pub fn feature_name(&self, index: usize) -> Result<String, FeatureError> {
        let dimension = self.dimension();
        if index >= dimension {
            return Err(FeatureError::OutOfRange { index, dimension });
        }
        let fmt_offset = |slot: usize| {
            let o = self.config.offset_of_slot(slot);
            if o > 0 {
                format!("+{o}")
            } else {
                o.to_string()
            }
        };
        let v = self.vocab.len();
        if index < self.symbol_block() {
            let (slot, sym) = (index / v, index % v);
            return Ok(format!("c_{{{}}}={}", fmt_offset(slot), self.vocab.symbols()[sym]));
        }
        let rest = index - self.symbol_block();
        let nvals = table::value_count();
        let (slot, value) = (rest / nvals, rest % nvals);
        let (kind, value) = table::slot_value(value).expect("slot within value inventory");
        Ok(format!("c_{{{}}}.{}={}", fmt_offset(slot), kind.name(), value))
    }

    /// Inverse of [`FeatureSpace::feature_name`].
    pub fn feature_index(&self, name: &str) -> Option<usize> {
        let rest = name.strip_prefix("c_{")?;
        let (offset, rest) = rest.split_once('}')?;
        let offset: isize = offset.strip_prefix('+').unwrap_or(offset).parse().ok()?;
        let slot = self.config.slot_of_offset(offset)?;
        if let Some(symbol) = rest.strip_prefix('=') {
            return Some(slot * self.vocab.len() + self.vocab.index(symbol)?);
        }
        if !self.config.use_phon_features {
            return None;
        }
        let (kind, value) = rest.strip_prefix('.')?.split_once('=')?;
        let value_slot = table::value_slot(FeatureKind::from_name(kind)?, value)?;
        Some(self.symbol_block() + slot * table::value_count() + value_slot)
    }

    pub fn feature_names(&self) -> Vec<String> {
        (0..self.dimension()).map(|i| self.feature_name(i).expect("index in range")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::{parse_token_string, Side};

    fn entry(id: u64, orth: &str) -> LexEntry {
        let orth = parse_token_string(orth, Side::Orthographic).unwrap();
        LexEntry { id, headword: "w".into(), phon: orth.clone(), orth, source: String::new() }
    }

    fn names(space: &FeatureSpace, v: &FeatureVector) -> Vec<String> {
        v.active().iter().map(|&i| space.feature_name(i as usize).unwrap()).collect()
    }

    #[test]
    fn vocabulary_is_sorted_with_boundary() {
        let v = Vocabulary::build([&entry(0, "k a aa"), &entry(1, "k aa")]);
        assert_eq!(v.symbols(), ["#", "a", "aa", "k"]);
    }

    #[test]
    fn vocabulary_requires_boundary() {
        assert_eq!(Vocabulary::from_symbols(["a".to_string()]), Err(FeatureError::NoBoundary));
        let json = serde_json::to_string(&Vocabulary::build([&entry(0, "k a")])).unwrap();
        assert_eq!(json, r##"["#","a","k"]"##);
        assert!(serde_json::from_str::<Vocabulary>(r#"["a","k"]"#).is_err());
    }

    #[test]
    fn config_rejects_empty_windows() {
        assert!(FeatureConfig::new(0, 1, false).is_err());
        assert!(FeatureConfig::new(1, 0, false).is_err());
        let c = FeatureConfig::new(2, 3, false).unwrap();
        assert_eq!(c.offsets().collect::<Vec<_>>(), [-2, -1, 1, 2, 3]);
    }

    #[test]
    fn pepara_window_one() {
        let e = entry(0, "p e p a r a");
        let space = FeatureSpace::new(FeatureConfig::new(1, 1, false).unwrap(), Vocabulary::build([&e]));
        assert_eq!(names(&space, &space.encode(&e.orth, 3)), ["c_{-1}=p", "c_{+1}=r"]);
        assert_eq!(names(&space, &space.encode(&e.orth, 5)), ["c_{-1}=r", "c_{+1}=#"]);
    }

    #[test]
    fn short_word_is_mostly_boundary() {
        let e = entry(0, "k a");
        let space = FeatureSpace::new(FeatureConfig::default(), Vocabulary::build([&e]));
        let v = space.encode(&e.orth, 1);
        let boundary = names(&space, &v).iter().filter(|n| n.ends_with("=#")).count();
        assert_eq!(v.active().len(), 10);
        assert_eq!(boundary, 9);
        // Two-token word with the schwa first: everything but c_{+1} is padding.
        let e = entry(1, "a k");
        let v = space.encode(&e.orth, 0);
        assert_eq!(names(&space, &v).iter().filter(|n| n.ends_with("=#")).count(), 9);
        let both = FeatureSpace::new(FeatureConfig::default(), Vocabulary::build([&e]));
        let e2 = entry(2, "k a");
        let tokens = [e2.orth[0], e2.orth[1]];
        let v = both.encode(&tokens, 1);
        assert_eq!(names(&both, &v).iter().filter(|n| n.ends_with("=#")).count(), 9);
    }

    #[test]
    fn dimensions() {
        let e = entry(0, "k a aa");
        let space = FeatureSpace::new(FeatureConfig::new(1, 1, false).unwrap(), Vocabulary::build([&e]));
        assert_eq!(space.dimension(), 8);
        let vocab = Vocabulary::from_symbols((0..60).map(|i| if i == 0 { "#".into() } else { format!("s{i}") })).unwrap();
        let space = FeatureSpace::new(FeatureConfig::default(), vocab.clone());
        assert_eq!(space.dimension(), 600);
        let space = FeatureSpace::new(FeatureConfig { use_phon_features: true, ..FeatureConfig::default() }, vocab);
        assert_eq!(space.dimension(), 600 + 10 * 21);
    }

    #[test]
    fn oov_maps_to_boundary() {
        let train = entry(0, "k a");
        let space = FeatureSpace::new(FeatureConfig::new(1, 1, false).unwrap(), Vocabulary::build([&train]));
        let test = entry(1, "gh a k a");
        assert_eq!(names(&space, &space.encode(&test.orth, 1)), ["c_{-1}=#", "c_{+1}=k"]);
        let v = Vocabulary::build([&train]);
        let v2 = Vocabulary::build([&train]);
        assert_eq!(v, v2);
    }

    #[test]
    fn phonological_features_name_table_rows() {
        let e = entry(0, "g kh a l ii");
        let config = FeatureConfig::new(2, 2, true).unwrap();
        let space = FeatureSpace::new(config, Vocabulary::build([&e]));
        let n = names(&space, &space.encode(&e.orth, 2));
        for expected in [
            "c_{-2}=g",
            "c_{-2}.voice=voiced",
            "c_{-2}.aspiration=unaspirated",
            "c_{-2}.place=velar",
            "c_{-1}.aspiration=aspirated",
            "c_{+2}.height=high",
            "c_{+2}.length=long",
        ] {
            assert!(n.iter().any(|x| x == expected), "missing {expected} in {n:?}");
        }
        // 4 symbol groups + 3 consonant features x2 + 4 vowel features x1 (l is consonant: +3).
        assert_eq!(n.len(), 4 + 3 + 3 + 3 + 4);
    }

    #[test]
    fn names_are_bijective() {
        let e = entry(0, "p e p a r a ~ M");
        for config in [FeatureConfig::new(2, 3, false).unwrap(), FeatureConfig::new(3, 1, true).unwrap()] {
            let space = FeatureSpace::new(config, Vocabulary::build([&e]));
            let names = space.feature_names();
            let unique: BTreeSet<_> = names.iter().collect();
            assert_eq!(unique.len(), names.len());
            for (i, n) in names.iter().enumerate() {
                assert_eq!(space.feature_index(n), Some(i), "{n}");
            }
            assert!(space.feature_name(space.dimension()).is_err());
        }
    }
}
