//! Deletion-only forced alignment of orthographic and phonemic token sequences.
//!
//! The only edit the aligner accepts is dropping an inherent schwa. Anything
//! else (substituted consonants, inserted phones, a dropped written vowel)
//! fails the alignment, and the entry is discarded rather than guessed at.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lexicon::LexEntry;
use crate::script::{Origin, PhoneToken};

/// Fate of one inherent schwa. The positive class everywhere is `Retained`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Retained,
    Deleted,
}

impl Label {
    pub fn from_retained(retained: bool) -> Self {
        if retained {
            Label::Retained
        } else {
            Label::Deleted
        }
    }

    pub fn is_retained(self) -> bool {
        self == Label::Retained
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Retained => "retained",
            Label::Deleted => "deleted",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "retained" => Some(Label::Retained),
            "deleted" => Some(Label::Deleted),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A labeled schwa position within one token sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignedSchwa {
    pub orth_index: usize,
    pub label: Label,
    pub weak: bool,
}

/// One training example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchwaInstance {
    pub entry_id: u64,
    pub orth_index: usize,
    pub label: Label,
    /// Only set on retained instances.
    pub weak: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    /// Ordered by `orth_index`.
    pub schwas: Vec<AlignedSchwa>,
    /// Token comparisons performed; never exceeds `|orth| + |phon|`.
    pub comparisons: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    /// A non-schwa orthographic token has no phonemic counterpart.
    Mismatch,
    /// A weak phonemic schwa did not line up with an inherent schwa.
    WeakUnmatched,
    /// Phonemic tokens remain after the orthography is exhausted.
    TrailingPhonemic,
    /// An inherent schwa is directly followed by a written `a`, so which of
    /// the two was dropped cannot be decided.
    AdjacentSchwa,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::Mismatch => "mismatch",
            FailureReason::WeakUnmatched => "weak-unmatched",
            FailureReason::TrailingPhonemic => "trailing-phonemic",
            FailureReason::AdjacentSchwa => "adjacent-schwa",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignFailure {
    pub reason: FailureReason,
    pub orth_pos: usize,
    pub phon_pos: usize,
}

impl fmt::Display for AlignFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at orth {} / phon {}", self.reason.as_str(), self.orth_pos, self.phon_pos)
    }
}

impl std::error::Error for AlignFailure {}

fn tokens_match(orth: &PhoneToken, phon: &PhoneToken) -> bool {
    orth.symbol == phon.symbol && (!phon.weak || orth.is_inherent_schwa())
}

/// Two-pointer alignment in `O(|orth| + |phon|)`.
///
/// Matching tokens advance both sides; an unmatched inherent schwa is labeled
/// deleted and only the orthographic side advances.
pub fn align(orth: &[PhoneToken], phon: &[PhoneToken]) -> Result<Alignment, AlignFailure> {
    let mut schwas = Vec::new();
    let mut comparisons = 0;
    let (mut i, mut j) = (0, 0);
    while i < orth.len() {
        let o = &orth[i];
        let fail = |reason| AlignFailure { reason, orth_pos: i, phon_pos: j };
        if o.is_inherent_schwa() && orth.get(i + 1).is_some_and(|next| next.symbol == "a") {
            return Err(fail(FailureReason::AdjacentSchwa));
        }
        if let Some(p) = phon.get(j) {
            comparisons += 1;
            if tokens_match(o, p) {
                if o.is_inherent_schwa() {
                    schwas.push(AlignedSchwa { orth_index: i, label: Label::Retained, weak: p.weak });
                }
                i += 1;
                j += 1;
                continue;
            }
        }
        if o.is_inherent_schwa() {
            schwas.push(AlignedSchwa { orth_index: i, label: Label::Deleted, weak: false });
            i += 1;
            continue;
        }
        let reason = if phon.get(j).is_some_and(|p| p.weak) {
            FailureReason::WeakUnmatched
        } else {
            FailureReason::Mismatch
        };
        return Err(fail(reason));
    }
    if j < phon.len() {
        return Err(AlignFailure { reason: FailureReason::TrailingPhonemic, orth_pos: i, phon_pos: j });
    }
    Ok(Alignment { schwas, comparisons })
}

/// Labels every inherent schwa of an entry, or reports why the entry must be
/// discarded.
pub fn extract_instances(entry: &LexEntry) -> Result<Vec<SchwaInstance>, AlignFailure> {
    let alignment = align(&entry.orth, &entry.phon)?;
    Ok(alignment
        .schwas
        .into_iter()
        .map(|s| SchwaInstance { entry_id: entry.id, orth_index: s.orth_index, label: s.label, weak: s.weak })
        .collect())
}

/// Builds the phonemic sequence implied by a set of labels: deleted schwas are
/// dropped, everything else is copied with phonemic-side origins.
///
/// Inherent schwas without a label are kept.
pub fn realize(orth: &[PhoneToken], labels: &[AlignedSchwa]) -> Vec<PhoneToken> {
    let mut out = Vec::with_capacity(orth.len());
    let mut labels = labels.iter().peekable();
    for (i, tok) in orth.iter().enumerate() {
        let mut tok = *tok;
        while labels.peek().is_some_and(|l| l.orth_index < i) {
            labels.next();
        }
        if let Some(l) = labels.peek().filter(|l| l.orth_index == i) {
            if l.label == Label::Deleted {
                continue;
            }
            tok.weak = l.weak;
        }
        if tok.origin == Origin::InherentSchwa {
            tok.origin = Origin::ExplicitVowel;
        }
        out.push(tok);
    }
    out
}
