//! Pronunciation-lexicon files: parsing, writing, splitting and summary stats.
//!
//! File format (UTF-8):
//!
//! ```text
//! schwa-lexicon v1
//! # comment
//! <headword>\t<orthographic tokens>\t<phonemic tokens>[\t<source>]
//! ```

use std::fs;
use std::io::{self, Write};
use std::ops::{Add, AddAssign};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{extract_instances, Label};
use crate::script::{parse_token_string, render, PhoneToken, Side, UnknownToken};

pub const HEADER: &str = "schwa-lexicon v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    /// Position among the accepted entries of the file it came from.
    pub id: u64,
    pub headword: String,
    pub orth: Vec<PhoneToken>,
    pub phon: Vec<PhoneToken>,
    /// Dictionary tag; empty when the file has no fourth column.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    ColumnCount(usize),
    EmptyHeadword,
    EmptyTokens(Side),
    UnknownToken { side: Side, token: String, position: usize },
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let side_name = |s: &Side| match s {
            Side::Orthographic => "orthographic",
            Side::Phonemic => "phonemic",
        };
        match self {
            RejectReason::ColumnCount(n) => write!(f, "expected 3 or 4 tab-separated columns, found {n}"),
            RejectReason::EmptyHeadword => f.write_str("empty headword"),
            RejectReason::EmptyTokens(side) => write!(f, "empty {} column", side_name(side)),
            RejectReason::UnknownToken { side, token, position } => {
                write!(f, "unknown {} token `{token}` at token {position}", side_name(side))
            }
        }
    }
}

/// A line that could not be turned into an entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejected {
    /// 1-based line number.
    pub line: usize,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedLexicon {
    pub entries: Vec<LexEntry>,
    pub rejects: Vec<Rejected>,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("bad lexicon header: expected `{HEADER}`, found `{found}`")]
    Format { found: String },
    #[error("entry {id} cannot be written: {reason}")]
    Unwritable { id: u64, reason: &'static str },
}

/// Reads and parses a lexicon file.
pub fn parse_lexicon(path: impl AsRef<Path>) -> Result<ParsedLexicon, LexiconError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| LexiconError::Io { path: path.to_path_buf(), source })?;
    parse_lexicon_str(&text)
}

/// Parses lexicon text. A zero-length input is an empty lexicon; any other
/// input must start with the header line.
pub fn parse_lexicon_str(text: &str) -> Result<ParsedLexicon, LexiconError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut parsed = ParsedLexicon::default();
    if text.is_empty() {
        return Ok(parsed);
    }
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().trim_end_matches('\r');
    if header != HEADER {
        return Err(LexiconError::Format { found: header.chars().take(64).collect() });
    }
    for (i, raw) in lines.enumerate() {
        let line_no = i + 2;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_line(line, parsed.entries.len() as u64) {
            Ok(entry) => parsed.entries.push(entry),
            Err(reason) => parsed.rejects.push(Rejected { line: line_no, reason }),
        }
    }
    Ok(parsed)
}

fn parse_line(line: &str, id: u64) -> Result<LexEntry, RejectReason> {
    let cols: Vec<&str> = line.split('\t').collect();
    if !(3..=4).contains(&cols.len()) {
        return Err(RejectReason::ColumnCount(cols.len()));
    }
    let headword = cols[0].trim();
    if headword.is_empty() {
        return Err(RejectReason::EmptyHeadword);
    }
    let tokens = |s: &str, side| -> Result<Vec<PhoneToken>, RejectReason> {
        let s = s.trim();
        if s.is_empty() {
            return Err(RejectReason::EmptyTokens(side));
        }
        parse_token_string(s, side).map_err(|UnknownToken { token, position }| RejectReason::UnknownToken {
            side,
            token,
            position,
        })
    };
    let orth = tokens(cols[1], Side::Orthographic)?;
    let phon = tokens(cols[2], Side::Phonemic)?;
    Ok(LexEntry {
        id,
        headword: headword.to_string(),
        orth,
        phon,
        source: cols.get(3).map(|s| s.trim().to_string()).unwrap_or_default(),
    })
}

/// Writes entries in canonical form: header, then one line per entry.
pub fn write_lexicon_to<W: Write>(entries: &[LexEntry], mut out: W) -> Result<(), LexiconError> {
    let io_err = |source| LexiconError::Io { path: PathBuf::from("<output>"), source };
    writeln!(out, "{HEADER}").map_err(io_err)?;
    for e in entries {
        let bad = |reason| LexiconError::Unwritable { id: e.id, reason };
        if e.headword.is_empty() || e.headword.trim() != e.headword || e.headword.contains(['\t', '\n', '\r']) {
            return Err(bad("headword must be nonempty without tabs, newlines or edge whitespace"));
        }
        if e.orth.is_empty() || e.phon.is_empty() {
            return Err(bad("token columns must be nonempty"));
        }
        if e.source.trim() != e.source || e.source.contains(['\t', '\n', '\r']) {
            return Err(bad("source must not contain tabs, newlines or edge whitespace"));
        }
        write!(out, "{}\t{}\t{}", e.headword, render(&e.orth), render(&e.phon)).map_err(io_err)?;
        if !e.source.is_empty() {
            write!(out, "\t{}", e.source).map_err(io_err)?;
        }
        writeln!(out).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn write_lexicon(entries: &[LexEntry], path: impl AsRef<Path>) -> Result<(), LexiconError> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_lexicon_to(entries, &mut buf)?;
    fs::write(path, buf).map_err(|source| LexiconError::Io { path: path.to_path_buf(), source })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("split fractions must be nonnegative and sum to 1, got ({0}, {1}, {2})")]
    BadFractions(f64, f64, f64),
    #[error("cannot split an empty lexicon")]
    Empty,
}

impl SplitSpec {
    pub fn new(train: f64, dev: f64, test: f64, seed: u64) -> Result<Self, SplitError> {
        let ok = [train, dev, test].iter().all(|f| f.is_finite() && *f >= 0.0)
            && (train + dev + test - 1.0).abs() <= 1e-9;
        if !ok {
            return Err(SplitError::BadFractions(train, dev, test));
        }
        Ok(SplitSpec { train, dev, test, seed })
    }

    /// Set sizes for `n` items by largest remainder; each is within 1 of
    /// `fraction * n`.
    pub fn sizes(&self, n: usize) -> [usize; 3] {
        let fractions = [self.train, self.dev, self.test];
        let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
        let mut sizes: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        let assigned: usize = sizes.iter().sum();
        for &k in order.iter().take(n.saturating_sub(assigned)) {
            sizes[k] += 1;
        }
        // Floating error can push the floors past n by one.
        while sizes.iter().sum::<usize>() > n {
            let k = (0..3).rev().find(|&k| sizes[k] > 0).expect("sum > n > = 0");
            sizes[k] -= 1;
        }
        [sizes[0], sizes[1], sizes[2]]
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { train: 0.8, dev: 0.1, test: 0.1, seed: 0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexiconSplit {
    pub train: Vec<LexEntry>,
    pub dev: Vec<LexEntry>,
    pub test: Vec<LexEntry>,
}

/// Entry-level seeded split. Each part keeps the input order.
pub fn split_lexicon(entries: &[LexEntry], spec: &SplitSpec) -> Result<LexiconSplit, SplitError> {
    let assignment = split_assignment(entries.len(), spec)?;
    let mut split = LexiconSplit::default();
    for (entry, part) in entries.iter().zip(assignment) {
        match part {
            0 => split.train.push(entry.clone()),
            1 => split.dev.push(entry.clone()),
            _ => split.test.push(entry.clone()),
        }
    }
    Ok(split)
}

/// Which part (0 train, 1 dev, 2 test) each of `n` items lands in.
pub fn split_assignment(n: usize, spec: &SplitSpec) -> Result<Vec<u8>, SplitError> {
    if n == 0 {
        return Err(SplitError::Empty);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let [train, dev, _] = spec.sizes(n);
    let mut assignment = vec![2u8; n];
    for (rank, &idx) in order.iter().enumerate() {
        if rank < train {
            assignment[idx] = 0;
        } else if rank < train + dev {
            assignment[idx] = 1;
        }
    }
    Ok(assignment)
}

/// Dataset summary in the shape of a corpus-statistics table row.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LexiconStats {
    /// Entries that aligned.
    pub entry_count: usize,
    pub schwa_count: usize,
    pub deleted_count: usize,
    pub weak_count: usize,
    pub discarded_count: usize,
}

impl LexiconStats {
    pub fn deletion_rate(&self) -> Option<f64> {
        (self.schwa_count > 0).then(|| self.deleted_count as f64 / self.schwa_count as f64)
    }
}

impl Add for LexiconStats {
    type Output = LexiconStats;

    fn add(self, o: LexiconStats) -> LexiconStats {
        LexiconStats {
            entry_count: self.entry_count + o.entry_count,
            schwa_count: self.schwa_count + o.schwa_count,
            deleted_count: self.deleted_count + o.deleted_count,
            weak_count: self.weak_count + o.weak_count,
            discarded_count: self.discarded_count + o.discarded_count,
        }
    }
}

impl AddAssign for LexiconStats {
    fn add_assign(&mut self, o: LexiconStats) {
        *self = *self + o;
    }
}

/// Aligns every entry and counts schwas. Unalignable entries are counted as
/// discarded and contribute nothing else.
pub fn stats(entries: &[LexEntry]) -> LexiconStats {
    let mut s = LexiconStats::default();
    for e in entries {
        match extract_instances(e) {
            Ok(instances) => {
                s.entry_count += 1;
                s.schwa_count += instances.len();
                s.deleted_count += instances.iter().filter(|i| i.label == Label::Deleted).count();
                s.weak_count += instances.iter().filter(|i| i.weak).count();
            }
            Err(_) => s.discarded_count += 1,
        }
    }
    s
}
