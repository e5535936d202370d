//! Abugida decoding for Devanagari and Gurmukhi.
//!
//! A consonant letter with no following vowel sign or virama decodes to the
//! consonant plus an inherent schwa token, which is the only kind of token the
//! rest of the pipeline treats as a deletion candidate.

pub mod inventory;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use inventory::{Category, InventoryEntry, INVENTORY};
use inventory::{find_action, DecodeAction};

/// The weakened-schwa spelling used on the phonemic side of lexicon files.
pub const WEAK_SCHWA: &str = "a_w";

/// Where a token came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    InherentSchwa,
    ExplicitVowel,
    Consonant,
    Modifier,
}

/// One orthographic or phonemic unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhoneToken {
    pub symbol: &'static str,
    pub category: Category,
    pub origin: Origin,
    /// Weakened schwa; only ever set on phonemic-side `a` tokens.
    pub weak: bool,
}

impl PhoneToken {
    fn from_entry(entry: &'static InventoryEntry, origin: Origin) -> Self {
        PhoneToken { symbol: entry.symbol, category: entry.category, origin, weak: false }
    }

    /// Token for an inventory symbol with the origin implied by its category.
    /// Vowels come out as explicit vowels.
    pub fn new(symbol: &str) -> Option<Self> {
        let entry = inventory::lookup(symbol)?;
        let origin = match entry.category {
            Category::Consonant => Origin::Consonant,
            Category::Vowel => Origin::ExplicitVowel,
            Category::Modifier => Origin::Modifier,
        };
        Some(Self::from_entry(entry, origin))
    }

    pub fn inherent_schwa() -> Self {
        PhoneToken { symbol: "a", category: Category::Vowel, origin: Origin::InherentSchwa, weak: false }
    }

    pub fn weak_schwa() -> Self {
        PhoneToken { symbol: "a", category: Category::Vowel, origin: Origin::ExplicitVowel, weak: true }
    }

    pub fn is_inherent_schwa(&self) -> bool {
        self.origin == Origin::InherentSchwa
    }

    /// The token as written in token strings (`a_w` for weak schwas).
    pub fn spelling(&self) -> &'static str {
        if self.weak {
            WEAK_SCHWA
        } else {
            self.symbol
        }
    }
}

impl fmt::Display for PhoneToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.spelling())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Script {
    Devanagari,
    Gurmukhi,
}

impl FromStr for Script {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "devanagari" | "deva" | "hindi" | "hi" => Ok(Script::Devanagari),
            "gurmukhi" | "guru" | "punjabi" | "pa" => Ok(Script::Gurmukhi),
            other => Err(format!("unknown script `{other}` (expected devanagari or gurmukhi)")),
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Script::Devanagari => "devanagari",
            Script::Gurmukhi => "gurmukhi",
        })
    }
}

/// Which column of a lexicon entry a token string belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Orthographic,
    Phonemic,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("unknown codepoint {ch:?} (U+{:04X}) at position {position}", *ch as u32)]
    UnknownCodepoint { ch: char, position: usize },
    #[error("misplaced mark {ch:?} (U+{:04X}) at position {position}", *ch as u32)]
    MisplacedMark { ch: char, position: usize },
}

impl DecodeError {
    pub fn position(&self) -> usize {
        match self {
            DecodeError::UnknownCodepoint { position, .. } | DecodeError::MisplacedMark { position, .. } => *position,
        }
    }

    fn shifted(self, offset: usize) -> Self {
        match self {
            DecodeError::UnknownCodepoint { ch, position } => {
                DecodeError::UnknownCodepoint { ch, position: position + offset }
            }
            DecodeError::MisplacedMark { ch, position } => DecodeError::MisplacedMark { ch, position: position + offset },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown token `{token}` at position {position}")]
pub struct UnknownToken {
    pub token: String,
    pub position: usize,
}

struct ScriptTables {
    map: &'static [(char, DecodeAction)],
    nukta: &'static [(&'static str, &'static str)],
}

const DEVANAGARI: ScriptTables = ScriptTables { map: inventory::DEVANAGARI_MAP, nukta: inventory::DEVANAGARI_NUKTA };
const GURMUKHI: ScriptTables = ScriptTables { map: inventory::GURMUKHI_MAP, nukta: inventory::GURMUKHI_NUKTA };

enum State {
    Idle,
    /// A consonant was just emitted; `copies` is 2 after an addak.
    Consonant { copies: usize },
    Carrier { default: Option<&'static str>, ch: char, position: usize },
}

fn token(symbol: &str) -> PhoneToken {
    PhoneToken::new(symbol).expect("decode tables emit inventory symbols")
}

fn decode_with(tables: &ScriptTables, text: &str) -> Result<Vec<PhoneToken>, DecodeError> {
    let mut out: Vec<PhoneToken> = Vec::new();
    let mut state = State::Idle;
    let mut addak: Option<(char, usize)> = None;
    let mut word_start = 0;

    for (position, ch) in text.chars().enumerate() {
        let action = find_action(tables.map, ch).ok_or(DecodeError::UnknownCodepoint { ch, position })?;
        let misplaced = DecodeError::MisplacedMark { ch, position };
        match action {
            DecodeAction::Ignore => continue,
            DecodeAction::Nukta => match state {
                State::Consonant { copies } => {
                    let base = out.last().expect("consonant state implies a token").symbol;
                    let (_, replaced) = tables.nukta.iter().find(|(b, _)| *b == base).ok_or(misplaced)?;
                    let len = out.len();
                    for t in &mut out[len - copies..] {
                        *t = token(replaced);
                    }
                }
                _ => return Err(misplaced),
            },
            DecodeAction::VowelSign(vowel) => match state {
                State::Consonant { .. } | State::Carrier { .. } => {
                    out.push(token(vowel));
                    state = State::Idle;
                }
                State::Idle => return Err(misplaced),
            },
            DecodeAction::Virama => match state {
                State::Consonant { .. } => state = State::Idle,
                _ => return Err(misplaced),
            },
            other => {
                close(&mut out, &mut state)?;
                if let Some((addak_ch, addak_pos)) = addak {
                    if !matches!(other, DecodeAction::Consonant(_)) {
                        return Err(DecodeError::MisplacedMark { ch: addak_ch, position: addak_pos });
                    }
                }
                match other {
                    DecodeAction::Consonant(symbol) => {
                        let copies = if addak.take().is_some() { 2 } else { 1 };
                        for _ in 0..copies {
                            out.push(token(symbol));
                        }
                        state = State::Consonant { copies };
                    }
                    DecodeAction::Vowel(vowel) => out.push(token(vowel)),
                    DecodeAction::Carrier(default) => state = State::Carrier { default, ch, position },
                    DecodeAction::Modifier(symbol) => {
                        let follows_vowel = out[word_start..]
                            .last()
                            .is_some_and(|t| t.category != Category::Consonant);
                        if !follows_vowel {
                            return Err(misplaced);
                        }
                        out.push(token(symbol));
                    }
                    DecodeAction::Addak => addak = Some((ch, position)),
                    DecodeAction::Separator => word_start = out.len(),
                    _ => unreachable!("handled above"),
                }
            }
        }
    }
    close(&mut out, &mut state)?;
    if let Some((ch, position)) = addak {
        return Err(DecodeError::MisplacedMark { ch, position });
    }
    Ok(out)
}

fn close(out: &mut Vec<PhoneToken>, state: &mut State) -> Result<(), DecodeError> {
    match std::mem::replace(state, State::Idle) {
        State::Idle => {}
        State::Consonant { .. } => out.push(PhoneToken::inherent_schwa()),
        State::Carrier { default: Some(vowel), .. } => out.push(token(vowel)),
        State::Carrier { default: None, ch, position } => return Err(DecodeError::MisplacedMark { ch, position }),
    }
    Ok(())
}

/// Decodes Devanagari text into orthographic tokens.
///
/// Spaces and punctuation end the current akshara and emit nothing, so a
/// multi-word string decodes to the concatenation of its words.
pub fn decode_devanagari(text: &str) -> Result<Vec<PhoneToken>, DecodeError> {
    decode_with(&DEVANAGARI, text)
}

/// Decodes Gurmukhi text. Addak doubles the following consonant; tippi and
/// bindi both decode to `M`.
pub fn decode_gurmukhi(text: &str) -> Result<Vec<PhoneToken>, DecodeError> {
    decode_with(&GURMUKHI, text)
}

pub fn decode(script: Script, text: &str) -> Result<Vec<PhoneToken>, DecodeError> {
    match script {
        Script::Devanagari => decode_devanagari(text),
        Script::Gurmukhi => decode_gurmukhi(text),
    }
}

/// Splits on whitespace and decodes each word. Error positions are character
/// offsets into the full input.
pub fn decode_words(script: Script, text: &str) -> Result<Vec<Vec<PhoneToken>>, DecodeError> {
    let mut words = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    for (offset, ch) in text.chars().enumerate() {
        if ch.is_whitespace() {
            if !current.is_empty() {
                words.push(decode(script, &current).map_err(|e| e.shifted(start))?);
                current.clear();
            }
            start = offset + 1;
        } else {
            current.push(ch);
        }
    }
    if !current.is_empty() {
        words.push(decode(script, &current).map_err(|e| e.shifted(start))?);
    }
    Ok(words)
}

/// Parses a space-separated token string from one side of a lexicon entry.
///
/// On the orthographic side an `a` directly after a consonant is an inherent
/// schwa. `a_w` is accepted on the phonemic side only.
pub fn parse_token_string(s: &str, side: Side) -> Result<Vec<PhoneToken>, UnknownToken> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let mut out: Vec<PhoneToken> = Vec::new();
    for (position, raw) in s.split(' ').enumerate() {
        let unknown = || UnknownToken { token: raw.to_string(), position };
        let tok = if raw == WEAK_SCHWA {
            if side != Side::Phonemic {
                return Err(unknown());
            }
            PhoneToken::weak_schwa()
        } else {
            let mut tok = PhoneToken::new(raw).ok_or_else(unknown)?;
            let after_consonant = out.last().is_some_and(|t| t.category == Category::Consonant);
            if side == Side::Orthographic && tok.symbol == "a" && after_consonant {
                tok.origin = Origin::InherentSchwa;
            }
            tok
        };
        out.push(tok);
    }
    Ok(out)
}

/// Space-separated rendering; the inverse of [`parse_token_string`].
pub fn render(tokens: &[PhoneToken]) -> String {
    let mut s = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(t.spelling());
    }
    s
}

/// Markdown listing of the inventory and both codepoint maps. The shipped
/// `docs/inventory.md` is this function's output, checked by a test.
pub fn inventory_document() -> String {
    use std::fmt::Write;
    let mut doc = String::new();
    doc.push_str("# Phone inventory and codepoint maps\n\n");
    doc.push_str("Generated by `schwa::script::inventory_document`; do not edit by hand.\n\n");
    doc.push_str("## Inventory\n\n| symbol | category | description |\n|---|---|---|\n");
    for e in INVENTORY {
        let _ = writeln!(doc, "| `{}` | {} | {} |", e.symbol, e.category.as_str(), e.description);
    }
    let _ = writeln!(
        doc,
        "\nPhonemic-side token `{WEAK_SCHWA}` is a weakened schwa: symbol `a` with the weak flag set.\n"
    );
    for (title, map, nukta) in [
        ("Devanagari", inventory::DEVANAGARI_MAP, inventory::DEVANAGARI_NUKTA),
        ("Gurmukhi", inventory::GURMUKHI_MAP, inventory::GURMUKHI_NUKTA),
    ] {
        let _ = writeln!(doc, "## {title}\n\n| codepoint | char | action |\n|---|---|---|");
        for (ch, action) in map {
            let _ = writeln!(doc, "| U+{:04X} | {} | {} |", *ch as u32, ch, describe(*action));
        }
        let _ = writeln!(doc, "\n{title} nukta forms:\n\n| base | with nukta |\n|---|---|");
        for (base, with) in nukta {
            let _ = writeln!(doc, "| `{base}` | `{with}` |");
        }
        doc.push('\n');
    }
    doc.push_str("## Shared\n\nASCII whitespace and `, . ; : ! ? - \" ' ( )` are separators. ");
    doc.push_str("U+200C and U+200D are ignored. Any other codepoint is an error.\n");
    doc
}

fn describe(action: DecodeAction) -> String {
    match action {
        DecodeAction::Consonant(s) => format!("consonant `{s}` (+ inherent `a`)"),
        DecodeAction::Vowel(s) => format!("vowel `{s}`"),
        DecodeAction::Carrier(Some(s)) => format!("vowel `{s}`, or carrier of a following sign"),
        DecodeAction::Carrier(None) => "carrier of a following vowel sign".to_string(),
        DecodeAction::VowelSign(s) => format!("vowel sign `{s}`"),
        DecodeAction::Virama => "virama (no inherent vowel)".to_string(),
        DecodeAction::Nukta => "nukta".to_string(),
        DecodeAction::Addak => "addak (double next consonant)".to_string(),
        DecodeAction::Modifier(s) => format!("modifier `{s}`"),
        DecodeAction::Separator => "separator".to_string(),
        DecodeAction::Ignore => "ignored".to_string(),
    }
}
