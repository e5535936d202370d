//! The closed ASCII phone inventory and the codepoint maps for both scripts.
//!
//! Retroflex consonants are written with doubled letters (`tt`, `dd`, `nn`),
//! long vowels with doubled vowels (`aa`, `ii`, `uu`), and aspiration with a
//! trailing `h`. Every decode action in this file emits only symbols listed in
//! [`INVENTORY`]; `tests::decode_actions_emit_inventory_symbols` enforces it.

/// Broad class of a phone token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Consonant,
    Vowel,
    /// Nasalization and aspiration marks: `~`, `M`, `H`.
    Modifier,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Consonant => "consonant",
            Category::Vowel => "vowel",
            Category::Modifier => "modifier",
        }
    }
}

/// One row of the inventory.
#[derive(Debug, Clone, Copy)]
pub struct InventoryEntry {
    pub symbol: &'static str,
    pub category: Category,
    pub description: &'static str,
}

const fn c(symbol: &'static str, description: &'static str) -> InventoryEntry {
    InventoryEntry { symbol, category: Category::Consonant, description }
}

const fn v(symbol: &'static str, description: &'static str) -> InventoryEntry {
    InventoryEntry { symbol, category: Category::Vowel, description }
}

const fn m(symbol: &'static str, description: &'static str) -> InventoryEntry {
    InventoryEntry { symbol, category: Category::Modifier, description }
}

pub const INVENTORY: &[InventoryEntry] = &[
    v("a", "schwa, inherent or written"),
    v("aa", "open central long vowel"),
    v("i", "high front short vowel"),
    v("ii", "high front long vowel"),
    v("u", "high back short vowel"),
    v("uu", "high back long vowel"),
    v("ri", "vocalic r"),
    v("e", "mid front long vowel"),
    v("ai", "open-mid front long vowel"),
    v("ae", "candra e (English loans)"),
    v("o", "mid back long vowel"),
    v("au", "open-mid back long vowel"),
    v("ao", "candra o (English loans)"),
    c("k", "voiceless velar stop"),
    c("kh", "aspirated voiceless velar stop"),
    c("g", "voiced velar stop"),
    c("gh", "aspirated voiced velar stop"),
    c("ng", "velar nasal"),
    c("c", "voiceless palatal affricate"),
    c("ch", "aspirated voiceless palatal affricate"),
    c("j", "voiced palatal affricate"),
    c("jh", "aspirated voiced palatal affricate"),
    c("ny", "palatal nasal"),
    c("tt", "voiceless retroflex stop"),
    c("tth", "aspirated voiceless retroflex stop"),
    c("dd", "voiced retroflex stop"),
    c("ddh", "aspirated voiced retroflex stop"),
    c("nn", "retroflex nasal"),
    c("t", "voiceless dental stop"),
    c("th", "aspirated voiceless dental stop"),
    c("d", "voiced dental stop"),
    c("dh", "aspirated voiced dental stop"),
    c("n", "dental nasal"),
    c("p", "voiceless labial stop"),
    c("ph", "aspirated voiceless labial stop"),
    c("b", "voiced labial stop"),
    c("bh", "aspirated voiced labial stop"),
    c("m", "labial nasal"),
    c("y", "palatal approximant"),
    c("r", "alveolar tap or trill"),
    c("l", "alveolar lateral"),
    c("ll", "retroflex lateral"),
    c("v", "labiodental approximant"),
    c("sh", "palatal sibilant"),
    c("ss", "retroflex sibilant"),
    c("s", "alveolar sibilant"),
    c("h", "voiced glottal fricative"),
    c("q", "uvular stop (nukta ka)"),
    c("x", "velar fricative (nukta kha)"),
    c("G", "voiced velar fricative (nukta ga)"),
    c("z", "voiced alveolar sibilant (nukta ja)"),
    c("f", "labiodental fricative (nukta pha)"),
    c("rr", "retroflex flap (nukta dda)"),
    c("rrh", "aspirated retroflex flap (nukta ddha)"),
    m("~", "candrabindu, vowel nasalization"),
    m("M", "anusvara, tippi or bindi"),
    m("H", "visarga"),
];

/// Looks up an inventory row by symbol.
pub fn lookup(symbol: &str) -> Option<&'static InventoryEntry> {
    INVENTORY.iter().find(|e| e.symbol == symbol)
}

/// What a single codepoint contributes to the decoded token stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeAction {
    /// Consonant letter; carries an inherent schwa unless a vowel sign or virama follows.
    Consonant(&'static str),
    /// Independent vowel letter.
    Vowel(&'static str),
    /// Vowel carrier that takes a following vowel sign. With `Some`, a bare
    /// carrier stands for that vowel; with `None` it must take a sign.
    Carrier(Option<&'static str>),
    /// Dependent vowel sign (matra).
    VowelSign(&'static str),
    /// Suppresses the inherent schwa.
    Virama,
    /// Combining nukta; rewrites the preceding consonant.
    Nukta,
    /// Geminates the following consonant (Gurmukhi addak).
    Addak,
    Modifier(&'static str),
    /// Word or phrase boundary (space, danda, punctuation).
    Separator,
    /// Zero-width joiners: no phonetic content.
    Ignore,
}

use DecodeAction::*;

pub const DEVANAGARI_MAP: &[(char, DecodeAction)] = &[
    ('\u{0901}', Modifier("~")),
    ('\u{0902}', Modifier("M")),
    ('\u{0903}', Modifier("H")),
    ('\u{0905}', Carrier(Some("a"))),
    ('\u{0906}', Vowel("aa")),
    ('\u{0907}', Vowel("i")),
    ('\u{0908}', Vowel("ii")),
    ('\u{0909}', Vowel("u")),
    ('\u{090A}', Vowel("uu")),
    ('\u{090B}', Vowel("ri")),
    ('\u{090D}', Vowel("ae")),
    ('\u{090F}', Vowel("e")),
    ('\u{0910}', Vowel("ai")),
    ('\u{0911}', Vowel("ao")),
    ('\u{0913}', Vowel("o")),
    ('\u{0914}', Vowel("au")),
    ('\u{0915}', Consonant("k")),
    ('\u{0916}', Consonant("kh")),
    ('\u{0917}', Consonant("g")),
    ('\u{0918}', Consonant("gh")),
    ('\u{0919}', Consonant("ng")),
    ('\u{091A}', Consonant("c")),
    ('\u{091B}', Consonant("ch")),
    ('\u{091C}', Consonant("j")),
    ('\u{091D}', Consonant("jh")),
    ('\u{091E}', Consonant("ny")),
    ('\u{091F}', Consonant("tt")),
    ('\u{0920}', Consonant("tth")),
    ('\u{0921}', Consonant("dd")),
    ('\u{0922}', Consonant("ddh")),
    ('\u{0923}', Consonant("nn")),
    ('\u{0924}', Consonant("t")),
    ('\u{0925}', Consonant("th")),
    ('\u{0926}', Consonant("d")),
    ('\u{0927}', Consonant("dh")),
    ('\u{0928}', Consonant("n")),
    ('\u{0929}', Consonant("n")),
    ('\u{092A}', Consonant("p")),
    ('\u{092B}', Consonant("ph")),
    ('\u{092C}', Consonant("b")),
    ('\u{092D}', Consonant("bh")),
    ('\u{092E}', Consonant("m")),
    ('\u{092F}', Consonant("y")),
    ('\u{0930}', Consonant("r")),
    ('\u{0931}', Consonant("r")),
    ('\u{0932}', Consonant("l")),
    ('\u{0933}', Consonant("ll")),
    ('\u{0934}', Consonant("ll")),
    ('\u{0935}', Consonant("v")),
    ('\u{0936}', Consonant("sh")),
    ('\u{0937}', Consonant("ss")),
    ('\u{0938}', Consonant("s")),
    ('\u{0939}', Consonant("h")),
    ('\u{093C}', Nukta),
    ('\u{093E}', VowelSign("aa")),
    ('\u{093F}', VowelSign("i")),
    ('\u{0940}', VowelSign("ii")),
    ('\u{0941}', VowelSign("u")),
    ('\u{0942}', VowelSign("uu")),
    ('\u{0943}', VowelSign("ri")),
    ('\u{0945}', VowelSign("ae")),
    ('\u{0947}', VowelSign("e")),
    ('\u{0948}', VowelSign("ai")),
    ('\u{0949}', VowelSign("ao")),
    ('\u{094B}', VowelSign("o")),
    ('\u{094C}', VowelSign("au")),
    ('\u{094D}', Virama),
    ('\u{0958}', Consonant("q")),
    ('\u{0959}', Consonant("x")),
    ('\u{095A}', Consonant("G")),
    ('\u{095B}', Consonant("z")),
    ('\u{095C}', Consonant("rr")),
    ('\u{095D}', Consonant("rrh")),
    ('\u{095E}', Consonant("f")),
    ('\u{095F}', Consonant("y")),
    ('\u{0964}', Separator),
    ('\u{0965}', Separator),
];

/// Base consonant to nukta form, for decomposed nukta sequences.
pub const DEVANAGARI_NUKTA: &[(&str, &str)] = &[
    ("k", "q"),
    ("kh", "x"),
    ("g", "G"),
    ("j", "z"),
    ("dd", "rr"),
    ("ddh", "rrh"),
    ("ph", "f"),
    ("y", "y"),
    ("n", "n"),
    ("r", "r"),
    ("ll", "ll"),
];

pub const GURMUKHI_MAP: &[(char, DecodeAction)] = &[
    ('\u{0A02}', Modifier("M")),
    ('\u{0A03}', Modifier("H")),
    ('\u{0A05}', Carrier(Some("a"))),
    ('\u{0A06}', Vowel("aa")),
    ('\u{0A07}', Vowel("i")),
    ('\u{0A08}', Vowel("ii")),
    ('\u{0A09}', Vowel("u")),
    ('\u{0A0A}', Vowel("uu")),
    ('\u{0A0F}', Vowel("e")),
    ('\u{0A10}', Vowel("ai")),
    ('\u{0A13}', Vowel("o")),
    ('\u{0A14}', Vowel("au")),
    ('\u{0A15}', Consonant("k")),
    ('\u{0A16}', Consonant("kh")),
    ('\u{0A17}', Consonant("g")),
    ('\u{0A18}', Consonant("gh")),
    ('\u{0A19}', Consonant("ng")),
    ('\u{0A1A}', Consonant("c")),
    ('\u{0A1B}', Consonant("ch")),
    ('\u{0A1C}', Consonant("j")),
    ('\u{0A1D}', Consonant("jh")),
    ('\u{0A1E}', Consonant("ny")),
    ('\u{0A1F}', Consonant("tt")),
    ('\u{0A20}', Consonant("tth")),
    ('\u{0A21}', Consonant("dd")),
    ('\u{0A22}', Consonant("ddh")),
    ('\u{0A23}', Consonant("nn")),
    ('\u{0A24}', Consonant("t")),
    ('\u{0A25}', Consonant("th")),
    ('\u{0A26}', Consonant("d")),
    ('\u{0A27}', Consonant("dh")),
    ('\u{0A28}', Consonant("n")),
    ('\u{0A2A}', Consonant("p")),
    ('\u{0A2B}', Consonant("ph")),
    ('\u{0A2C}', Consonant("b")),
    ('\u{0A2D}', Consonant("bh")),
    ('\u{0A2E}', Consonant("m")),
    ('\u{0A2F}', Consonant("y")),
    ('\u{0A30}', Consonant("r")),
    ('\u{0A32}', Consonant("l")),
    ('\u{0A33}', Consonant("ll")),
    ('\u{0A35}', Consonant("v")),
    ('\u{0A36}', Consonant("sh")),
    ('\u{0A38}', Consonant("s")),
    ('\u{0A39}', Consonant("h")),
    ('\u{0A3C}', Nukta),
    ('\u{0A3E}', VowelSign("aa")),
    ('\u{0A3F}', VowelSign("i")),
    ('\u{0A40}', VowelSign("ii")),
    ('\u{0A41}', VowelSign("u")),
    ('\u{0A42}', VowelSign("uu")),
    ('\u{0A47}', VowelSign("e")),
    ('\u{0A48}', VowelSign("ai")),
    ('\u{0A4B}', VowelSign("o")),
    ('\u{0A4C}', VowelSign("au")),
    ('\u{0A4D}', Virama),
    ('\u{0A59}', Consonant("x")),
    ('\u{0A5A}', Consonant("G")),
    ('\u{0A5B}', Consonant("z")),
    ('\u{0A5C}', Consonant("rr")),
    ('\u{0A5E}', Consonant("f")),
    ('\u{0A70}', Modifier("M")),
    ('\u{0A71}', Addak),
    ('\u{0A72}', Carrier(None)),
    ('\u{0A73}', Carrier(None)),
    ('\u{0964}', Separator),
    ('\u{0965}', Separator),
];

pub const GURMUKHI_NUKTA: &[(&str, &str)] = &[
    ("kh", "x"),
    ("g", "G"),
    ("j", "z"),
    ("ph", "f"),
    ("s", "sh"),
    ("l", "ll"),
];

/// Actions shared by both scripts: ASCII whitespace, common punctuation,
/// and zero-width joiners.
pub fn common_action(ch: char) -> Option<DecodeAction> {
    match ch {
        ' ' | '\t' | '\n' | '\r' => Some(Separator),
        ',' | '.' | ';' | ':' | '!' | '?' | '-' | '"' | '\'' | '(' | ')' => Some(Separator),
        '\u{200C}' | '\u{200D}' => Some(Ignore),
        _ => None,
    }
}

pub(crate) fn find_action(map: &[(char, DecodeAction)], ch: char) -> Option<DecodeAction> {
    map.iter().find(|(c, _)| *c == ch).map(|(_, a)| *a).or_else(|| common_action(ch))
}
