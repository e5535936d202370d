//! Pseudo-word corpora whose schwa labels come from a rule set.
//!
//! Words are built akshara by akshara the way Devanagari spells them: a
//! consonant followed by a vowel sign, a virama, or nothing (an inherent
//! schwa), with an optional independent vowel up front and an occasional
//! anusvara. Each word gets a real Devanagari headword that decodes back to
//! its orthographic tokens. Because vowel signs never spell `a`, an inherent
//! schwa is never followed by another `a`, so every generated entry aligns.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::align::{realize, AlignedSchwa};
use crate::baseline::RuleSet;
use crate::lexicon::LexEntry;
use crate::script::inventory::{DecodeAction, DEVANAGARI_MAP};
use crate::script::{PhoneToken, Origin};

const CONSONANTS: &[&str] = &[
    "k", "kh", "g", "c", "j", "tt", "dd", "t", "d", "dh", "n", "p", "b", "bh", "m", "y", "r", "l", "v", "s", "sh", "h",
];
const VOWEL_SIGNS: &[&str] = &["aa", "i", "ii", "u", "uu", "e", "ai", "o"];
const INITIAL_VOWELS: &[&str] = &["a", "aa", "i", "u", "e", "o"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub words: usize,
    pub seed: u64,
    /// Chance that a retained schwa is marked weak on the phonemic side.
    pub weak_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { words: 2000, seed: 0, weak_rate: 0.0 }
    }
}

fn token(symbol: &str) -> PhoneToken {
    PhoneToken::new(symbol).expect("synthetic symbols are in the inventory")
}

fn word(rng: &mut ChaCha8Rng) -> Vec<PhoneToken> {
    let mut orth = Vec::new();
    if rng.gen_bool(0.15) {
        let v = INITIAL_VOWELS.choose(rng).unwrap();
        orth.push(token(v));
    }
    let aksharas = rng.gen_range(2..=5);
    for k in 0..aksharas {
        let last = k + 1 == aksharas;
        orth.push(token(CONSONANTS.choose(rng).unwrap()));
        let roll: f64 = rng.gen();
        if !last && roll < 0.25 {
            continue; // virama: the next consonant clusters with this one
        }
        if roll < 0.65 {
            orth.push(PhoneToken::inherent_schwa());
        } else {
            orth.push(token(VOWEL_SIGNS.choose(rng).unwrap()));
        }
        if !last && rng.gen_bool(0.08) {
            orth.push(token("M"));
        }
    }
    orth
}

/// Spells orthographic tokens in Devanagari; `None` if some token has no
/// direct spelling.
pub fn spell_devanagari(orth: &[PhoneToken]) -> Option<String> {
    let find = |want: &dyn Fn(&DecodeAction) -> bool| DEVANAGARI_MAP.iter().find(|(_, a)| want(a)).map(|(c, _)| *c);
    let mut out = String::new();
    for (i, t) in orth.iter().enumerate() {
        let prev_consonant = i > 0 && orth[i - 1].origin == Origin::Consonant;
        match t.origin {
            Origin::InherentSchwa => {}
            Origin::Consonant => {
                if prev_consonant {
                    out.push('\u{094D}');
                }
                out.push(find(&|a| *a == DecodeAction::Consonant(t.symbol))?);
            }
            Origin::ExplicitVowel if prev_consonant => {
                out.push(find(&|a| *a == DecodeAction::VowelSign(t.symbol))?);
            }
            Origin::ExplicitVowel => {
                out.push(find(&|a| *a == DecodeAction::Vowel(t.symbol) || *a == DecodeAction::Carrier(Some(t.symbol)))?);
            }
            Origin::Modifier => out.push(find(&|a| *a == DecodeAction::Modifier(t.symbol))?),
        }
    }
    if orth.last().is_some_and(|t| t.origin == Origin::Consonant) {
        out.push('\u{094D}');
    }
    Some(out)
}

/// A lexicon of `config.words` entries labeled by `rules`.
pub fn synth_lexicon(config: &SynthConfig, rules: &RuleSet) -> Vec<LexEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.words)
        .map(|id| {
            let orth = word(&mut rng);
            let labels: Vec<AlignedSchwa> = orth
                .iter()
                .enumerate()
                .filter(|(_, t)| t.is_inherent_schwa())
                .map(|(i, _)| {
                    let label = rules.predict(&orth, i);
                    let weak = label.is_retained() && config.weak_rate > 0.0 && rng.gen_bool(config.weak_rate);
                    AlignedSchwa { orth_index: i, label, weak }
                })
                .collect();
            let phon = realize(&orth, &labels);
            let headword = spell_devanagari(&orth).expect("synthetic words are spellable");
            LexEntry { id: id as u64, headword, orth, phon, source: "synthetic".into() }
        })
        .collect()
}
