//! Rule-based romanization of Indic-script words.
//!
//! Each supported script ships a mapping table (`data/<lang>.tsv`) of
//! `key<TAB>alt1|alt2|...` rows. A word is segmented by longest key match,
//! every consonant carries an inherent vowel unless a vowel sign or virama
//! follows, and a word-final consonant takes the `%final_inherent`
//! alternatives. Candidates are the cartesian product of all alternatives,
//! enumerated by total alternative rank (sum of indices, primary = 0) and
//! then lexicographically, deduplicated and cut at `n`.

use std::collections::{HashMap, HashSet};
use std::ops::ControlFlow;

use crate::error::{Error, Result};

const HINDI_TABLE: &str = include_str!("../../data/hi.tsv");
const GUJARATI_TABLE: &str = include_str!("../../data/gu.tsv");
const TAMIL_TABLE: &str = include_str!("../../data/ta.tsv");

/// Languages with a shipped table: code, Unicode block start, table text.
const BUILTIN: &[(&str, u32, &str)] = &[
    ("hi", 0x0900, HINDI_TABLE),
    ("gu", 0x0A80, GUJARATI_TABLE),
    ("ta", 0x0B80, TAMIL_TABLE),
];

pub fn supported_languages() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(code, _, _)| *code)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Consonant,
    VowelSign,
    Virama,
    Nukta,
    Other,
}

/// Classification by offset inside a 128-codepoint Indic block. The
/// Devanagari, Gujarati and Tamil blocks share this layout.
fn classify(offset: u32) -> Class {
    match offset {
        0x15..=0x39 | 0x58..=0x5F => Class::Consonant,
        0x3E..=0x4C | 0x55..=0x57 | 0x62 | 0x63 => Class::VowelSign,
        0x4D => Class::Virama,
        0x3C => Class::Nukta,
        _ => Class::Other,
    }
}

#[derive(Debug, Clone)]
pub struct Romanizer {
    language: String,
    block: u32,
    keys: HashMap<String, Vec<String>>,
    max_key_chars: usize,
    inherent: String,
    final_inherent: Vec<String>,
}

struct Unit {
    class: Class,
    alternatives: Vec<String>,
}

impl Romanizer {
    pub fn new(language: &str) -> Result<Self> {
        let (code, block, text) = BUILTIN
            .iter()
            .find(|(code, _, _)| *code == language)
            .ok_or_else(|| Error::UnsupportedLanguage(language.to_owned()))?;
        Self::from_table(code, *block, text)
    }

    /// Builds a romanizer from mapping text in the shipped table format.
    pub fn from_table(language: &str, block: u32, text: &str) -> Result<Self> {
        let origin = std::path::Path::new(language);
        let mut keys = HashMap::new();
        let mut inherent = "a".to_owned();
        let mut final_inherent = None;
        for (index, line) in text.lines().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, alts) = line
                .split_once('\t')
                .ok_or_else(|| Error::malformed(origin, index + 1, "expected key<TAB>alternatives"))?;
            let alternatives: Vec<String> = alts.split('|').map(str::to_owned).collect();
            match key {
                "%inherent" => inherent = alts.to_owned(),
                "%final_inherent" => final_inherent = Some(alternatives),
                _ if key.starts_with('%') => {
                    return Err(Error::malformed(origin, index + 1, format!("unknown directive {key}")))
                }
                _ => {
                    if keys.insert(key.to_owned(), alternatives).is_some() {
                        return Err(Error::malformed(origin, index + 1, format!("duplicate key {key:?}")));
                    }
                }
            }
        }
        let max_key_chars = keys.keys().map(|k| k.chars().count()).max().unwrap_or(1);
        Ok(Self {
            language: language.to_owned(),
            block,
            keys,
            max_key_chars,
            final_inherent: final_inherent.unwrap_or_else(|| vec![inherent.clone()]),
            inherent,
        })
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    fn in_block(&self, c: char) -> bool {
        (self.block..self.block + 0x80).contains(&(c as u32))
    }

    fn segment(&self, word: &str) -> Vec<Unit> {
        let chars: Vec<char> = word.chars().collect();
        let mut units = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let longest = (1..=self.max_key_chars.min(chars.len() - i)).rev().find_map(|len| {
                let key: String = chars[i..i + len].iter().collect();
                self.keys.get(&key).map(|alts| (len, alts))
            });
            let c = chars[i];
            let class = if self.in_block(c) {
                classify(c as u32 - self.block)
            } else {
                Class::Other
            };
            match longest {
                Some((len, alts)) => {
                    units.push(Unit {
                        class,
                        alternatives: alts.clone(),
                    });
                    i += len;
                }
                None => {
                    let alternatives = if self.in_block(c) {
                        Vec::new()
                    } else {
                        vec![c.to_lowercase().collect()]
                    };
                    units.push(Unit { class, alternatives });
                    i += 1;
                }
            }
        }
        // A nukta that did not combine into a mapped key carries no sound.
        units.retain(|u| u.class != Class::Nukta);
        units
    }

    /// Alternative slots for a word, one per output segment.
    fn slots(&self, word: &str) -> Vec<Vec<String>> {
        let units = self.segment(word);
        let mut slots = Vec::new();
        let mut i = 0;
        while i < units.len() {
            let unit = &units[i];
            let mut push = |alts: &Vec<String>| {
                if !alts.is_empty() {
                    slots.push(alts.clone());
                }
            };
            match unit.class {
                Class::Consonant => {
                    push(&unit.alternatives);
                    match units.get(i + 1).map(|u| u.class) {
                        Some(Class::VowelSign) => {
                            push(&units[i + 1].alternatives);
                            i += 1;
                        }
                        Some(Class::Virama) => i += 1,
                        Some(_) => push(&vec![self.inherent.clone()]),
                        None => push(&self.final_inherent),
                    }
                }
                Class::Virama | Class::Nukta => {}
                Class::VowelSign | Class::Other => push(&unit.alternatives),
            }
            i += 1;
        }
        slots
    }

    /// Up to `n` lowercase romanizations of `word`, primary spelling first.
    /// Words with no character from this script come back lowercased as the
    /// only candidate.
    pub fn romanize(&self, word: &str, n: usize) -> Vec<String> {
        if n == 0 || word.is_empty() {
            return Vec::new();
        }
        if !word.chars().any(|c| self.in_block(c)) {
            return vec![word.to_lowercase()];
        }
        let slots = self.slots(word);
        let max_cost: usize = slots.iter().map(|s| s.len() - 1).sum();
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        let mut picks = vec![0usize; slots.len()];
        for cost in 0..=max_cost {
            let flow = enumerate(&slots, 0, cost, &mut picks, &mut |picks| {
                let candidate: String = slots
                    .iter()
                    .zip(picks)
                    .map(|(slot, &p)| slot[p].as_str())
                    .collect::<String>()
                    .to_lowercase();
                if !candidate.is_empty() && seen.insert(candidate.clone()) {
                    out.push(candidate);
                }
                if out.len() >= n {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            });
            if flow.is_break() {
                break;
            }
        }
        out
    }
}

/// Visits, in lexicographic order, every index vector over `slots[at..]`
/// whose entries sum to `remaining`.
fn enumerate(
    slots: &[Vec<String>],
    at: usize,
    remaining: usize,
    picks: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if at == slots.len() {
        return if remaining == 0 {
            visit(picks)
        } else {
            ControlFlow::Continue(())
        };
    }
    let capacity_after: usize = slots[at + 1..].iter().map(|s| s.len() - 1).sum();
    let low = remaining.saturating_sub(capacity_after);
    let high = (slots[at].len() - 1).min(remaining);
    for pick in low..=high {
        picks[at] = pick;
        enumerate(slots, at + 1, remaining - pick, picks, visit)?;
    }
    picks[at] = 0;
    ControlFlow::Continue(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unsupported_language() {
        assert!(matches!(Romanizer::new("xx"), Err(Error::UnsupportedLanguage(l)) if l == "xx"));
        assert_eq!(supported_languages().collect::<Vec<_>>(), ["hi", "gu", "ta"]);
    }

    #[test]
    fn shipped_tables_parse() {
        for lang in supported_languages() {
            let r = Romanizer::new(lang).unwrap();
            assert!(r.keys.len() > 50, "{lang}");
        }
    }

    #[test]
    fn latin_words_pass_through() {
        let r = Romanizer::new("hi").unwrap();
        assert_eq!(r.romanize("WMT2014", 10), ["wmt2014"]);
        assert!(r.romanize("x", 0).is_empty());
    }

    #[test]
    fn word_without_variants_has_one_candidate() {
        let r = Romanizer::new("hi").unwrap();
        // क, ट and ु each map to a single spelling
        assert_eq!(r.romanize("कटु", 10), ["katu"]);
    }

    #[test]
    fn final_inherent_variants() {
        let r = Romanizer::new("hi").unwrap();
        assert_eq!(r.romanize("कमल", 10), ["kamal", "kamala"]);
        let t = Romanizer::new("ta").unwrap();
        // Tamil keeps the final inherent vowel; க has k|g
        assert_eq!(t.romanize("கமல", 10), ["kamala", "gamala"]);
    }

    #[test]
    fn truncates_to_n() {
        let r = Romanizer::new("hi").unwrap();
        let all = r.romanize("हिंदी", 10);
        assert_eq!(all, ["hindee", "hindi", "himdee", "himdi"]);
        assert_eq!(r.romanize("हिंदी", 2), ["hindee", "hindi"]);
    }

    #[test]
    fn decomposed_and_precomposed_nukta_agree() {
        let r = Romanizer::new("hi").unwrap();
        let precomposed = "\u{095C}";
        let decomposed = "\u{0921}\u{093C}";
        assert_eq!(r.romanize(precomposed, 10), r.romanize(decomposed, 10));
    }
}
