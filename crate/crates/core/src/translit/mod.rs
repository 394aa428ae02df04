//! Translation-only vs translation-plus-transliteration labelling.
//!
//! A pair is [`TranslitLabel::Both`] when some source word has a
//! transliteration candidate that appears as a whole word in the target,
//! compared case-insensitively after punctuation stripping. Candidates come
//! from a [`CandidateGenerator`]: either a file table or the rule-based
//! [`Romanizer`].

mod romanizer;
mod table;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub use romanizer::{supported_languages, Romanizer};
pub use table::CandidateTable;

use crate::corpus_io::{tokenize_words, write_lines, Corpus, SentencePair};
use crate::error::{Error, Result};
use crate::Execution;

pub const DEFAULT_CANDIDATES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TranslitLabel {
    Txn,
    Both,
}

impl TranslitLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            TranslitLabel::Txn => "Txn",
            TranslitLabel::Both => "Both",
        }
    }
}

impl fmt::Display for TranslitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TranslitLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Txn" => Ok(TranslitLabel::Txn),
            "Both" => Ok(TranslitLabel::Both),
            other => Err(Error::Config(format!("unknown translit label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum CandidateSource {
    Table(CandidateTable),
    Romanizer(Romanizer),
}

#[derive(Debug, Clone)]
pub struct CandidateGenerator {
    pub source: CandidateSource,
    pub num_candidates: usize,
}

impl CandidateGenerator {
    pub fn table(table: CandidateTable) -> Self {
        Self {
            source: CandidateSource::Table(table),
            num_candidates: DEFAULT_CANDIDATES,
        }
    }

    pub fn romanizer(language: &str) -> Result<Self> {
        Ok(Self {
            source: CandidateSource::Romanizer(Romanizer::new(language)?),
            num_candidates: DEFAULT_CANDIDATES,
        })
    }

    pub fn with_candidates(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("number of candidates must be at least 1".into()));
        }
        self.num_candidates = n;
        Ok(self)
    }

    pub fn kind(&self) -> &'static str {
        match self.source {
            CandidateSource::Table(_) => "table",
            CandidateSource::Romanizer(_) => "romanizer",
        }
    }

    /// Lowercased candidates for one word, at most `num_candidates`.
    pub fn candidates(&self, word: &str) -> Vec<String> {
        match &self.source {
            CandidateSource::Table(t) => t
                .lookup(word)
                .iter()
                .take(self.num_candidates)
                .map(|c| c.to_lowercase())
                .collect(),
            CandidateSource::Romanizer(r) => r.romanize(word, self.num_candidates),
        }
    }

    /// True when some candidate of `word` is in `words` (already lowercased).
    pub fn matches_any(&self, word: &str, words: &HashSet<String>) -> bool {
        self.candidates(word).iter().any(|c| words.contains(c))
    }
}

/// Lowercased whole-word set of a sentence.
pub fn word_set(text: &str) -> HashSet<String> {
    tokenize_words(text).into_iter().map(str::to_lowercase).collect()
}

pub fn classify_pair(pair: &SentencePair, gen: &CandidateGenerator) -> TranslitLabel {
    classify_text(&pair.source, &pair.target, gen)
}

pub fn classify_text(source: &str, target: &str, gen: &CandidateGenerator) -> TranslitLabel {
    let target_words = word_set(target);
    if tokenize_words(source)
        .into_iter()
        .any(|w| gen.matches_any(w, &target_words))
    {
        TranslitLabel::Both
    } else {
        TranslitLabel::Txn
    }
}

pub fn classify_pairs(pairs: &[SentencePair], gen: &CandidateGenerator, exec: Execution) -> Vec<TranslitLabel> {
    exec.map(pairs, |p| classify_pair(p, gen))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TranslitStats {
    pub txn: usize,
    pub both: usize,
}

impl TranslitStats {
    pub fn from_labels(labels: &[TranslitLabel]) -> Self {
        let both = labels.iter().filter(|&&l| l == TranslitLabel::Both).count();
        Self {
            txn: labels.len() - both,
            both,
        }
    }

    pub fn total(&self) -> usize {
        self.txn + self.both
    }

    /// `None` for an empty corpus.
    pub fn txn_fraction(&self) -> Option<f64> {
        (self.total() > 0).then(|| self.txn as f64 / self.total() as f64)
    }

    pub fn both_fraction(&self) -> Option<f64> {
        (self.total() > 0).then(|| self.both as f64 / self.total() as f64)
    }
}

impl fmt::Display for TranslitStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |x| format!("{:.1}%", 100.0 * x));
        writeln!(f, "{:>6} {:>10} {:>8}", "label", "count", "share")?;
        writeln!(f, "{:>6} {:>10} {:>8}", "Txn", self.txn, pct(self.txn_fraction()))?;
        writeln!(f, "{:>6} {:>10} {:>8}", "Both", self.both, pct(self.both_fraction()))?;
        write!(f, "{:>6} {:>10}", "total", self.total())
    }
}

pub fn corpus_translit_stats(corpus: &Corpus, gen: &CandidateGenerator) -> TranslitStats {
    TranslitStats::from_labels(&classify_pairs(&corpus.pairs, gen, Execution::default()))
}

pub fn write_labels(pairs: &[SentencePair], labels: &[TranslitLabel], path: impl AsRef<Path>) -> Result<usize> {
    if pairs.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: pairs.len(),
            right: labels.len(),
        });
    }
    write_lines(path, pairs.iter().zip(labels).map(|(p, l)| format!("{}\t{}", p.id, l)))
}
