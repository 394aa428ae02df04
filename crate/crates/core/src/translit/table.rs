use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::corpus_io::read_lines;
use crate::error::{Error, Result};

/// File-backed transliteration candidates: `word<TAB>cand1,cand2,...`.
///
/// Source words are looked up exactly (case-preserving); candidate lists are
/// deduplicated case-insensitively, keeping the first spelling.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidateTable {
    entries: HashMap<String, Vec<String>>,
}

impl CandidateTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: impl Into<String>, candidates: impl IntoIterator<Item = impl Into<String>>) -> Result<()> {
        let word = word.into();
        if self.entries.contains_key(&word) {
            return Err(Error::DuplicateSourceWord(word));
        }
        let cleaned = dedup(candidates.into_iter().map(Into::into));
        if cleaned.is_empty() {
            return Err(Error::Config(format!("no candidates for {word:?}")));
        }
        self.entries.insert(word, cleaned);
        Ok(())
    }

    /// Adds candidates to a word, creating the entry if needed.
    pub fn extend(&mut self, word: &str, candidates: impl IntoIterator<Item = impl Into<String>>) {
        let entry = self.entries.entry(word.to_owned()).or_default();
        let merged = dedup(entry.drain(..).chain(candidates.into_iter().map(Into::into)));
        *entry = merged;
    }

    pub fn lookup(&self, word: &str) -> &[String] {
        self.entries.get(word).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut table = CandidateTable::new();
        for (index, line) in read_lines(path)?.into_iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (word, cands) = line
                .split_once('\t')
                .ok_or_else(|| Error::malformed(path, index + 1, "expected word<TAB>candidates"))?;
            let word = word.trim();
            if word.is_empty() || cands.contains('\t') {
                return Err(Error::malformed(path, index + 1, "expected word<TAB>candidates"));
            }
            let list: Vec<&str> = cands.split(',').map(str::trim).filter(|c| !c.is_empty()).collect();
            if list.is_empty() {
                return Err(Error::malformed(path, index + 1, "empty candidate list"));
            }
            table.insert(word, list).map_err(|e| match e {
                Error::DuplicateSourceWord(_) => e,
                other => Error::malformed(path, index + 1, other.to_string()),
            })?;
        }
        Ok(table)
    }
}

fn dedup(items: impl Iterator<Item = String>) -> Vec<String> {
    let mut seen = HashSet::new();
    items
        .map(|c| c.trim().to_owned())
        .filter(|c| !c.is_empty() && seen.insert(c.to_lowercase()))
        .collect()
}
