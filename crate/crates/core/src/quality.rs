//! Per-pair quality scores.
//!
//! Three sources are supported: cosine similarity between externally
//! computed sentence embeddings, Jaccard similarity of character trigram
//! sets between a target and its round-trip translation, and precomputed
//! scores read straight from a sidecar.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use crate::corpus_io::{
    char_trigrams, read_embeddings, read_id_sidecar, read_lines, write_lines, Corpus, EmbeddingVector,
    Origin, SentencePair,
};
use crate::error::{Error, Result};
use crate::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    EmbeddingCosine,
    BotJaccard,
    External,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::EmbeddingCosine => "embedding-cosine",
            Metric::BotJaccard => "bot-jaccard",
            Metric::External => "external",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityScore {
    pub value: f64,
    pub metric: Metric,
}

impl QualityScore {
    pub fn new(value: f64, metric: Metric) -> Result<Self> {
        let in_range = match metric {
            Metric::EmbeddingCosine => (-1.0..=1.0).contains(&value),
            Metric::BotJaccard => (0.0..=1.0).contains(&value),
            Metric::External => value.is_finite(),
        };
        if !in_range {
            return Err(Error::DegenerateInput("score outside the metric's range"));
        }
        Ok(Self { value, metric })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pub pair: SentencePair,
    pub score: QualityScore,
}

impl ScoredPair {
    pub fn id(&self) -> u64 {
        self.pair.id
    }

    pub fn value(&self) -> f64 {
        self.score.value
    }
}

/// Cosine of the angle between two slices, clamped to [-1, 1].
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let (mut dot, mut uu, mut vv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (uu * vv).sqrt()).clamp(-1.0, 1.0))
}

pub fn cosine_similarity(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64> {
    cosine(u.values(), v.values())
}

pub fn jaccard(a: &HashSet<String>, b: &HashSet<String>) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => {
            let inter = a.intersection(b).count();
            let union = a.len() + b.len() - inter;
            inter as f64 / union as f64
        }
    }
}

/// Bag-of-trigram Jaccard similarity between an original target and its
/// round-trip translation. Two empty trigram sets count as identical.
pub fn bot_jaccard(original_target: &str, round_trip_target: &str) -> f64 {
    jaccard(&char_trigrams(original_target), &char_trigrams(round_trip_target))
}

/// Parses an `id<TAB>real` score sidecar.
pub fn read_score_sidecar(path: impl AsRef<Path>) -> Result<HashMap<u64, f64>> {
    let path = path.as_ref();
    let mut scores = HashMap::new();
    for (line, id, raw) in read_id_sidecar(path)? {
        let value: f64 = raw
            .trim()
            .parse()
            .map_err(|_| Error::malformed(path, line, format!("bad score {raw:?}")))?;
        if !value.is_finite() {
            return Err(Error::NonFiniteScore(id));
        }
        if scores.insert(id, value).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    Ok(scores)
}

/// Joins a corpus with per-id scores. Every pair needs exactly one score and
/// every score must belong to a pair.
pub fn join_scores(pairs: &[SentencePair], scores: &HashMap<u64, f64>, metric: Metric) -> Result<Vec<ScoredPair>> {
    let out = pairs
        .iter()
        .map(|pair| {
            let value = *scores.get(&pair.id).ok_or(Error::MissingScore(pair.id))?;
            Ok(ScoredPair {
                pair: pair.clone(),
                score: QualityScore::new(value, metric)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if scores.len() != pairs.len() {
        let ids: HashSet<u64> = pairs.iter().map(|p| p.id).collect();
        let mut extra: Vec<u64> = scores.keys().filter(|id| !ids.contains(id)).copied().collect();
        extra.sort_unstable();
        if let Some(&id) = extra.first() {
            return Err(Error::UnexpectedId(id));
        }
    }
    Ok(out)
}

pub fn score_corpus_external(corpus: &Corpus, score_file: impl AsRef<Path>) -> Result<Vec<ScoredPair>> {
    let scores = read_score_sidecar(score_file)?;
    join_scores(&corpus.pairs, &scores, Metric::External)
}

pub fn score_corpus_embeddings(
    corpus: &Corpus,
    src_emb: impl AsRef<Path>,
    tgt_emb: impl AsRef<Path>,
) -> Result<Vec<ScoredPair>> {
    let src = read_embeddings(src_emb)?;
    let tgt = read_embeddings(tgt_emb)?;
    score_pairs_embeddings(&corpus.pairs, &src, &tgt, Execution::default())
}

/// Cosine-scores each pair from in-memory embedding maps.
pub fn score_pairs_embeddings(
    pairs: &[SentencePair],
    src: &HashMap<u64, EmbeddingVector>,
    tgt: &HashMap<u64, EmbeddingVector>,
    exec: Execution,
) -> Result<Vec<ScoredPair>> {
    exec.try_map(pairs, |pair| {
        let u = src.get(&pair.id).ok_or(Error::MissingScore(pair.id))?;
        let v = tgt.get(&pair.id).ok_or(Error::MissingScore(pair.id))?;
        Ok(ScoredPair {
            pair: pair.clone(),
            score: QualityScore {
                value: cosine_similarity(u, v)?,
                metric: Metric::EmbeddingCosine,
            },
        })
    })
}

/// Scores a corpus against a line-aligned round-trip file. Line `i` of the
/// file belongs to the pair with id `i`.
pub fn score_corpus_roundtrip(corpus: &Corpus, round_trip_targets: impl AsRef<Path>) -> Result<Vec<ScoredPair>> {
    let lines = read_lines(round_trip_targets)?;
    let expected = corpus.count() + corpus.skipped;
    if lines.len() != expected {
        return Err(Error::LineCountMismatch {
            expected,
            found: lines.len(),
        });
    }
    score_pairs_roundtrip(&corpus.pairs, &lines, Execution::default())
}

pub fn score_pairs_roundtrip(pairs: &[SentencePair], round_trip: &[String], exec: Execution) -> Result<Vec<ScoredPair>> {
    exec.try_map(pairs, |pair| {
        let rt = round_trip.get(pair.id as usize).ok_or(Error::MissingScore(pair.id))?;
        Ok(ScoredPair {
            pair: pair.clone(),
            score: QualityScore {
                value: bot_jaccard(&pair.target, rt),
                metric: Metric::BotJaccard,
            },
        })
    })
}

pub fn render_scores(scored: &[ScoredPair]) -> impl Iterator<Item = String> + '_ {
    scored.iter().map(|s| format!("{}\t{}", s.id(), s.value()))
}

pub fn write_scores(scored: &[ScoredPair], path: impl AsRef<Path>) -> Result<usize> {
    write_lines(path, render_scores(scored))
}

/// Pairs with empty text carrying the scores of a sidecar, sorted by id.
/// Enough for binning when the corpus itself is not needed.
pub fn read_scored_ids(path: impl AsRef<Path>) -> Result<Vec<ScoredPair>> {
    let mut scored: Vec<ScoredPair> = read_score_sidecar(path)?
        .into_iter()
        .map(|(id, value)| ScoredPair {
            pair: SentencePair::new(id, "", "", Origin::Bt),
            score: QualityScore {
                value,
                metric: Metric::External,
            },
        })
        .collect();
    scored.sort_by_key(ScoredPair::id);
    Ok(scored)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreSummary {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

pub fn summarize(scored: &[ScoredPair]) -> Option<ScoreSummary> {
    if scored.is_empty() {
        return None;
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for s in scored {
        min = min.min(s.value());
        max = max.max(s.value());
        sum += s.value();
    }
    Some(ScoreSummary {
        n: scored.len(),
        min,
        max,
        mean: sum / scored.len() as f64,
    })
}
