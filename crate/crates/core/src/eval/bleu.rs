//! Corpus BLEU-4 with 13a tokenization and exponential smoothing.
//!
//! Tokenization follows the mteval-v13a rules: drop `<skipped>`, join
//! `-\n` line breaks, unescape `&quot; &amp; &lt; &gt;`, split off ASCII
//! punctuation, and split `.`/`,` unless they sit next to a digit on the
//! relevant side, and `-` after a digit.
//!
//! Smoothing: walking n = 1..4, each order with zero matches doubles a
//! running factor `s` (starting at 1) and gets precision `1 / (s * total_n)`.
//! Orders for which the whole hypothesis side has no n-grams (every
//! sentence shorter than n tokens) are left out of the geometric mean, so a
//! corpus scored against itself is always 100. Counts are clipped per
//! sentence and summed over the corpus.

use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 4;

static TOKENIZE_RULES: LazyLock<[(Regex, &'static str); 4]> = LazyLock::new(|| {
    [
        (Regex::new(r"([\x7B-\x7E\x5B-\x60\x20-\x26\x28-\x2B\x3A-\x40\x2F])").unwrap(), " $1 "),
        (Regex::new(r"([^0-9])([\.,])").unwrap(), "$1 $2 "),
        (Regex::new(r"([\.,])([^0-9])").unwrap(), " $1 $2"),
        (Regex::new(r"([0-9])(-)").unwrap(), "$1 $2 "),
    ]
});

pub fn tokenize_13a(line: &str) -> Vec<String> {
    let mut text = line.replace("<skipped>", "").replace("-\n", "").replace('\n', " ");
    if text.contains('&') {
        text = text
            .replace("&quot;", "\"")
            .replace("&amp;", "&")
            .replace("&lt;", "<")
            .replace("&gt;", ">");
    }
    let mut text = format!(" {text} ");
    for (re, rep) in TOKENIZE_RULES.iter() {
        text = re.replace_all(&text, *rep).into_owned();
    }
    text.split_whitespace().map(str::to_owned).collect()
}

/// Sufficient statistics for BLEU; they add across sentences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl std::ops::AddAssign for BleuStats {
    fn add_assign(&mut self, other: Self) {
        for n in 0..MAX_ORDER {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

pub fn sentence_stats(hypothesis: &str, reference: &str) -> BleuStats {
    let hyp = tokenize_13a(hypothesis);
    let refr = tokenize_13a(reference);
    let mut stats = BleuStats {
        hyp_len: hyp.len(),
        ref_len: refr.len(),
        ..Default::default()
    };
    for n in 1..=MAX_ORDER {
        let ref_counts = ngram_counts(&refr, n);
        for (gram, count) in ngram_counts(&hyp, n) {
            stats.matches[n - 1] += count.min(ref_counts.get(gram).copied().unwrap_or(0));
        }
        stats.totals[n - 1] = hyp.len().saturating_sub(n - 1);
    }
    stats
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BleuScore {
    /// 0..=100.
    pub value: f64,
    /// Smoothed n-gram precisions as fractions; 0 past `effective_order`.
    pub precisions: [f64; MAX_ORDER],
    /// Number of n-gram orders that entered the mean.
    pub effective_order: usize,
    /// 0 only for an empty hypothesis side, otherwise in (0, 1].
    pub brevity_penalty: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
}

pub fn bleu_from_stats(stats: &BleuStats) -> BleuScore {
    let mut precisions = [0.0; MAX_ORDER];
    let mut smooth = 1.0;
    let mut effective_order = 0;
    for (n, (&total, &matches)) in stats.totals.iter().zip(&stats.matches).enumerate() {
        if total == 0 {
            break;
        }
        effective_order = n + 1;
        precisions[n] = if matches == 0 {
            smooth *= 2.0;
            1.0 / (smooth * total as f64)
        } else {
            matches as f64 / total as f64
        };
    }
    let (c, r) = (stats.hyp_len as f64, stats.ref_len as f64);
    let brevity_penalty = if stats.hyp_len == 0 {
        0.0
    } else if c < r {
        (1.0 - r / c).exp()
    } else {
        1.0
    };
    let value = if effective_order == 0 || brevity_penalty == 0.0 {
        0.0
    } else {
        let used = &precisions[..effective_order];
        let mean_log = used.iter().map(|p| p.ln()).sum::<f64>() / effective_order as f64;
        brevity_penalty * mean_log.exp() * 100.0
    };
    BleuScore {
        value,
        precisions,
        effective_order,
        brevity_penalty,
        hyp_len: stats.hyp_len,
        ref_len: stats.ref_len,
    }
}

pub fn corpus_bleu<H: AsRef<str>, R: AsRef<str>>(hypotheses: &[H], references: &[R]) -> Result<BleuScore> {
    if hypotheses.len() != references.len() {
        return Err(Error::LengthMismatch {
            left: hypotheses.len(),
            right: references.len(),
        });
    }
    if hypotheses.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut total = BleuStats::default();
    for (h, r) in hypotheses.iter().zip(references) {
        total += sentence_stats(h.as_ref(), r.as_ref());
    }
    Ok(bleu_from_stats(&total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_rules() {
        assert_eq!(tokenize_13a("Hello, world."), ["Hello", ",", "world", "."]);
        assert_eq!(tokenize_13a("3.14 and 1,000"), ["3.14", "and", "1,000"]);
        assert_eq!(tokenize_13a("1990-2000 (approx)"), ["1990", "-", "2000", "(", "approx", ")"]);
        assert_eq!(tokenize_13a("a &amp; b"), ["a", "&", "b"]);
        assert_eq!(tokenize_13a("it's"), ["it's"]);
        assert_eq!(tokenize_13a("end."), ["end", "."]);
    }

    #[test]
    fn identical_is_100() {
        let s = corpus_bleu(&["the cat sat on the mat"], &["the cat sat on the mat"]).unwrap();
        assert!((s.value - 100.0).abs() < 1e-9);
        assert_eq!(s.brevity_penalty, 1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(corpus_bleu(&["a"], &["a", "b"]), Err(Error::LengthMismatch { .. })));
        let empty: [&str; 0] = [];
        assert!(matches!(corpus_bleu(&empty, &empty), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn short_corpus_uses_effective_order() {
        // no 4-grams in a 3-token corpus
        let s = corpus_bleu(&["a b c"], &["a b c"]).unwrap();
        assert_eq!(s.effective_order, 3);
        assert!((s.value - 100.0).abs() < 1e-9);
        let empty = corpus_bleu(&[""], &["a b"]).unwrap();
        assert_eq!((empty.value, empty.brevity_penalty), (0.0, 0.0));
    }
}
