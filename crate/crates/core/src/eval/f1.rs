use std::fmt;

use crate::corpus_io::tokenize_words;
use crate::error::{Error, Result};
use crate::translit::{word_set, CandidateGenerator};

/// Word-level scores for the "needs transliteration" class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1Report {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl F1Report {
    /// With no gold and no predicted positives every measure is 1.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = if tp + fp > 0 {
            tp as f64 / (tp + fp) as f64
        } else if fn_ == 0 {
            1.0
        } else {
            0.0
        };
        let recall = if tp + fn_ > 0 {
            tp as f64 / (tp + fn_) as f64
        } else if fp == 0 {
            1.0
        } else {
            0.0
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
        }
    }
}

impl fmt::Display for F1Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "precision={:.4} recall={:.4} f1={:.4} tp={} fp={} fn={}",
            self.precision, self.recall, self.f1, self.tp, self.fp, self.fn_
        )
    }
}

/// Each source token is gold-positive when one of its candidates appears in
/// the reference, and predicted-positive when one appears in the hypothesis.
/// Hypotheses must already be tag-stripped.
pub fn word_level_translit_f1<S, H, R>(
    sources: &[S],
    hypotheses: &[H],
    references: &[R],
    gen: &CandidateGenerator,
) -> Result<F1Report>
where
    S: AsRef<str>,
    H: AsRef<str>,
    R: AsRef<str>,
{
    if sources.len() != hypotheses.len() || sources.len() != references.len() {
        let right = if hypotheses.len() != sources.len() {
            hypotheses.len()
        } else {
            references.len()
        };
        return Err(Error::LengthMismatch {
            left: sources.len(),
            right,
        });
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for ((src, hyp), refr) in sources.iter().zip(hypotheses).zip(references) {
        let hyp_words = word_set(hyp.as_ref());
        let ref_words = word_set(refr.as_ref());
        for word in tokenize_words(src.as_ref()) {
            let candidates = gen.candidates(word);
            let gold = candidates.iter().any(|c| ref_words.contains(c));
            let predicted = candidates.iter().any(|c| hyp_words.contains(c));
            match (gold, predicted) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    Ok(F1Report::from_counts(tp, fp, fn_))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::translit::CandidateTable;

    fn gen() -> CandidateGenerator {
        let mut t = CandidateTable::new();
        t.insert("कूल्सन", ["coulson"]).unwrap();
        t.insert("फ़ोन", ["phone"]).unwrap();
        CandidateGenerator::table(t)
    }

    #[test]
    fn degenerate_conventions() {
        let r = F1Report::from_counts(0, 0, 0);
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
        let r = F1Report::from_counts(0, 2, 0);
        assert_eq!((r.precision, r.f1), (0.0, 0.0));
        let r = F1Report::from_counts(0, 0, 2);
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn omitted_entity_is_a_false_negative() {
        let src = ["कूल्सन ने फ़ोन किया", "वह घर गया", "फ़ोन"];
        let refs = ["Coulson made a phone call", "he went home", "phone"];
        let hyps = ["He made a phone call", "he went home", "telephone"];
        let r = word_level_translit_f1(&src, &hyps, &refs, &gen()).unwrap();
        assert_eq!((r.tp, r.fp, r.fn_), (1, 0, 2));
        let perfect = word_level_translit_f1(&src, &refs, &refs, &gen()).unwrap();
        assert_eq!(perfect.f1, 1.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            word_level_translit_f1(&["a"], &["a", "b"], &["a"], &gen()),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
