//! Evaluation metrics: corpus BLEU, word-level transliteration F1,
//! correlations, human-score summaries and bootstrap significance.

pub mod bleu;
pub mod bootstrap;
pub mod f1;
pub mod stats;

pub use bleu::{corpus_bleu, tokenize_13a, BleuScore, BleuStats};
pub use bootstrap::{bootstrap_significance, bootstrap_significance_with, draw_index_sets, SignificanceReport};
pub use f1::{word_level_translit_f1, F1Report};
pub use stats::{mean_ci, pearson, spearman, sxs_delta, HumanScoreSummary, SxsReport};

use crate::assemble::Tag;

/// Removes one leading tag token. A text that is only a tag strips to "".
pub fn strip_leading_tag(text: &str) -> (Option<Tag>, &str) {
    if let Some((tag, rest)) = Tag::split_leading(text) {
        return (Some(tag), rest);
    }
    match Tag::parse(text) {
        Some(tag) => (Some(tag), ""),
        None => (None, text),
    }
}

/// Strips every leading tag, e.g. from model outputs before scoring.
pub fn strip_all_tags(mut text: &str) -> &str {
    while let (Some(_), rest) = strip_leading_tag(text) {
        text = rest;
    }
    text
}
