use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::bleu::{bleu_from_stats, sentence_stats, BleuStats};
use super::stats::{mean, sample_variance};
use crate::corpus_io::write_lines;
use crate::error::{Error, Result};
use crate::kv::KvDoc;
use crate::{seeded_rng, Execution};

pub const DEFAULT_SETS: usize = 1000;
pub const DEFAULT_SET_SIZE: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceReport {
    pub n_sets: usize,
    pub set_size: usize,
    pub seed: u64,
    pub bleu_a: Vec<f64>,
    pub bleu_b: Vec<f64>,
    pub t_statistic: f64,
    pub p_value: f64,
    pub df: usize,
}

impl SignificanceReport {
    pub fn mean_a(&self) -> f64 {
        mean(&self.bleu_a)
    }

    pub fn mean_b(&self) -> f64 {
        mean(&self.bleu_b)
    }

    pub fn to_kv(&self) -> KvDoc {
        let mut doc = KvDoc::new();
        doc.set("n_sets", self.n_sets);
        doc.set("set_size", self.set_size);
        doc.set("seed", self.seed);
        doc.set("mean_bleu_a", format!("{:.6}", self.mean_a()));
        doc.set("mean_bleu_b", format!("{:.6}", self.mean_b()));
        doc.set("t_statistic", format!("{:.6}", self.t_statistic));
        doc.set("p_value", format!("{:.6e}", self.p_value));
        doc.set("df", self.df);
        doc
    }

    /// Human summary followed by the key-value block.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} sets of {} sentences (seed {})",
            self.n_sets, self.set_size, self.seed
        );
        let _ = writeln!(out, "system A mean BLEU {:.2}", self.mean_a());
        let _ = writeln!(out, "system B mean BLEU {:.2}", self.mean_b());
        let _ = writeln!(
            out,
            "t = {:.4}, df = {}, p = {:.4e}",
            self.t_statistic, self.df, self.p_value
        );
        out.push('\n');
        out.push_str(&self.to_kv().render());
        out
    }

    /// `set,bleu_a,bleu_b` rows, one per set.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<usize> {
        let rows = self
            .bleu_a
            .iter()
            .zip(&self.bleu_b)
            .enumerate()
            .map(|(i, (a, b))| format!("{i},{a:.6},{b:.6}"));
        write_lines(path, std::iter::once("set,bleu_a,bleu_b".to_string()).chain(rows))
    }
}

/// Seeded index sets, each drawn without replacement. Sets are independent.
pub fn draw_index_sets(n: usize, n_sets: usize, set_size: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if set_size > n {
        return Err(Error::SetTooLarge { set_size, corpus: n });
    }
    let mut rng = seeded_rng(seed);
    Ok((0..n_sets)
        .map(|_| index::sample(&mut rng, n, set_size).into_vec())
        .collect())
}

/// Equal-variance two-sample t-test. Returns `(t, two-sided p)`.
pub fn two_sample_t_test(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::DegenerateInput("t-test needs at least 2 samples per system"));
    }
    let n = a.len() as f64;
    let diff = mean(a) - mean(b);
    let pooled = (sample_variance(a) + sample_variance(b)) / 2.0;
    let se = (pooled * 2.0 / n).sqrt();
    if diff == 0.0 {
        return Ok((0.0, 1.0));
    }
    if se == 0.0 {
        return Ok((diff.signum() * f64::INFINITY, 0.0));
    }
    let t = diff / se;
    let dist = StudentsT::new(0.0, 1.0, 2.0 * n - 2.0).expect("df is positive");
    Ok((t, (2.0 * dist.sf(t.abs())).min(1.0)))
}

pub fn bootstrap_significance<A, B, R>(
    hyp_a: &[A],
    hyp_b: &[B],
    refs: &[R],
    n_sets: usize,
    set_size: usize,
    seed: u64,
) -> Result<SignificanceReport>
where
    A: AsRef<str> + Sync,
    B: AsRef<str> + Sync,
    R: AsRef<str> + Sync,
{
    bootstrap_significance_with(hyp_a, hyp_b, refs, n_sets, set_size, seed, Execution::default())
}

pub fn bootstrap_significance_with<A, B, R>(
    hyp_a: &[A],
    hyp_b: &[B],
    refs: &[R],
    n_sets: usize,
    set_size: usize,
    seed: u64,
    exec: Execution,
) -> Result<SignificanceReport>
where
    A: AsRef<str> + Sync,
    B: AsRef<str> + Sync,
    R: AsRef<str> + Sync,
{
    for len in [hyp_a.len(), hyp_b.len()] {
        if len != refs.len() {
            return Err(Error::LengthMismatch {
                left: len,
                right: refs.len(),
            });
        }
    }
    if set_size == 0 {
        return Err(Error::Config("set size must be at least 1".into()));
    }
    let sets = draw_index_sets(refs.len(), n_sets, set_size, seed)?;
    let indices: Vec<usize> = (0..refs.len()).collect();
    let stats_a = exec.map(&indices, |&i| sentence_stats(hyp_a[i].as_ref(), refs[i].as_ref()));
    let stats_b = exec.map(&indices, |&i| sentence_stats(hyp_b[i].as_ref(), refs[i].as_ref()));
    let set_bleu = |stats: &[BleuStats], set: &[usize]| {
        let mut total = BleuStats::default();
        for &i in set {
            total += stats[i];
        }
        bleu_from_stats(&total).value
    };
    let bleu_a = exec.map(&sets, |s| set_bleu(&stats_a, s));
    let bleu_b = exec.map(&sets, |s| set_bleu(&stats_b, s));
    let (t_statistic, p_value) = two_sample_t_test(&bleu_a, &bleu_b)?;
    Ok(SignificanceReport {
        n_sets,
        set_size,
        seed,
        df: 2 * n_sets - 2,
        bleu_a,
        bleu_b,
        t_statistic,
        p_value,
    })
}
