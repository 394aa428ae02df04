use std::fmt;

use crate::error::{Error, Result};

fn check_pair(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateInput("correlation needs at least 2 points"));
    }
    Ok(())
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with an `n - 1` denominator.
pub(crate) fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_pair(xs, ys)?;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput("zero variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_pair(xs, ys)?;
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Summary of 0–6 human ratings with a two-sided 95% normal interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HumanScoreSummary {
    pub mean: f64,
    pub ci_halfwidth: f64,
    pub n: usize,
}

impl fmt::Display for HumanScoreSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} ± {:.2} (n={})", self.mean, self.ci_halfwidth, self.n)
    }
}

pub const HUMAN_SCORE_MAX: f64 = 6.0;
pub const Z_95: f64 = 1.96;

pub fn mean_ci(scores: &[f64]) -> Result<HumanScoreSummary> {
    if scores.len() < 2 {
        return Err(Error::TooFewScores(scores.len()));
    }
    if let Some(&bad) = scores.iter().find(|s| !(0.0..=HUMAN_SCORE_MAX).contains(*s)) {
        return Err(Error::ScoreOutOfRange(bad));
    }
    let n = scores.len();
    Ok(HumanScoreSummary {
        mean: mean(scores),
        ci_halfwidth: Z_95 * sample_variance(scores).sqrt() / (n as f64).sqrt(),
        n,
    })
}

/// Differences at or beyond this magnitude count as significant.
pub const SXS_SIGNIFICANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SxsReport {
    pub delta: f64,
    pub significant: bool,
}

/// Side-by-side delta: mean(test) - mean(base) over paired ratings.
pub fn sxs_delta(scores_base: &[f64], scores_test: &[f64]) -> Result<SxsReport> {
    if scores_base.len() != scores_test.len() {
        return Err(Error::LengthMismatch {
            left: scores_base.len(),
            right: scores_test.len(),
        });
    }
    if scores_base.is_empty() {
        return Err(Error::TooFewScores(0));
    }
    let delta = mean(scores_test) - mean(scores_base);
    Ok(SxsReport {
        delta,
        // rounding slack so a designed 0.1 gap is not lost to float error
        significant: delta.abs() >= SXS_SIGNIFICANCE - 1e-12,
    })
}
