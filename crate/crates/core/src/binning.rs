//! Quality bins for scored pairs. Bin 1 holds the lowest scores, bin `k` the
//! highest.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use crate::corpus_io::{read_id_sidecar, write_lines, SentencePair};
use crate::error::{Error, Result};
use crate::kv::KvDoc;
use crate::quality::ScoredPair;

pub const DEFAULT_BINS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinMethod {
    EqualVolume,
    EqualWidth,
    Random,
}

impl fmt::Display for BinMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BinMethod::EqualVolume => "equal-volume",
            BinMethod::EqualWidth => "equal-width",
            BinMethod::Random => "random",
        })
    }
}

impl FromStr for BinMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal-volume" => Ok(BinMethod::EqualVolume),
            "equal-width" => Ok(BinMethod::EqualWidth),
            "random" => Ok(BinMethod::Random),
            other => Err(Error::Config(format!("unknown binning method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinningConfig {
    pub k: usize,
    pub method: BinMethod,
    pub seed: Option<u64>,
}

impl Default for BinningConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_BINS,
            method: BinMethod::EqualVolume,
            seed: None,
        }
    }
}

impl BinningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("bin count must be at least 1".into()));
        }
        if self.method == BinMethod::Random && self.seed.is_none() {
            return Err(Error::Config("random binning requires a seed".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinAssignment {
    pub pair_id: u64,
    pub bin: usize,
}

/// Score cutpoints derived from a binning, used to place pairs that were
/// not part of the binned set (e.g. scored bitext).
#[derive(Debug, Clone, PartialEq)]
pub enum BinBoundaries {
    /// `cutpoints[j]` is the smallest score in bin `j + 2`.
    EqualVolume { cutpoints: Vec<f64> },
    EqualWidth { lo: f64, hi: f64, k: usize },
}

impl BinBoundaries {
    pub fn k(&self) -> usize {
        match self {
            BinBoundaries::EqualVolume { cutpoints } => cutpoints.len() + 1,
            BinBoundaries::EqualWidth { k, .. } => *k,
        }
    }

    pub fn bin_for(&self, score: f64) -> usize {
        match self {
            BinBoundaries::EqualVolume { cutpoints } => 1 + cutpoints.iter().filter(|&&c| score >= c).count(),
            BinBoundaries::EqualWidth { lo, hi, k } => {
                if score <= *lo || hi == lo {
                    1
                } else {
                    width_bin(score, *lo, *hi, *k)
                }
            }
        }
    }

    /// Score cutpoints between consecutive bins.
    pub fn cutpoints(&self) -> Vec<f64> {
        match self {
            BinBoundaries::EqualVolume { cutpoints } => cutpoints.clone(),
            BinBoundaries::EqualWidth { lo, hi, k } => {
                (1..*k).map(|j| lo + (hi - lo) * j as f64 / *k as f64).collect()
            }
        }
    }
}

fn width_bin(score: f64, lo: f64, hi: f64, k: usize) -> usize {
    let raw = ((score - lo) / (hi - lo) * k as f64).floor();
    // raw is non-negative for score >= lo
    (raw as usize + 1).min(k)
}

/// Ranks pairs by `(score, id)` and gives rank `r` bin `floor(r*k/N) + 1`.
/// The result follows the input order.
pub fn equal_volume_bins(scored: &[ScoredPair], k: usize) -> Result<Vec<BinAssignment>> {
    let n = scored.len();
    if k == 0 || k > n {
        return Err(Error::TooFewPairs { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        scored[a]
            .value()
            .total_cmp(&scored[b].value())
            .then(scored[a].id().cmp(&scored[b].id()))
    });
    let mut bins = vec![0usize; n];
    for (rank, &index) in order.iter().enumerate() {
        bins[index] = (rank as u128 * k as u128 / n as u128) as usize + 1;
    }
    Ok(scored
        .iter()
        .zip(bins)
        .map(|(s, bin)| BinAssignment { pair_id: s.id(), bin })
        .collect())
}

/// Splits `[min, max]` of the scores into `k` equal intervals. When every
/// score is equal all pairs land in bin 1.
pub fn equal_width_bins(scored: &[ScoredPair], k: usize) -> Result<Vec<BinAssignment>> {
    if scored.is_empty() {
        return Err(Error::EmptyInput);
    }
    if k == 0 {
        return Err(Error::TooFewPairs { k, n: scored.len() });
    }
    let bounds = width_bounds(scored, k);
    Ok(scored
        .iter()
        .map(|s| BinAssignment {
            pair_id: s.id(),
            bin: bounds.bin_for(s.value()),
        })
        .collect())
}

fn width_bounds(scored: &[ScoredPair], k: usize) -> BinBoundaries {
    let (lo, hi) = scored.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        (lo.min(s.value()), hi.max(s.value()))
    });
    BinBoundaries::EqualWidth { lo, hi, k }
}

/// Independent uniform bin per pair, drawn in input order from a seeded
/// [`crate::PRNG_IDENTITY`] generator.
pub fn random_bins(pairs: &[SentencePair], k: usize, seed: u64) -> Vec<BinAssignment> {
    let k = k.max(1);
    let mut rng = crate::seeded_rng(seed);
    pairs
        .iter()
        .map(|p| BinAssignment {
            pair_id: p.id,
            bin: rng.random_range(1..=k),
        })
        .collect()
}

/// Runs the configured method. Boundaries are returned for the score-based
/// methods.
pub fn assign_bins(scored: &[ScoredPair], config: &BinningConfig) -> Result<(Vec<BinAssignment>, Option<BinBoundaries>)> {
    config.validate()?;
    match config.method {
        BinMethod::EqualVolume => {
            let assignment = equal_volume_bins(scored, config.k)?;
            let mut mins = vec![f64::INFINITY; config.k];
            for (s, a) in scored.iter().zip(&assignment) {
                mins[a.bin - 1] = mins[a.bin - 1].min(s.value());
            }
            let cutpoints = mins[1..].to_vec();
            Ok((assignment, Some(BinBoundaries::EqualVolume { cutpoints })))
        }
        BinMethod::EqualWidth => {
            let assignment = equal_width_bins(scored, config.k)?;
            Ok((assignment, Some(width_bounds(scored, config.k))))
        }
        BinMethod::Random => {
            let pairs: Vec<SentencePair> = scored.iter().map(|s| s.pair.clone()).collect();
            let seed = config.seed.expect("validated");
            Ok((random_bins(&pairs, config.k, seed), None))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinStat {
    pub bin: usize,
    pub count: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinStats {
    pub bins: Vec<BinStat>,
}

impl BinStats {
    pub fn k(&self) -> usize {
        self.bins.len()
    }

    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.bins.iter().map(|b| b.count).collect()
    }

    pub fn to_kv(&self, prefix: &str, doc: &mut KvDoc) {
        doc.set(format!("{prefix}k"), self.k());
        for b in &self.bins {
            let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |v| v.to_string());
            doc.set(format!("{prefix}bin{}.count", b.bin), b.count);
            doc.set(format!("{prefix}bin{}.min", b.bin), opt(b.min));
            doc.set(format!("{prefix}bin{}.max", b.bin), opt(b.max));
            doc.set(format!("{prefix}bin{}.mean", b.bin), opt(b.mean));
        }
    }
}

impl fmt::Display for BinStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>6} {:>10} {:>12} {:>12} {:>12}", "bin", "count", "min", "max", "mean")?;
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
        for b in &self.bins {
            writeln!(
                f,
                "{:>6} {:>10} {:>12} {:>12} {:>12}",
                b.bin,
                b.count,
                cell(b.min),
                cell(b.max),
                cell(b.mean)
            )?;
        }
        Ok(())
    }
}

/// Per-bin count, min, max and mean. Bins are numbered `1..=k` where `k` is
/// the largest bin in the assignment; empty bins report no min/max/mean.
pub fn bin_stats(scored: &[ScoredPair], assignment: &[BinAssignment]) -> Result<BinStats> {
    let k = assignment.iter().map(|a| a.bin).max().unwrap_or(0);
    bin_stats_k(scored, assignment, k)
}

pub fn bin_stats_k(scored: &[ScoredPair], assignment: &[BinAssignment], k: usize) -> Result<BinStats> {
    if scored.len() != assignment.len() {
        return Err(Error::IdMismatch(format!(
            "{} scored pairs, {} assignments",
            scored.len(),
            assignment.len()
        )));
    }
    let mut by_id: HashMap<u64, usize> = HashMap::with_capacity(assignment.len());
    for a in assignment {
        if a.bin == 0 || a.bin > k {
            return Err(Error::BinOutOfRange { bin: a.bin, k });
        }
        if by_id.insert(a.pair_id, a.bin).is_some() {
            return Err(Error::IdMismatch(format!("id {} assigned twice", a.pair_id)));
        }
    }
    let mut bins: Vec<BinStat> = (1..=k)
        .map(|bin| BinStat {
            bin,
            count: 0,
            min: None,
            max: None,
            mean: None,
        })
        .collect();
    let mut sums = vec![0.0; k];
    for s in scored {
        let bin = *by_id
            .get(&s.id())
            .ok_or_else(|| Error::IdMismatch(format!("id {} has no bin", s.id())))?;
        let slot = &mut bins[bin - 1];
        let v = s.value();
        slot.count += 1;
        slot.min = Some(slot.min.map_or(v, |m| m.min(v)));
        slot.max = Some(slot.max.map_or(v, |m| m.max(v)));
        sums[bin - 1] += v;
    }
    for (slot, sum) in bins.iter_mut().zip(sums) {
        if slot.count > 0 {
            slot.mean = Some(sum / slot.count as f64);
        }
    }
    Ok(BinStats { bins })
}

/// Equal-volume statistics for each requested bin count.
pub fn sweep_bin_counts(scored: &[ScoredPair], ks: &[usize]) -> Result<Vec<(usize, BinStats)>> {
    ks.iter()
        .map(|&k| {
            let assignment = equal_volume_bins(scored, k)?;
            Ok((k, bin_stats_k(scored, &assignment, k)?))
        })
        .collect()
}

pub fn write_assignments(assignment: &[BinAssignment], path: impl AsRef<Path>) -> Result<usize> {
    write_lines(path, assignment.iter().map(|a| format!("{}\t{}", a.pair_id, a.bin)))
}

pub fn read_assignments(path: impl AsRef<Path>) -> Result<Vec<BinAssignment>> {
    let path = path.as_ref();
    read_id_sidecar(path)?
        .into_iter()
        .map(|(line, id, raw)| {
            let bin = raw
                .trim()
                .parse()
                .map_err(|_| Error::malformed(path, line, format!("bad bin {raw:?}")))?;
            Ok(BinAssignment { pair_id: id, bin })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::Origin;
    use crate::quality::{Metric, QualityScore};
    use proptest::prelude::*;

    fn scored(values: &[f64]) -> Vec<ScoredPair> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| ScoredPair {
                pair: SentencePair::new(i as u64, format!("s{i}"), format!("t{i}"), Origin::Bt),
                score: QualityScore {
                    value: v,
                    metric: Metric::External,
                },
            })
            .collect()
    }

    fn bins(a: &[BinAssignment]) -> Vec<usize> {
        a.iter().map(|a| a.bin).collect()
    }

    #[test]
    fn equal_volume_examples() {
        let s = scored(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(bins(&equal_volume_bins(&s, 2).unwrap()), vec![1, 1, 2, 2]);

        // floor(r*4/5)+1 for r = 0..4 is 1,1,2,3,4
        let s = scored(&[0.5, 0.1, 0.4, 0.2, 0.3]);
        let stats = bin_stats(&s, &equal_volume_bins(&s, 4).unwrap()).unwrap();
        assert_eq!(stats.counts(), vec![2, 1, 1, 1]);

        let s = scored(&[0.7; 8]);
        assert_eq!(bins(&equal_volume_bins(&s, 4).unwrap()), vec![1, 1, 2, 2, 3, 3, 4, 4]);

        assert!(matches!(equal_volume_bins(&scored(&[0.1]), 2), Err(Error::TooFewPairs { k: 2, n: 1 })));
    }

    #[test]
    fn equal_width_examples() {
        assert_eq!(bins(&equal_width_bins(&scored(&[0.0, 0.5, 1.0]), 2).unwrap()), vec![1, 2, 2]);
        assert_eq!(bins(&equal_width_bins(&scored(&[0.3; 5]), 4).unwrap()), vec![1; 5]);
        assert_eq!(bins(&equal_width_bins(&scored(&[-1.0, 2.0]), 3).unwrap()), vec![1, 3]);
        assert!(matches!(equal_width_bins(&[], 4), Err(Error::EmptyInput)));
    }

    #[test]
    fn random_is_deterministic() {
        let pairs: Vec<_> = scored(&[0.0; 50]).into_iter().map(|s| s.pair).collect();
        assert_eq!(random_bins(&pairs, 4, 7), random_bins(&pairs, 4, 7));
        assert_ne!(random_bins(&pairs, 4, 7), random_bins(&pairs, 4, 8));
        assert!(random_bins(&pairs, 1, 3).iter().all(|a| a.bin == 1));
    }

    #[test]
    fn random_is_roughly_uniform() {
        let n = 100_000;
        let pairs: Vec<_> = (0..n).map(|i| SentencePair::new(i, "s", "t", Origin::Bt)).collect();
        let mut counts = [0usize; 4];
        for a in random_bins(&pairs, 4, 2024) {
            counts[a.bin - 1] += 1;
        }
        // sigma = sqrt(n * 1/4 * 3/4) ~ 136.9
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - 25_000.0).abs() < 5.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn stats_report_empty_bins_as_absent() {
        let s = scored(&[0.1, 0.2]);
        let a = vec![
            BinAssignment { pair_id: 0, bin: 1 },
            BinAssignment { pair_id: 1, bin: 3 },
        ];
        let stats = bin_stats(&s, &a).unwrap();
        assert_eq!(stats.counts(), vec![1, 0, 1]);
        assert_eq!(stats.bins[1].mean, None);
        assert_eq!(stats.bins[2].mean, Some(0.2));

        let wrong = vec![BinAssignment { pair_id: 5, bin: 1 }, BinAssignment { pair_id: 1, bin: 1 }];
        assert!(matches!(bin_stats(&s, &wrong), Err(Error::IdMismatch(_))));
    }

    #[test]
    fn sweep_matches_direct_calls() {
        let s = scored(&(0..37).map(|i| ((i * 17) % 11) as f64 / 10.0).collect::<Vec<_>>());
        let sweep = sweep_bin_counts(&s, &[3, 4, 5]).unwrap();
        assert_eq!(sweep.len(), 3);
        for (k, stats) in sweep {
            assert_eq!(stats, bin_stats_k(&s, &equal_volume_bins(&s, k).unwrap(), k).unwrap());
        }
        let one = sweep_bin_counts(&s, &[1]).unwrap();
        assert_eq!(one[0].1.counts(), vec![37]);
    }

    #[test]
    fn boundaries_place_new_scores_consistently() {
        let s = scored(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]);
        let config = BinningConfig::default();
        let (assign, bounds) = assign_bins(&s, &config).unwrap();
        let bounds = bounds.unwrap();
        assert_eq!(bounds.cutpoints(), vec![0.3, 0.5, 0.7]);
        for (sp, a) in s.iter().zip(&assign) {
            assert_eq!(bounds.bin_for(sp.value()), a.bin);
        }
        assert_eq!(bounds.bin_for(-5.0), 1);
        assert_eq!(bounds.bin_for(5.0), 4);
    }

    proptest! {
        #[test]
        fn equal_volume_partition(values in prop::collection::vec(0u8..5, 1..80), k in 1usize..8) {
            prop_assume!(k <= values.len());
            let s = scored(&values.iter().map(|&v| v as f64 / 4.0).collect::<Vec<_>>());
            let a = equal_volume_bins(&s, k).unwrap();
            let stats = bin_stats_k(&s, &a, k).unwrap();
            let counts = stats.counts();
            prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
            for w in stats.bins.windows(2) {
                prop_assert!(w[0].max.unwrap() <= w[1].min.unwrap());
            }
        }

        #[test]
        fn equal_width_depends_on_score_only(values in prop::collection::vec(-3.0f64..3.0, 1..60), k in 1usize..7) {
            let s = scored(&values);
            let a = equal_width_bins(&s, k).unwrap();
            let mut reversed = s.clone();
            reversed.reverse();
            let b = equal_width_bins(&reversed, k).unwrap();
            let lookup: HashMap<u64, usize> = b.iter().map(|x| (x.pair_id, x.bin)).collect();
            for x in &a {
                prop_assert!(x.bin >= 1 && x.bin <= k);
                prop_assert_eq!(lookup[&x.pair_id], x.bin);
            }
        }
    }
}
