use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quality::ScoredPair;

/// Which back-translated pairs to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selector {
    /// The `k` highest-scored pairs, ties broken by ascending id.
    Count(usize),
    /// Every pair scoring at least `t`.
    Threshold(f64),
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::Count(k) => write!(f, "top{k}"),
            Selector::Threshold(t) => write!(f, "min{t}"),
        }
    }
}

impl FromStr for Selector {
    type Err = Error;

    /// Accepts `top<k>` or `min<t>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad selector {s:?}, expected top<k> or min<t>"));
        if let Some(k) = s.strip_prefix("top") {
            k.parse().map(Selector::Count).map_err(|_| bad())
        } else if let Some(t) = s.strip_prefix("min") {
            let t: f64 = t.parse().map_err(|_| bad())?;
            if !t.is_finite() {
                return Err(bad());
            }
            Ok(Selector::Threshold(t))
        } else {
            Err(bad())
        }
    }
}

/// Splits `scored` into (selected, rest), both sorted by pair id.
pub fn topk_split(scored: &[ScoredPair], selector: Selector) -> Result<(Vec<ScoredPair>, Vec<ScoredPair>)> {
    let keep: Vec<bool> = match selector {
        Selector::Count(k) => {
            if k > scored.len() {
                return Err(Error::TooFewPairs { k, n: scored.len() });
            }
            let mut order: Vec<usize> = (0..scored.len()).collect();
            order.sort_by(|&a, &b| {
                scored[b]
                    .value()
                    .total_cmp(&scored[a].value())
                    .then(scored[a].id().cmp(&scored[b].id()))
            });
            let mut keep = vec![false; scored.len()];
            for &i in &order[..k] {
                keep[i] = true;
            }
            keep
        }
        Selector::Threshold(t) => scored.iter().map(|s| s.value() >= t).collect(),
    };
    let (mut selected, mut rest) = (Vec::new(), Vec::new());
    for (s, k) in scored.iter().zip(keep) {
        if k {
            selected.push(s.clone());
        } else {
            rest.push(s.clone());
        }
    }
    selected.sort_by_key(ScoredPair::id);
    rest.sort_by_key(ScoredPair::id);
    Ok((selected, rest))
}

pub fn topk_filter(scored: &[ScoredPair], selector: Selector) -> Result<Vec<ScoredPair>> {
    topk_split(scored, selector).map(|(selected, _)| selected)
}

/// `topk` followed by `m` pairs drawn uniformly without replacement from
/// `remainder`, the draws kept in remainder order.
pub fn mix_sample(topk: &[ScoredPair], remainder: &[ScoredPair], m: usize, seed: u64) -> Result<Vec<ScoredPair>> {
    if m > remainder.len() {
        return Err(Error::SampleTooLarge {
            requested: m,
            available: remainder.len(),
        });
    }
    let ids: HashSet<u64> = topk.iter().map(ScoredPair::id).collect();
    if let Some(dup) = remainder.iter().find(|s| ids.contains(&s.id())) {
        return Err(Error::IdMismatch(format!("id {} in both top-k and remainder", dup.id())));
    }
    let mut rng = crate::seeded_rng(seed);
    let mut picked = rand::seq::index::sample(&mut rng, remainder.len(), m).into_vec();
    picked.sort_unstable();
    let mut out = topk.to_vec();
    out.extend(picked.into_iter().map(|i| remainder[i].clone()));
    Ok(out)
}
