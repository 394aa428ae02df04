use std::fs;
use std::path::PathBuf;

use crate::assemble::{topk_filter, Selector};
use crate::corpus_io::{read_pairs, write_lines, write_pairs, Origin, SentencePair};
use crate::error::{Error, Result};
use crate::quality::{score_corpus_external, ScoredPair};
use crate::Execution;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchSpec {
    pub selectors: Vec<Selector>,
    pub corpus: PathBuf,
    pub scores: PathBuf,
    pub outdir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutput {
    pub selector: Selector,
    pub path: PathBuf,
    pub pairs: usize,
}

pub const GRID_REPORT: &str = "grid.tsv";

impl GridSearchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.selectors.is_empty() {
            return Err(Error::Config("grid search needs at least one selector".into()));
        }
        let counts: Vec<usize> = self
            .selectors
            .iter()
            .filter_map(|s| match s {
                Selector::Count(k) => Some(*k),
                Selector::Threshold(_) => None,
            })
            .collect();
        if counts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("count selectors must be strictly increasing".into()));
        }
        Ok(())
    }
}

fn select(scored: &[ScoredPair], selector: Selector) -> Result<Vec<SentencePair>> {
    if let Selector::Count(k) = selector {
        if k > scored.len() {
            return Err(Error::SelectorExceedsCorpus {
                selector: selector.to_string(),
                n: scored.len(),
            });
        }
    }
    Ok(topk_filter(scored, selector)?.into_iter().map(|s| s.pair).collect())
}

/// Writes `<selector>.tsv` per selector into `outdir`, plus a
/// `grid.tsv` report of `selector<TAB>path<TAB>pairs` rows.
pub fn run_grid_search(spec: &GridSearchSpec, exec: Execution) -> Result<Vec<GridOutput>> {
    spec.validate()?;
    let corpus = read_pairs(&spec.corpus, Origin::Bt)?;
    let scored = score_corpus_external(&corpus, &spec.scores)?;
    // fail before writing anything
    for &s in &spec.selectors {
        if let Selector::Count(k) = s {
            if k > scored.len() {
                return Err(Error::SelectorExceedsCorpus {
                    selector: s.to_string(),
                    n: scored.len(),
                });
            }
        }
    }
    fs::create_dir_all(&spec.outdir).map_err(|e| Error::io(&spec.outdir, e))?;
    let outputs = exec.try_map(&spec.selectors, |&selector| {
        let pairs = select(&scored, selector)?;
        let path = spec.outdir.join(format!("{selector}.tsv"));
        write_pairs(&pairs, &path)?;
        Ok::<_, Error>(GridOutput {
            selector,
            path,
            pairs: pairs.len(),
        })
    })?;
    write_lines(
        spec.outdir.join(GRID_REPORT),
        outputs
            .iter()
            .map(|o| format!("{}\t{}\t{}", o.selector, o.path.display(), o.pairs)),
    )?;
    Ok(outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::read_lines;
    use std::collections::HashSet;

    fn fixture(dir: &std::path::Path, n: usize) -> GridSearchSpec {
        let pairs: Vec<SentencePair> = (0..n)
            .map(|i| SentencePair::new(i as u64, format!("src {i}"), format!("tgt {i}"), Origin::Bt))
            .collect();
        write_pairs(&pairs, dir.join("bt.tsv")).unwrap();
        // scrambled but distinct scores
        write_lines(dir.join("bt.scores"), (0..n).map(|i| format!("{i}\t{}", (i * 37 % n) as f64 / n as f64))).unwrap();
        GridSearchSpec {
            selectors: vec![Selector::Count(10), Selector::Count(20), Selector::Count(50)],
            corpus: dir.join("bt.tsv"),
            scores: dir.join("bt.scores"),
            outdir: dir.join("grid"),
        }
    }

    #[test]
    fn nested_outputs_of_exact_size() {
        let dir = tempfile::tempdir().unwrap();
        let spec = fixture(dir.path(), 100);
        let out = run_grid_search(&spec, Execution::Parallel).unwrap();
        assert_eq!(out.iter().map(|o| o.pairs).collect::<Vec<_>>(), [10, 20, 50]);
        let sets: Vec<HashSet<String>> = out.iter().map(|o| read_lines(&o.path).unwrap().into_iter().collect()).collect();
        assert!(sets[0].is_subset(&sets[1]) && sets[1].is_subset(&sets[2]));
        let report = read_lines(spec.outdir.join(GRID_REPORT)).unwrap();
        assert_eq!(report.len(), 3);
        assert!(report[0].starts_with("top10\t"));
    }

    #[test]
    fn rejects_bad_selectors() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = fixture(dir.path(), 30);
        spec.selectors = vec![Selector::Count(10), Selector::Count(50)];
        assert!(matches!(
            run_grid_search(&spec, Execution::Sequential),
            Err(Error::SelectorExceedsCorpus { n: 30, .. })
        ));
        assert!(!spec.outdir.exists());
        spec.selectors = vec![Selector::Count(20), Selector::Count(10)];
        assert!(matches!(run_grid_search(&spec, Execution::Sequential), Err(Error::Config(_))));
        spec.selectors.clear();
        assert!(matches!(run_grid_search(&spec, Execution::Sequential), Err(Error::Config(_))));
    }
}
