//! Training-set assembly: selection, quality tags, BT tags, translit tags,
//! bitext tag policy, seeded shuffle and manifest.
//!
//! Stages run in a fixed order: score, select (filter or mix), bin, tag,
//! translit, shuffle, write. A failure is reported with the stage name.

mod config;
mod select;
mod tags;

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use sha2::{Digest, Sha256};

pub use config::{
    AssemblyConfig, BitextTagPolicy, BtTagging, GeneratorSpec, MixSpec, ScoringSource, TranslitMode, ASSEMBLY_KEYS,
};
pub use select::{mix_sample, topk_filter, topk_split, Selector};
pub use tags::{apply_bt_tag, apply_quality_tag, apply_translit_tag, leading_tags, strip_tags, Side, Tag};

use crate::binning::{assign_bins, bin_stats_k, BinBoundaries};
use crate::corpus_io::{read_pairs_with, write_lines, write_pairs, Corpus, Origin, ReadOptions, SentencePair};
use crate::error::{Error, Result, StageExt};
use crate::kv::KvDoc;
use crate::quality::ScoredPair;
use crate::translit::{classify_pairs, TranslitLabel, TranslitStats};
use crate::Execution;

/// One output line with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRecord {
    /// Tagged pair; `id` is the output line index and `origin` is kept.
    pub pair: SentencePair,
    /// Line index of the pair in its input corpus.
    pub input_id: u64,
    pub bin: Option<usize>,
    pub label: Option<TranslitLabel>,
}

#[derive(Debug, Clone)]
pub struct Assembled {
    pub records: Vec<TrainingRecord>,
    pub manifest: KvDoc,
}

impl Assembled {
    pub fn pairs(&self) -> Vec<SentencePair> {
        self.records.iter().map(|r| r.pair.clone()).collect()
    }
}

/// SHA-256 of a file's bytes, hex encoded.
pub fn file_sha256(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    std::io::copy(&mut file, &mut hasher).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(hasher.finalize()))
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

pub fn provenance_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".provenance");
    PathBuf::from(name)
}

fn read_corpus(path: &Path, origin: Origin, config: &AssemblyConfig) -> Result<Corpus> {
    read_pairs_with(
        path,
        origin,
        ReadOptions {
            skip_malformed: config.skip_malformed,
        },
    )
}

fn record_input(manifest: &mut KvDoc, name: &str, path: &Path) -> Result<()> {
    manifest.set(format!("input.{name}.path"), path.display());
    manifest.set(format!("input.{name}.sha256"), file_sha256(path)?);
    Ok(())
}

fn join_floats(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Runs every stage in memory without writing the output files.
pub fn build_training_set(config: &AssemblyConfig) -> Result<Assembled> {
    config.validate()?;
    let mut manifest = KvDoc::new();
    manifest.set("tool_version", crate::TOOL_VERSION);
    manifest.set("prng", crate::PRNG_IDENTITY);
    manifest.set("oracle_only", config.oracle_only());
    for (k, v) in config.to_kv().entries() {
        manifest.set(format!("config.{k}"), v);
    }

    // read + score
    let (bitext, bt, bt_scored, bitext_scored) = (|| {
        let bitext = config
            .bitext
            .as_deref()
            .map(|p| read_corpus(p, Origin::Bitext, config))
            .transpose()?;
        let bt = read_corpus(&config.bt, Origin::Bt, config)?;
        if let Some(b) = &config.bitext {
            record_input(&mut manifest, "bitext", b)?;
        }
        record_input(&mut manifest, "bt", &config.bt)?;
        let bt_scored = match &config.scoring {
            Some(source) => {
                for (i, f) in source.files().into_iter().enumerate() {
                    record_input(&mut manifest, &format!("bt_scores{i}"), f)?;
                }
                Some(source.score(&bt)?)
            }
            None => None,
        };
        let bitext_scored = match (&config.bitext_scoring, &bitext, config.bitext_policy) {
            (Some(source), Some(corpus), BitextTagPolicy::Scored) => {
                for (i, f) in source.files().into_iter().enumerate() {
                    record_input(&mut manifest, &format!("bitext_scores{i}"), f)?;
                }
                Some(source.score(corpus)?)
            }
            _ => None,
        };
        Ok((bitext, bt, bt_scored, bitext_scored))
    })()
    .stage("score")?;
    manifest.set("input.bt.pairs", bt.count());
    manifest.set("input.bt.skipped", bt.skipped);
    if let Some(b) = &bitext {
        manifest.set("input.bitext.pairs", b.count());
        manifest.set("input.bitext.skipped", b.skipped);
    }

    // select: kept BT pairs, in input order, with scores when available
    let selected: Vec<ScoredPair> = (|| match (&bt_scored, config.filter, config.mix) {
        (Some(scored), Some(selector), _) => topk_filter(scored, selector),
        (Some(scored), None, Some(mix)) => {
            let (top, rest) = topk_split(scored, Selector::Count(mix.top))?;
            let mut mixed = mix_sample(&top, &rest, mix.extra, mix.seed)?;
            mixed.sort_by_key(ScoredPair::id);
            Ok(mixed)
        }
        (Some(scored), None, None) => Ok(scored.clone()),
        (None, _, _) => Ok(bt.pairs.iter().map(unscored).collect()),
    })()
    .stage("select")?;
    manifest.set("selected.bt", selected.len());

    // bin
    let (bt_bins, boundaries): (Option<HashMap<u64, usize>>, Option<BinBoundaries>) = (|| {
        if config.tagging != BtTagging::Quality {
            return Ok((None, None));
        }
        let (assignment, bounds) = assign_bins(&selected, &config.binning)?;
        if bt_scored.is_some() {
            let stats = bin_stats_k(&selected, &assignment, config.binning.k)?;
            stats.to_kv("bins.bt.", &mut manifest);
        } else {
            let mut counts = vec![0usize; config.binning.k];
            for a in &assignment {
                counts[a.bin - 1] += 1;
            }
            manifest.set("bins.bt.k", config.binning.k);
            for (j, c) in counts.iter().enumerate() {
                manifest.set(format!("bins.bt.bin{}.count", j + 1), c);
            }
        }
        Ok((Some(assignment.iter().map(|a| (a.pair_id, a.bin)).collect()), bounds))
    })()
    .stage("bin")?;
    manifest.set("bins.method", config.binning.method);
    manifest.set("bins.tie_break", "score asc, id asc");
    if let Some(b) = &boundaries {
        manifest.set("bins.cutpoints", join_floats(&b.cutpoints()));
    }

    // tag
    let mut records: Vec<TrainingRecord> = Vec::new();
    (|| {
        let k = config.binning.k;
        if let Some(bitext) = &bitext {
            let scored_bins: Option<HashMap<u64, usize>> = bitext_scored.as_ref().map(|scored| {
                let bounds = boundaries.as_ref().expect("validated: scored policy has boundaries");
                scored.iter().map(|s| (s.id(), bounds.bin_for(s.value()))).collect()
            });
            let mut bitext_counts = vec![0usize; k];
            for pair in &bitext.pairs {
                let bin = match config.bitext_policy {
                    BitextTagPolicy::Untagged => None,
                    BitextTagPolicy::FixedTopBin => Some(k),
                    BitextTagPolicy::Scored => Some(scored_bins.as_ref().expect("validated")[&pair.id]),
                };
                let tagged = match bin {
                    Some(j) => {
                        bitext_counts[j - 1] += 1;
                        apply_quality_tag(pair, j, k)?
                    }
                    None => pair.clone(),
                };
                records.push(TrainingRecord {
                    pair: tagged,
                    input_id: pair.id,
                    bin,
                    label: None,
                });
            }
            if bin_tags_bitext(config) {
                for (j, c) in bitext_counts.iter().enumerate() {
                    manifest.set(format!("bins.bitext.bin{}.count", j + 1), c);
                }
            }
        }
        for s in &selected {
            let (tagged, bin) = match config.tagging {
                BtTagging::Quality => {
                    let j = bt_bins.as_ref().expect("binned")[&s.id()];
                    (apply_quality_tag(&s.pair, j, k)?, Some(j))
                }
                BtTagging::BtTag => (apply_bt_tag(&s.pair)?, None),
                BtTagging::None => (s.pair.clone(), None),
            };
            records.push(TrainingRecord {
                pair: tagged,
                input_id: s.id(),
                bin,
                label: None,
            });
        }
        Ok(())
    })()
    .stage("tag")?;

    // translit
    (|| {
        if config.translit == TranslitMode::Off {
            return Ok(());
        }
        let generator = config
            .generator
            .as_ref()
            .expect("validated")
            .build(config.num_candidates)?;
        let untagged: Vec<SentencePair> = records.iter().map(|r| strip_tags(&r.pair)).collect();
        let labels = classify_pairs(&untagged, &generator, Execution::default());
        let side = match config.translit {
            TranslitMode::SourceSide => Side::Source,
            _ => Side::Target,
        };
        for (record, label) in records.iter_mut().zip(&labels) {
            record.pair = apply_translit_tag(&record.pair, *label, side)?;
            record.label = Some(*label);
        }
        let stats = TranslitStats::from_labels(&labels);
        manifest.set("labels.txn", stats.txn);
        manifest.set("labels.both", stats.both);
        Ok(())
    })()
    .stage("translit")?;

    // shuffle
    (|| {
        let mut seen = HashSet::new();
        for r in &records {
            if !seen.insert((r.pair.origin, r.input_id)) {
                return Err(Error::IdMismatch(format!("{} pair {} emitted twice", r.pair.origin, r.input_id)));
            }
        }
        let mut rng = crate::seeded_rng(config.seed);
        records.shuffle(&mut rng);
        for (i, r) in records.iter_mut().enumerate() {
            r.pair.id = i as u64;
        }
        Ok(())
    })()
    .stage("shuffle")?;
    manifest.set("shuffle.seed", config.seed);

    let n_bitext = records.iter().filter(|r| r.pair.origin == Origin::Bitext).count();
    manifest.set("output.pairs", records.len());
    manifest.set("output.bitext", n_bitext);
    manifest.set("output.bt", records.len() - n_bitext);
    Ok(Assembled { records, manifest })
}

fn bin_tags_bitext(config: &AssemblyConfig) -> bool {
    config.tagging == BtTagging::Quality && config.bitext_policy != BitextTagPolicy::Untagged
}

fn unscored(pair: &SentencePair) -> ScoredPair {
    ScoredPair {
        pair: pair.clone(),
        score: crate::quality::QualityScore {
            value: 0.0,
            metric: crate::quality::Metric::External,
        },
    }
}

fn provenance_line(r: &TrainingRecord) -> String {
    format!(
        "{}\t{}\t{}\t{}",
        r.pair.origin,
        r.input_id,
        r.bin.map_or_else(|| "-".to_string(), |b| b.to_string()),
        r.label.map_or("-", TranslitLabel::as_str)
    )
}

/// Assembles and writes the corpus, a `.provenance` sidecar
/// (`origin<TAB>input_id<TAB>bin<TAB>label` per output line) and a
/// `.manifest` next to the output.
pub fn assemble_training_set(config: &AssemblyConfig) -> Result<Assembled> {
    let mut assembled = build_training_set(config)?;
    write_training_set(&mut assembled, &config.output)?;
    Ok(assembled)
}

/// Writes corpus, provenance and manifest; records `output.sha256`.
pub fn write_training_set(assembled: &mut Assembled, output: &Path) -> Result<()> {
    (|| {
        write_pairs(&assembled.pairs(), output)?;
        write_lines(provenance_path(output), assembled.records.iter().map(provenance_line))?;
        assembled.manifest.set("output.sha256", file_sha256(output)?);
        assembled.manifest.write(manifest_path(output))
    })()
    .stage("write")
}
