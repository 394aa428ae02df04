use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::binning::{BinMethod, BinningConfig, DEFAULT_BINS};
use crate::corpus_io::Corpus;
use crate::error::{Error, Result};
use crate::kv::KvDoc;
use crate::quality::{score_corpus_embeddings, score_corpus_external, score_corpus_roundtrip, ScoredPair};
use crate::translit::{CandidateGenerator, CandidateTable, DEFAULT_CANDIDATES};

use super::select::Selector;

/// Where quality scores for a corpus come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoringSource {
    External(PathBuf),
    Embeddings { src: PathBuf, tgt: PathBuf },
    RoundTrip(PathBuf),
}

impl ScoringSource {
    pub fn score(&self, corpus: &Corpus) -> Result<Vec<ScoredPair>> {
        match self {
            ScoringSource::External(p) => score_corpus_external(corpus, p),
            ScoringSource::Embeddings { src, tgt } => score_corpus_embeddings(corpus, src, tgt),
            ScoringSource::RoundTrip(p) => score_corpus_roundtrip(corpus, p),
        }
    }

    pub fn files(&self) -> Vec<&Path> {
        match self {
            ScoringSource::External(p) | ScoringSource::RoundTrip(p) => vec![p],
            ScoringSource::Embeddings { src, tgt } => vec![src, tgt],
        }
    }

    fn from_kv(doc: &KvDoc, prefix: &str, base: &Path) -> Result<Option<Self>> {
        let get = |key: &str| doc.get(&format!("{prefix}{key}")).map(|v| resolve(base, v));
        let found = [
            get("scores").map(ScoringSource::External),
            match (get("src_embeddings"), get("tgt_embeddings")) {
                (Some(src), Some(tgt)) => Some(ScoringSource::Embeddings { src, tgt }),
                (None, None) => None,
                _ => {
                    return Err(Error::Config(format!(
                        "{prefix}src_embeddings and {prefix}tgt_embeddings must be given together"
                    )))
                }
            },
            get("roundtrip").map(ScoringSource::RoundTrip),
        ];
        let mut found = found.into_iter().flatten();
        let first = found.next();
        if found.next().is_some() {
            return Err(Error::Config(format!("more than one {prefix}scoring source given")));
        }
        Ok(first)
    }

    fn to_kv(&self, prefix: &str, doc: &mut KvDoc) {
        match self {
            ScoringSource::External(p) => doc.set(format!("{prefix}scores"), p.display()),
            ScoringSource::Embeddings { src, tgt } => {
                doc.set(format!("{prefix}src_embeddings"), src.display());
                doc.set(format!("{prefix}tgt_embeddings"), tgt.display());
            }
            ScoringSource::RoundTrip(p) => doc.set(format!("{prefix}roundtrip"), p.display()),
        }
    }
}

/// How back-translated sources are marked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtTagging {
    /// One `<binJ>` tag per pair from its quality bin.
    Quality,
    /// A single `<BT>` tag on every back-translated pair.
    BtTag,
    /// No tags.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitextTagPolicy {
    Untagged,
    FixedTopBin,
    /// Bitext is scored and placed with the bin boundaries derived from BT.
    Scored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranslitMode {
    Off,
    TargetSide,
    SourceSide,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Table(PathBuf),
    Romanize(String),
}

impl GeneratorSpec {
    pub fn build(&self, n: usize) -> Result<CandidateGenerator> {
        let generator = match self {
            GeneratorSpec::Table(p) => CandidateGenerator::table(CandidateTable::load(p)?),
            GeneratorSpec::Romanize(lang) => CandidateGenerator::romanizer(lang)?,
        };
        generator.with_candidates(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixSpec {
    pub top: usize,
    pub extra: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyConfig {
    pub bitext: Option<PathBuf>,
    pub bt: PathBuf,
    pub scoring: Option<ScoringSource>,
    pub bitext_scoring: Option<ScoringSource>,
    pub tagging: BtTagging,
    pub binning: BinningConfig,
    pub bitext_policy: BitextTagPolicy,
    pub translit: TranslitMode,
    pub generator: Option<GeneratorSpec>,
    pub num_candidates: usize,
    pub filter: Option<Selector>,
    pub mix: Option<MixSpec>,
    pub output: PathBuf,
    pub seed: u64,
    pub skip_malformed: bool,
}

/// Keys understood by [`AssemblyConfig::from_kv`].
pub const ASSEMBLY_KEYS: &[&str] = &[
    "bitext",
    "bt",
    "scores",
    "src_embeddings",
    "tgt_embeddings",
    "roundtrip",
    "bitext_scores",
    "bitext_src_embeddings",
    "bitext_tgt_embeddings",
    "bitext_roundtrip",
    "tagging",
    "bins",
    "binning",
    "binning_seed",
    "bitext_policy",
    "translit",
    "translit_candidates",
    "translit_romanize",
    "translit_n",
    "filter_top",
    "filter_threshold",
    "mix_top",
    "mix_extra",
    "mix_seed",
    "output",
    "seed",
    "skip_malformed",
];

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = Path::new(value);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn parse<T: FromStr>(doc: &KvDoc, key: &str) -> Result<Option<T>> {
    doc.get(key)
        .map(|v| v.parse().map_err(|_| Error::Config(format!("bad value for {key}: {v:?}"))))
        .transpose()
}

impl AssemblyConfig {
    pub fn new(bt: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        Self {
            bitext: None,
            bt: bt.into(),
            scoring: None,
            bitext_scoring: None,
            tagging: BtTagging::Quality,
            binning: BinningConfig::default(),
            bitext_policy: BitextTagPolicy::Untagged,
            translit: TranslitMode::Off,
            generator: None,
            num_candidates: DEFAULT_CANDIDATES,
            filter: None,
            mix: None,
            output: output.into(),
            seed: 0,
            skip_malformed: false,
        }
    }

    /// Reads a flat config. Relative paths resolve against `base`; keys not
    /// listed in [`ASSEMBLY_KEYS`] or `extra_keys` are rejected.
    pub fn from_kv(doc: &KvDoc, base: &Path, extra_keys: &[&str]) -> Result<Self> {
        for (key, _) in doc.entries() {
            if !ASSEMBLY_KEYS.contains(&key) && !extra_keys.contains(&key) {
                return Err(Error::Config(format!("unknown key {key:?}")));
            }
        }
        let required = |key: &str| {
            doc.get(key)
                .map(|v| resolve(base, v))
                .ok_or_else(|| Error::Config(format!("missing required key {key}")))
        };
        let seed = parse(doc, "seed")?.unwrap_or(0);
        let method: BinMethod = parse(doc, "binning")?.unwrap_or(BinMethod::EqualVolume);
        let binning = BinningConfig {
            k: parse(doc, "bins")?.unwrap_or(DEFAULT_BINS),
            method,
            seed: match method {
                BinMethod::Random => Some(parse(doc, "binning_seed")?.unwrap_or(seed)),
                _ => parse(doc, "binning_seed")?,
            },
        };
        let tagging = match doc.get("tagging").unwrap_or("quality") {
            "quality" => BtTagging::Quality,
            "bt" => BtTagging::BtTag,
            "none" => BtTagging::None,
            other => return Err(Error::Config(format!("bad tagging {other:?}"))),
        };
        let bitext_policy = match doc.get("bitext_policy").unwrap_or("untagged") {
            "untagged" => BitextTagPolicy::Untagged,
            "top-bin" => BitextTagPolicy::FixedTopBin,
            "scored" => BitextTagPolicy::Scored,
            other => return Err(Error::Config(format!("bad bitext_policy {other:?}"))),
        };
        let translit = match doc.get("translit").unwrap_or("off") {
            "off" => TranslitMode::Off,
            "target" => TranslitMode::TargetSide,
            "source" => TranslitMode::SourceSide,
            other => return Err(Error::Config(format!("bad translit {other:?}"))),
        };
        let generator = match (doc.get("translit_candidates"), doc.get("translit_romanize")) {
            (Some(p), None) => Some(GeneratorSpec::Table(resolve(base, p))),
            (None, Some(lang)) => Some(GeneratorSpec::Romanize(lang.to_owned())),
            (None, None) => None,
            _ => return Err(Error::Config("give translit_candidates or translit_romanize, not both".into())),
        };
        let filter = match (parse::<usize>(doc, "filter_top")?, parse::<f64>(doc, "filter_threshold")?) {
            (Some(k), None) => Some(Selector::Count(k)),
            (None, Some(t)) => Some(Selector::Threshold(t)),
            (None, None) => None,
            _ => return Err(Error::Config("give filter_top or filter_threshold, not both".into())),
        };
        let mix = match (parse(doc, "mix_top")?, parse(doc, "mix_extra")?) {
            (Some(top), Some(extra)) => Some(MixSpec {
                top,
                extra,
                seed: parse(doc, "mix_seed")?.unwrap_or(seed),
            }),
            (None, None) => None,
            _ => return Err(Error::Config("mix_top and mix_extra must be given together".into())),
        };
        let config = Self {
            bitext: doc.get("bitext").map(|v| resolve(base, v)),
            bt: required("bt")?,
            scoring: ScoringSource::from_kv(doc, "", base)?,
            bitext_scoring: ScoringSource::from_kv(doc, "bitext_", base)?,
            tagging,
            binning,
            bitext_policy,
            translit,
            generator,
            num_candidates: parse(doc, "translit_n")?.unwrap_or(DEFAULT_CANDIDATES),
            filter,
            mix,
            output: required("output")?,
            seed,
            skip_malformed: parse(doc, "skip_malformed")?.unwrap_or(false),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let doc = KvDoc::read(path)?;
        Self::from_kv(&doc, path.parent().unwrap_or(Path::new(".")), &[])
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_owned()));
        self.binning.validate()?;
        let binned = self.tagging == BtTagging::Quality;
        if binned && self.binning.method != BinMethod::Random && self.scoring.is_none() {
            return fail("quality tagging with score-based binning needs a scoring source");
        }
        if (self.filter.is_some() || self.mix.is_some()) && self.scoring.is_none() {
            return fail("filtering and mixing need a scoring source");
        }
        if self.filter.is_some() && self.mix.is_some() {
            return fail("filter and mix are mutually exclusive");
        }
        match self.bitext_policy {
            BitextTagPolicy::Untagged => {}
            BitextTagPolicy::FixedTopBin if !binned => return fail("bitext_policy top-bin needs tagging = quality"),
            BitextTagPolicy::Scored => {
                if !binned {
                    return fail("bitext_policy scored needs tagging = quality");
                }
                if self.binning.method == BinMethod::Random {
                    return fail("bitext_policy scored needs score-based binning");
                }
                if self.bitext_scoring.is_none() {
                    return fail("bitext_policy scored needs a bitext scoring source");
                }
            }
            BitextTagPolicy::FixedTopBin => {}
        }
        if self.bitext_policy != BitextTagPolicy::Untagged && self.bitext.is_none() {
            return fail("bitext_policy other than untagged needs a bitext corpus");
        }
        if self.translit != TranslitMode::Off && self.generator.is_none() {
            return fail("translit tagging needs translit_candidates or translit_romanize");
        }
        if self.num_candidates == 0 {
            return fail("translit_n must be at least 1");
        }
        Ok(())
    }

    /// True when tags are needed at inference time and the corpus is only
    /// usable with oracle tags.
    pub fn oracle_only(&self) -> bool {
        self.translit == TranslitMode::SourceSide
    }

    /// Canonical key-value rendering, used for the manifest echo.
    pub fn to_kv(&self) -> KvDoc {
        let mut doc = KvDoc::new();
        if let Some(b) = &self.bitext {
            doc.set("bitext", b.display());
        }
        doc.set("bt", self.bt.display());
        if let Some(s) = &self.scoring {
            s.to_kv("", &mut doc);
        }
        if let Some(s) = &self.bitext_scoring {
            s.to_kv("bitext_", &mut doc);
        }
        doc.set(
            "tagging",
            match self.tagging {
                BtTagging::Quality => "quality",
                BtTagging::BtTag => "bt",
                BtTagging::None => "none",
            },
        );
        doc.set("bins", self.binning.k);
        doc.set("binning", self.binning.method);
        if let Some(seed) = self.binning.seed {
            doc.set("binning_seed", seed);
        }
        doc.set(
            "bitext_policy",
            match self.bitext_policy {
                BitextTagPolicy::Untagged => "untagged",
                BitextTagPolicy::FixedTopBin => "top-bin",
                BitextTagPolicy::Scored => "scored",
            },
        );
        doc.set(
            "translit",
            match self.translit {
                TranslitMode::Off => "off",
                TranslitMode::TargetSide => "target",
                TranslitMode::SourceSide => "source",
            },
        );
        match &self.generator {
            Some(GeneratorSpec::Table(p)) => doc.set("translit_candidates", p.display()),
            Some(GeneratorSpec::Romanize(l)) => doc.set("translit_romanize", l),
            None => {}
        }
        doc.set("translit_n", self.num_candidates);
        match self.filter {
            Some(Selector::Count(k)) => doc.set("filter_top", k),
            Some(Selector::Threshold(t)) => doc.set("filter_threshold", t),
            None => {}
        }
        if let Some(m) = self.mix {
            doc.set("mix_top", m.top);
            doc.set("mix_extra", m.extra);
            doc.set("mix_seed", m.seed);
        }
        doc.set("output", self.output.display());
        doc.set("seed", self.seed);
        doc.set("skip_malformed", self.skip_malformed);
        doc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> KvDoc {
        KvDoc::parse(text, Path::new("test.cfg")).unwrap()
    }

    #[test]
    fn parses_hi_style_config() {
        let d = doc("bitext = bitext.tsv\nbt = bt.tsv\nscores = bt.scores\nbitext_policy = top-bin\ntranslit = target\ntranslit_romanize = hi\nseed = 11\noutput = out.tsv\n");
        let c = AssemblyConfig::from_kv(&d, Path::new("/data"), &[]).unwrap();
        assert_eq!(c.bt, PathBuf::from("/data/bt.tsv"));
        assert_eq!(c.binning.k, 4);
        assert_eq!(c.bitext_policy, BitextTagPolicy::FixedTopBin);
        assert_eq!(c.scoring, Some(ScoringSource::External(PathBuf::from("/data/bt.scores"))));
        assert!(!c.oracle_only());
        let echoed = AssemblyConfig::from_kv(&c.to_kv(), Path::new("/elsewhere"), &[]).unwrap();
        assert_eq!(echoed, c);
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let cases = [
            "bt = b\noutput = o\n",
            "bt = b\noutput = o\nscores = s\nbitext_policy = scored\nbitext = x\n",
            "bt = b\noutput = o\nscores = s\ntranslit = target\n",
            "bt = b\noutput = o\nscores = s\nfilter_top = 3\nmix_top = 1\nmix_extra = 1\n",
            "bt = b\noutput = o\nscores = s\nroundtrip = r\n",
            "bt = b\noutput = o\nscores = s\nunknown = 1\n",
            "bt = b\noutput = o\nbinning = random\nbitext_policy = scored\nbitext = x\nbitext_scores = y\n",
            "bt = b\noutput = o\ntagging = bt\nbitext_policy = top-bin\nbitext = x\n",
        ];
        for text in cases {
            assert!(
                matches!(AssemblyConfig::from_kv(&doc(text), Path::new("."), &[]), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn random_binning_needs_no_scores() {
        let c = AssemblyConfig::from_kv(&doc("bt = b\noutput = o\nbinning = random\nseed = 5\n"), Path::new("."), &[]).unwrap();
        assert_eq!(c.binning.seed, Some(5));
        assert!(c.scoring.is_none());
    }
}
