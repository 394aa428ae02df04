//! Config-driven pipeline runner: single-shot assembly, iterative
//! back-translation rounds around external commands, and top-k grid search.

mod grid;
mod iterative;

use std::path::{Path, PathBuf};

pub use grid::{run_grid_search, GridOutput, GridSearchSpec};
pub use iterative::{run_iterative, RoundState, RoundStatus, RunSummary, STATE_FILE};

use crate::assemble::{assemble_training_set, Assembled, AssemblyConfig};
use crate::error::{Error, Result};
use crate::kv::KvDoc;

/// Keys accepted on top of the assembly keys.
pub const PIPELINE_KEYS: &[&str] = &["rounds", "translator_command", "score_command", "monolingual", "workdir"];

const BT_SCORING_KEYS: &[&str] = &["scores", "src_embeddings", "tgt_embeddings", "roundtrip"];

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Template for every round; `bt` and `scoring` are replaced per round
    /// when a translator is configured.
    pub assembly: AssemblyConfig,
    pub rounds: usize,
    /// Shell command with `{input}` and `{output}` exactly once each and an
    /// optional `{round}`.
    pub translator_command: Option<String>,
    /// Shell command writing an `id<TAB>score` sidecar for `{input}` (the
    /// round's BT corpus) to `{output}`.
    pub score_command: Option<String>,
    pub monolingual: Option<PathBuf>,
    pub workdir: Option<PathBuf>,
    /// Canonical rendering of the source document, stored with round state.
    pub canonical: String,
}

fn placeholder_count(template: &str, name: &str) -> usize {
    template.matches(&format!("{{{name}}}")).count()
}

fn check_template(key: &str, template: &str) -> Result<()> {
    for name in ["input", "output"] {
        if placeholder_count(template, name) != 1 {
            return Err(Error::Config(format!("{key} must contain {{{name}}} exactly once")));
        }
    }
    Ok(())
}

impl PipelineConfig {
    pub fn from_kv(doc: &KvDoc, base: &Path) -> Result<Self> {
        let translator_command = doc.get("translator_command").map(str::to_owned);
        let mut assembly_doc = doc.clone();
        if translator_command.is_some() {
            if let Some(key) = ["bt"].iter().chain(BT_SCORING_KEYS).find(|k| doc.get(k).is_some()) {
                return Err(Error::Config(format!(
                    "{key} is produced per round when translator_command is set"
                )));
            }
            // placeholders, replaced by each round's BT corpus and scores
            assembly_doc.set("bt", "round1/bt.tsv");
            if doc.get("score_command").is_some() {
                assembly_doc.set("scores", "round1/bt.scores");
            }
        }
        let assembly = AssemblyConfig::from_kv(&assembly_doc, base, PIPELINE_KEYS)?;
        let rounds = match doc.get("rounds") {
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("bad value for rounds: {v:?}")))?,
            None => 1,
        };
        let resolve = |p: &str| {
            let p = Path::new(p);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        let config = Self {
            assembly,
            rounds,
            translator_command,
            score_command: doc.get("score_command").map(str::to_owned),
            monolingual: doc.get("monolingual").map(resolve),
            workdir: doc.get("workdir").map(resolve),
            canonical: doc.render(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let doc = KvDoc::read(path)?;
        Self::from_kv(&doc, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn is_iterative(&self) -> bool {
        self.translator_command.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_owned()));
        if self.rounds == 0 {
            return fail("rounds must be at least 1");
        }
        match &self.translator_command {
            None => {
                if self.rounds != 1 {
                    return fail("rounds > 1 needs translator_command");
                }
                if self.score_command.is_some() || self.monolingual.is_some() {
                    return fail("score_command and monolingual need translator_command");
                }
            }
            Some(t) => {
                check_template("translator_command", t)?;
                if let Some(s) = &self.score_command {
                    check_template("score_command", s)?;
                }
                if self.monolingual.is_none() {
                    return fail("translator_command needs monolingual");
                }
                if self.workdir.is_none() {
                    return fail("translator_command needs workdir");
                }
                let a = &self.assembly;
                let needs_scores = a.filter.is_some()
                    || a.mix.is_some()
                    || (a.tagging == crate::assemble::BtTagging::Quality
                        && a.binning.method != crate::binning::BinMethod::Random);
                if needs_scores && self.score_command.is_none() {
                    return fail("score-based binning or selection needs score_command in iterative runs");
                }
            }
        }
        Ok(())
    }
}

/// Runs the configured pipeline: one assembly, or all iterative rounds.
pub fn run_pipeline(config: &PipelineConfig) -> Result<Option<Assembled>> {
    if config.is_iterative() {
        run_iterative(config)?;
        Ok(None)
    } else {
        assemble_training_set(&config.assembly).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> KvDoc {
        KvDoc::parse(text, Path::new("test.conf")).unwrap()
    }

    #[test]
    fn single_shot_config() {
        let c = PipelineConfig::from_kv(&doc("bt = bt.tsv\noutput = out.tsv\nbinning = random\n"), Path::new("/w")).unwrap();
        assert!(!c.is_iterative());
        assert_eq!(c.rounds, 1);
        assert_eq!(c.assembly.bt, PathBuf::from("/w/bt.tsv"));
    }

    #[test]
    fn iterative_config() {
        let text = "monolingual = mono.txt\nworkdir = work\noutput = out.tsv\nrounds = 2\n\
                    translator_command = cp {input} {output}\nscore_command = score {input} {output}\n";
        let c = PipelineConfig::from_kv(&doc(text), Path::new("/w")).unwrap();
        assert!(c.is_iterative());
        assert_eq!(c.workdir.as_deref(), Some(Path::new("/w/work")));
        assert_eq!(c.rounds, 2);
    }

    #[test]
    fn rejections() {
        let base = Path::new("/w");
        let bad = [
            "bt = bt.tsv\noutput = o\nbinning = random\nrounds = 2\n",
            "monolingual = m\nworkdir = w\noutput = o\nbinning = random\ntranslator_command = cp {input} x\n",
            "monolingual = m\nworkdir = w\noutput = o\nbinning = random\ntranslator_command = cp {input} {output} {output}\n",
            "monolingual = m\nworkdir = w\noutput = o\ntranslator_command = cp {input} {output}\n",
            "bt = b\nmonolingual = m\nworkdir = w\noutput = o\nbinning = random\ntranslator_command = cp {input} {output}\n",
            "monolingual = m\nworkdir = w\noutput = o\nbinning = random\nrounds = 0\ntranslator_command = cp {input} {output}\n",
        ];
        for text in bad {
            assert!(matches!(PipelineConfig::from_kv(&doc(text), base), Err(Error::Config(_))), "{text}");
        }
    }
}
