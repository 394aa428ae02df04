use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use super::PipelineConfig;
use crate::assemble::{build_training_set, manifest_path, provenance_path, write_training_set, ScoringSource};
use crate::corpus_io::{read_lines, write_lines};
use crate::error::{Error, Result};
use crate::kv::KvDoc;

pub const STATE_FILE: &str = "rounds.state";
const LOCK_FILE: &str = "pipeline.lock";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundStatus {
    Pending,
    Done,
    Failed,
}

impl fmt::Display for RoundStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RoundStatus::Pending => "pending",
            RoundStatus::Done => "done",
            RoundStatus::Failed => "failed",
        })
    }
}

impl FromStr for RoundStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pending" => Ok(RoundStatus::Pending),
            "done" => Ok(RoundStatus::Done),
            "failed" => Ok(RoundStatus::Failed),
            other => Err(Error::Config(format!("unknown round status {other:?}"))),
        }
    }
}

/// Bookkeeping for one round. Paths are fixed by the workdir layout.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundState {
    pub round: usize,
    pub input: PathBuf,
    pub translation: PathBuf,
    pub bt: PathBuf,
    pub scores: Option<PathBuf>,
    pub corpus: PathBuf,
    pub status: RoundStatus,
}

impl RoundState {
    fn planned(config: &PipelineConfig, workdir: &Path, round: usize) -> Self {
        let dir = workdir.join(format!("round{round}"));
        Self {
            round,
            input: config.monolingual.clone().expect("validated"),
            translation: dir.join("translation.txt"),
            bt: dir.join("bt.tsv"),
            scores: config.score_command.as_ref().map(|_| dir.join("bt.scores")),
            corpus: dir.join("corpus.tsv"),
            status: RoundStatus::Pending,
        }
    }

    pub fn manifest(&self) -> PathBuf {
        manifest_path(&self.corpus)
    }

    fn to_kv(&self, doc: &mut KvDoc) {
        let p = format!("round{}.", self.round);
        doc.set(format!("{p}status"), self.status);
        doc.set(format!("{p}input"), self.input.display());
        doc.set(format!("{p}translation"), self.translation.display());
        doc.set(format!("{p}bt"), self.bt.display());
        doc.set(
            format!("{p}scores"),
            self.scores.as_ref().map_or_else(|| "-".to_string(), |s| s.display().to_string()),
        );
        doc.set(format!("{p}corpus"), self.corpus.display());
    }
}

struct State {
    path: PathBuf,
    digest: String,
    rounds: Vec<RoundState>,
}

impl State {
    fn load_or_plan(config: &PipelineConfig, workdir: &Path) -> Result<Self> {
        let digest = hex::encode(Sha256::digest(config.canonical.as_bytes()));
        let mut rounds: Vec<RoundState> = (1..=config.rounds)
            .map(|r| RoundState::planned(config, workdir, r))
            .collect();
        let path = workdir.join(STATE_FILE);
        if path.exists() {
            let doc = KvDoc::read(&path)?;
            if doc.get("config.sha256") != Some(digest.as_str()) {
                return Err(Error::Config(format!(
                    "{} was written for a different configuration",
                    path.display()
                )));
            }
            for r in &mut rounds {
                if let Some(status) = doc.get(&format!("round{}.status", r.round)) {
                    r.status = status.parse()?;
                }
            }
        }
        Ok(Self { path, digest, rounds })
    }

    fn save(&self) -> Result<()> {
        let mut doc = KvDoc::new();
        doc.set("config.sha256", &self.digest);
        doc.set("rounds", self.rounds.len());
        for r in &self.rounds {
            r.to_kv(&mut doc);
        }
        doc.write(&self.path)
    }

    fn set_status(&mut self, index: usize, status: RoundStatus) -> Result<()> {
        self.rounds[index].status = status;
        self.save()
    }
}

/// Exclusive ownership of a workdir; removed on drop. A lock left by a
/// process that no longer exists is taken over.
struct WorkdirLock {
    path: PathBuf,
}

fn process_alive(pid: u32) -> bool {
    if cfg!(target_os = "linux") {
        Path::new(&format!("/proc/{pid}")).exists()
    } else {
        true
    }
}

impl WorkdirLock {
    fn acquire(workdir: &Path) -> Result<Self> {
        let path = workdir.join(LOCK_FILE);
        for _ in 0..2 {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    writeln!(f, "{}", std::process::id()).map_err(|e| Error::io(&path, e))?;
                    return Ok(Self { path });
                }
                Err(e) if e.kind() == ErrorKind::AlreadyExists => {
                    let owner = fs::read_to_string(&path).ok().and_then(|s| s.trim().parse::<u32>().ok());
                    match owner {
                        Some(pid) if !process_alive(pid) => {
                            log::warn!("removing stale lock held by pid {pid}");
                            fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
                        }
                        _ => return Err(Error::Locked(path)),
                    }
                }
                Err(e) => return Err(Error::io(&path, e)),
            }
        }
        Err(Error::Locked(path))
    }
}

impl Drop for WorkdirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn shell_quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

fn substitute(template: &str, input: &Path, output: &Path, round: usize) -> String {
    template
        .replace("{input}", &shell_quote(input))
        .replace("{output}", &shell_quote(output))
        .replace("{round}", &round.to_string())
}

fn run_command(command: &str, round: usize) -> Result<()> {
    log::info!("round {round}: {command}");
    let status = Command::new("sh")
        .arg("-c")
        .arg(command)
        .status()
        .map_err(|e| Error::CommandFailed {
            round,
            status: e.to_string(),
        })?;
    if status.success() {
        Ok(())
    } else {
        Err(Error::CommandFailed {
            round,
            status: status.to_string(),
        })
    }
}

/// Pairs each translated line with its monolingual original as
/// `translation<TAB>original`.
fn paste_bt(round: &RoundState) -> Result<()> {
    let originals = read_lines(&round.input)?;
    let translations = read_lines(&round.translation)?;
    if originals.len() != translations.len() {
        return Err(Error::LineCountMismatch {
            expected: originals.len(),
            found: translations.len(),
        });
    }
    let clean = |s: &str| s.replace('\t', " ");
    write_lines(
        &round.bt,
        translations
            .iter()
            .zip(&originals)
            .map(|(t, o)| format!("{}\t{}", clean(t), clean(o))),
    )?;
    Ok(())
}

fn run_round(config: &PipelineConfig, round: &RoundState, last: bool) -> Result<()> {
    let dir = round.corpus.parent().expect("round dir");
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let translator = config.translator_command.as_deref().expect("validated");
    run_command(&substitute(translator, &round.input, &round.translation, round.round), round.round)?;
    paste_bt(round)?;

    let mut assembly = config.assembly.clone();
    assembly.bt = round.bt.clone();
    assembly.output = round.corpus.clone();
    assembly.scoring = None;
    if let (Some(cmd), Some(scores)) = (&config.score_command, &round.scores) {
        run_command(&substitute(cmd, &round.bt, scores, round.round), round.round)?;
        assembly.scoring = Some(ScoringSource::External(scores.clone()));
    }
    let mut assembled = build_training_set(&assembly)?;
    assembled.manifest.set("round.index", round.round);
    assembled.manifest.set("round.of", config.rounds);
    assembled.manifest.set("round.translator_command", translator);
    write_training_set(&mut assembled, &round.corpus)?;

    if last {
        let out = &config.assembly.output;
        let copy = |from: &Path, to: &Path| fs::copy(from, to).map(|_| ()).map_err(|e| Error::io(to, e));
        copy(&round.corpus, out)?;
        copy(&provenance_path(&round.corpus), &provenance_path(out))?;
        copy(&manifest_path(&round.corpus), &manifest_path(out))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub rounds: Vec<RoundState>,
    /// Rounds executed by this invocation (1-based).
    pub executed: Vec<usize>,
}

/// Runs every round not yet Done, strictly in order. State is persisted in
/// `workdir/rounds.state` after each transition, so an interrupted run
/// resumes at the first round that is not Done.
pub fn run_iterative(config: &PipelineConfig) -> Result<RunSummary> {
    if !config.is_iterative() {
        return Err(Error::Config("run_iterative needs translator_command".into()));
    }
    let workdir = config.workdir.as_deref().expect("validated");
    fs::create_dir_all(workdir).map_err(|e| Error::io(workdir, e))?;
    let _lock = WorkdirLock::acquire(workdir)?;
    let mut state = State::load_or_plan(config, workdir)?;
    let mut executed = Vec::new();
    let n = state.rounds.len();
    for i in 0..n {
        if state.rounds[i].status == RoundStatus::Done {
            continue;
        }
        state.set_status(i, RoundStatus::Pending)?;
        let round = state.rounds[i].clone();
        match run_round(config, &round, i + 1 == n) {
            Ok(()) => state.set_status(i, RoundStatus::Done)?,
            Err(e) => {
                state.set_status(i, RoundStatus::Failed)?;
                return Err(match e {
                    e @ Error::CommandFailed { .. } => e,
                    other => Error::Stage {
                        stage: "round",
                        source: Box::new(other),
                    },
                });
            }
        }
        executed.push(round.round);
    }
    Ok(RunSummary {
        rounds: state.rounds,
        executed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kv::KvDoc;

    fn setup(dir: &Path, translator: &str) -> PipelineConfig {
        fs::write(dir.join("mono.txt"), "the cat sat\na dog ran\nbirds sing\n").unwrap();
        let text = format!(
            "monolingual = mono.txt\nworkdir = work\noutput = final.tsv\nrounds = 2\nbinning = random\n\
             bins = 2\nseed = 3\ntranslator_command = {translator}\n"
        );
        PipelineConfig::from_kv(&KvDoc::parse(&text, Path::new("t")).unwrap(), dir).unwrap()
    }

    #[test]
    fn two_rounds_then_idempotent_rerun() {
        let dir = tempfile::tempdir().unwrap();
        let counter = dir.path().join("calls");
        let config = setup(dir.path(), &format!("echo x >> {}; cp {{input}} {{output}}", shell_quote(&counter)));
        let calls = || fs::read_to_string(&counter).unwrap_or_default().lines().count();
        let summary = run_iterative(&config).unwrap();
        assert_eq!(summary.executed, [1, 2]);
        assert_eq!(calls(), 2);
        let work = dir.path().join("work");
        assert!(work.join("round1/corpus.tsv.manifest").exists());
        assert!(work.join("round2/corpus.tsv.manifest").exists());
        let final_corpus = fs::read(dir.path().join("final.tsv")).unwrap();
        assert_eq!(final_corpus, fs::read(work.join("round2/corpus.tsv")).unwrap());

        let state_before = fs::read(work.join(STATE_FILE)).unwrap();
        let again = run_iterative(&config).unwrap();
        assert!(again.executed.is_empty());
        assert_eq!(calls(), 2);
        assert_eq!(fs::read(work.join(STATE_FILE)).unwrap(), state_before);
        assert!(!work.join(LOCK_FILE).exists());
    }

    #[test]
    fn failing_translator_marks_round_failed() {
        let dir = tempfile::tempdir().unwrap();
        let config = setup(dir.path(), "test {round} = 1 && cp {input} {output}");
        let err = run_iterative(&config).unwrap_err();
        assert!(matches!(err, Error::CommandFailed { round: 2, .. }), "{err}");
        let state = KvDoc::read(dir.path().join("work").join(STATE_FILE)).unwrap();
        assert_eq!(state.get("round1.status"), Some("done"));
        assert_eq!(state.get("round2.status"), Some("failed"));
    }

    #[test]
    fn live_lock_is_respected_and_stale_lock_removed() {
        let dir = tempfile::tempdir().unwrap();
        let config = setup(dir.path(), "cp {input} {output}");
        let work = dir.path().join("work");
        fs::create_dir_all(&work).unwrap();
        fs::write(work.join(LOCK_FILE), format!("{}\n", std::process::id())).unwrap();
        assert!(matches!(run_iterative(&config), Err(Error::Locked(_))));
        // pid far above any default pid_max
        fs::write(work.join(LOCK_FILE), "4999999\n").unwrap();
        assert!(run_iterative(&config).is_ok());
    }

    #[test]
    fn changed_config_is_rejected_on_resume() {
        let dir = tempfile::tempdir().unwrap();
        let config = setup(dir.path(), "cp {input} {output}");
        run_iterative(&config).unwrap();
        let other = PipelineConfig {
            canonical: format!("{}seed = 4\n", config.canonical),
            ..config
        };
        assert!(matches!(run_iterative(&other), Err(Error::Config(_))));
    }

    #[test]
    fn quoting_survives_spaces_and_quotes() {
        assert_eq!(shell_quote(Path::new("a b")), "'a b'");
        assert_eq!(shell_quote(Path::new("it's")), r"'it'\''s'");
    }
}
