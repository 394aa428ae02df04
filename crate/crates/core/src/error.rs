use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing file: {0}")]
    MissingFile(PathBuf),
    #[error("{path}:{line}: malformed line: {reason}")]
    MalformedLine {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("duplicate id {0}")]
    DuplicateId(u64),
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("no score for pair id {0}")]
    MissingScore(u64),
    #[error("score file contains id {0} which is not in the corpus")]
    UnexpectedId(u64),
    #[error("non-finite score for pair id {0}")]
    NonFiniteScore(u64),
    #[error("line count mismatch: corpus has {expected}, sidecar has {found}")]
    LineCountMismatch { expected: usize, found: usize },
    #[error("cannot form {k} bins from {n} pairs")]
    TooFewPairs { k: usize, n: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("assignment does not match scored ids: {0}")]
    IdMismatch(String),
    #[error("duplicate source word {0:?} in candidate table")]
    DuplicateSourceWord(String),
    #[error("unsupported language {0:?}")]
    UnsupportedLanguage(String),
    #[error("text already carries a {0} tag")]
    AlreadyTagged(String),
    #[error("bin {bin} outside 1..={k}")]
    BinOutOfRange { bin: usize, k: usize },
    #[error("pair {0} is not back-translated")]
    NotBtOrigin(u64),
    #[error("cannot sample {requested} from {available}")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("need at least 2 scores, got {0}")]
    TooFewScores(usize),
    #[error("human score {0} outside [0, 6]")]
    ScoreOutOfRange(f64),
    #[error("set size {set_size} exceeds corpus size {corpus}")]
    SetTooLarge { set_size: usize, corpus: usize },
    #[error("selector {selector} exceeds corpus of {n} pairs")]
    SelectorExceedsCorpus { selector: String, n: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("round {round}: command failed ({status})")]
    CommandFailed { round: usize, status: String },
    #[error("workdir is locked by another run: {0}")]
    Locked(PathBuf),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn malformed(path: &std::path::Path, line: usize, reason: impl Into<String>) -> Self {
        Error::MalformedLine {
            path: path.display().to_string(),
            line,
            reason: reason.into(),
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
