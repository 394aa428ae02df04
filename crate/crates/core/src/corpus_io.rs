//! Parallel corpus files and their sidecars.
//!
//! A corpus is UTF-8 TSV with exactly one TAB per line (`source<TAB>target`).
//! Pair ids are 0-based line indices, so every sidecar (`id<TAB>...`) joins
//! back to the corpus line it was computed from.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use unicode_general_category::{get_general_category, GeneralCategory};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    Bitext,
    Bt,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Bitext => "bitext",
            Origin::Bt => "bt",
        })
    }
}

impl FromStr for Origin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bitext" => Ok(Origin::Bitext),
            "bt" => Ok(Origin::Bt),
            other => Err(Error::Config(format!("unknown origin {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub id: u64,
    pub source: String,
    pub target: String,
    pub origin: Origin,
}

impl SentencePair {
    pub fn new(id: u64, source: impl Into<String>, target: impl Into<String>, origin: Origin) -> Self {
        Self {
            id,
            source: source.into(),
            target: target.into(),
            origin,
        }
    }

    /// Checks the field invariants, returning the reason a pair is invalid.
    pub fn check(&self) -> std::result::Result<(), String> {
        check_field("source", &self.source)?;
        check_field("target", &self.target)
    }
}

fn check_field(name: &str, text: &str) -> std::result::Result<(), String> {
    if text.trim().is_empty() {
        return Err(format!("empty {name} field"));
    }
    if let Some(c) = text.chars().find(|c| c.is_control()) {
        return Err(format!("embedded control char U+{:04X} in {name}", c as u32));
    }
    Ok(())
}

/// A fully read corpus file.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub path: PathBuf,
    pub origin: Origin,
    pub pairs: Vec<SentencePair>,
    /// Malformed lines skipped under [`ReadOptions::skip_malformed`].
    pub skipped: usize,
}

impl Corpus {
    pub fn count(&self) -> usize {
        self.pairs.len()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReadOptions {
    /// Log and count malformed lines instead of aborting.
    pub skip_malformed: bool,
}

/// Streaming reader over a TSV corpus. Yields one result per line; a
/// malformed line becomes an `Err` and iteration may continue past it.
pub struct PairReader<R> {
    reader: R,
    path: PathBuf,
    origin: Origin,
    line: usize,
    buf: Vec<u8>,
}

impl PairReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>, origin: Origin) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(BufReader::new(file), path, origin))
    }
}

impl<R: BufRead> PairReader<R> {
    pub fn new(reader: R, path: impl Into<PathBuf>, origin: Origin) -> Self {
        Self {
            reader,
            path: path.into(),
            origin,
            line: 0,
            buf: Vec::new(),
        }
    }

    fn parse(&self, id: u64, line: &str) -> Result<SentencePair> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::malformed(
                &self.path,
                id as usize + 1,
                format!("expected 2 tab-separated fields, found {}", fields.len()),
            ));
        }
        let pair = SentencePair::new(id, fields[0], fields[1], self.origin);
        pair.check()
            .map_err(|reason| Error::malformed(&self.path, id as usize + 1, reason))?;
        Ok(pair)
    }
}

impl<R: BufRead> Iterator for PairReader<R> {
    type Item = Result<SentencePair>;

    fn next(&mut self) -> Option<Self::Item> {
        match read_line(&mut self.reader, &mut self.buf, &self.path, self.line) {
            Ok(None) => None,
            Ok(Some(text)) => {
                let id = self.line as u64;
                self.line += 1;
                Some(self.parse(id, &text))
            }
            Err(e) => {
                self.line += 1;
                Some(Err(e))
            }
        }
    }
}

/// Reads one LF- or CRLF-terminated line. `index` is 0-based and only used
/// for error messages.
fn read_line<R: BufRead>(
    reader: &mut R,
    buf: &mut Vec<u8>,
    path: &Path,
    index: usize,
) -> Result<Option<String>> {
    buf.clear();
    let n = reader
        .read_until(b'\n', buf)
        .map_err(|e| Error::io(path, e))?;
    if n == 0 {
        return Ok(None);
    }
    if buf.last() == Some(&b'\n') {
        buf.pop();
        if buf.last() == Some(&b'\r') {
            buf.pop();
        }
    }
    match std::str::from_utf8(buf) {
        Ok(s) => Ok(Some(s.to_owned())),
        Err(_) => Err(Error::malformed(path, index + 1, "invalid UTF-8")),
    }
}

pub fn read_pairs(path: impl AsRef<Path>, origin: Origin) -> Result<Corpus> {
    read_pairs_with(path, origin, ReadOptions::default())
}

pub fn read_pairs_with(path: impl AsRef<Path>, origin: Origin, opts: ReadOptions) -> Result<Corpus> {
    let path = path.as_ref();
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for item in PairReader::open(path, origin)? {
        match item {
            Ok(pair) => pairs.push(pair),
            Err(e @ Error::MalformedLine { .. }) if opts.skip_malformed => {
                log::warn!("skipping {e}");
                skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    if skipped > 0 {
        log::warn!("{}: skipped {skipped} malformed lines", path.display());
    }
    Ok(Corpus {
        path: path.to_path_buf(),
        origin,
        pairs,
        skipped,
    })
}

/// Writes pairs as TSV. Every pair is validated before the file is created,
/// so an invalid pair leaves no partial output behind.
pub fn write_pairs(pairs: &[SentencePair], path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    for (index, pair) in pairs.iter().enumerate() {
        pair.check()
            .map_err(|reason| Error::malformed(path, index + 1, reason))?;
    }
    write_lines(path, pairs.iter().map(|p| format!("{}\t{}", p.source, p.target)))
}

/// Writes each item as one LF-terminated line. Returns the line count.
pub fn write_lines<I, S>(path: impl AsRef<Path>, lines: I) -> Result<usize>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut count = 0;
    for line in lines {
        out.write_all(line.as_ref().as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|e| Error::io(path, e))?;
        count += 1;
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(count)
}

/// Reads a plain line-per-record text file (round-trip targets, hypotheses,
/// references). Empty lines are kept.
pub fn read_lines(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut buf = Vec::new();
    let mut lines = Vec::new();
    while let Some(line) = read_line(&mut reader, &mut buf, path, lines.len())? {
        lines.push(line);
    }
    Ok(lines)
}

/// Reads an `id<TAB>value` sidecar into `(line number, id, raw value)`
/// triples, leaving value parsing to the caller.
pub fn read_id_sidecar(path: impl AsRef<Path>) -> Result<Vec<(usize, u64, String)>> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for (index, line) in read_lines(path)?.into_iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (id, value) = line
            .split_once('\t')
            .ok_or_else(|| Error::malformed(path, index + 1, "expected id<TAB>value"))?;
        let id: u64 = id
            .trim()
            .parse()
            .map_err(|_| Error::malformed(path, index + 1, format!("bad id {id:?}")))?;
        out.push((index + 1, id, value.to_owned()));
    }
    Ok(out)
}

/// Splits on Unicode whitespace and strips leading and trailing punctuation
/// (general categories P*) from each token. Internal punctuation is kept.
pub fn tokenize_words(text: &str) -> Vec<&str> {
    text.split_whitespace()
        .map(|tok| tok.trim_matches(is_punctuation))
        .filter(|tok| !tok.is_empty())
        .collect()
}

pub(crate) fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

/// Lowercases and collapses every whitespace run to one ASCII space.
pub fn normalize_for_trigrams(text: &str) -> String {
    let lower = text.to_lowercase();
    let mut out = String::with_capacity(lower.len());
    let mut in_space = false;
    for c in lower.chars() {
        if c.is_whitespace() {
            if !in_space {
                out.push(' ');
            }
            in_space = true;
        } else {
            out.push(c);
            in_space = false;
        }
    }
    out
}

/// Set of contiguous 3-codepoint substrings after normalization. Texts of
/// 1 or 2 codepoints yield themselves as the only element; empty text
/// yields the empty set.
pub fn char_trigrams(text: &str) -> HashSet<String> {
    let norm = normalize_for_trigrams(text);
    let chars: Vec<char> = norm.chars().collect();
    match chars.len() {
        0 => HashSet::new(),
        1 | 2 => HashSet::from([norm]),
        _ => chars.windows(3).map(|w| w.iter().collect()).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DegenerateInput("embedding has no components"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput("embedding has non-finite component"));
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Reads an embedding sidecar: `id<TAB>v1,v2,...,vd` per line. All vectors
/// must share one dimension.
pub fn read_embeddings(path: impl AsRef<Path>) -> Result<HashMap<u64, EmbeddingVector>> {
    let path = path.as_ref();
    let mut map = HashMap::new();
    let mut dim = None;
    for (line, id, raw) in read_id_sidecar(path)? {
        let values = raw
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::malformed(path, line, format!("bad component: {e}")))?;
        let vector = EmbeddingVector::new(values)
            .map_err(|e| Error::malformed(path, line, e.to_string()))?;
        match dim {
            None => dim = Some(vector.dim()),
            Some(d) if d != vector.dim() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: vector.dim(),
                })
            }
            Some(_) => {}
        }
        if map.insert(id, vector).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    Ok(map)
}
