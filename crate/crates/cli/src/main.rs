//! `hintedbt` command-line front end.
//!
//! Exit status: 0 on success, 1 on a domain error, 2 on a usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use hintedbt::assemble::Selector;
use hintedbt::binning::BinMethod;

#[derive(Parser, Debug)]
#[command(name = "hintedbt", version, about = "Quality- and transliteration-tagged back-translation corpus tools")]
struct Cli {
    /// Run bulk work on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("scoring").required(true).args(["scores", "embeddings", "roundtrip"])))]
struct ScoreArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// External `id<TAB>score` sidecar.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Source and target embedding sidecars.
    #[arg(long, num_args = 2, value_names = ["SRC", "TGT"])]
    embeddings: Option<Vec<PathBuf>>,
    /// Round-trip translations of the targets, one per corpus line.
    #[arg(long)]
    roundtrip: Option<PathBuf>,
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long)]
    skip_malformed: bool,
}

#[derive(Args, Debug)]
struct BinArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value = "equal-volume")]
    method: BinMethod,
    /// Required for `--method random`.
    #[arg(long)]
    seed: Option<u64>,
    /// Assignment sidecar; its manifest goes to `<output>.manifest`.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also report equal-volume statistics for these bin counts.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<usize>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("generator").required(true).args(["candidates", "romanize"])))]
struct GeneratorArgs {
    /// Candidate table, `word<TAB>cand1,cand2,...`.
    #[arg(long)]
    candidates: Option<PathBuf>,
    /// Built-in romanizer language (hi, gu, ta).
    #[arg(long)]
    romanize: Option<String>,
    /// Candidates per word.
    #[arg(long, default_value_t = 10)]
    n: usize,
}

#[derive(Args, Debug)]
struct TranslitArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Label sidecar, `id<TAB>Txn|Both`.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    #[arg(long, short)]
    config: PathBuf,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("selector").required(true).args(["top", "min"])))]
struct FilterArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    top: Option<usize>,
    #[arg(long)]
    min: Option<f64>,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct MixArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    scores: PathBuf,
    /// Highest-scored pairs always kept.
    #[arg(long)]
    top: usize,
    /// Pairs sampled uniformly from the rest.
    #[arg(long)]
    extra: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct BleuArgs {
    #[arg(long)]
    hyp: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Remove leading tags from hypotheses first.
    #[arg(long)]
    strip_tags: bool,
}

#[derive(Args, Debug)]
struct F1Args {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    hyp: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long)]
    strip_tags: bool,
}

#[derive(Args, Debug)]
struct SignificanceArgs {
    #[arg(long)]
    hyp_a: PathBuf,
    #[arg(long)]
    hyp_b: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long, default_value_t = 1000)]
    sets: usize,
    #[arg(long, default_value_t = 500)]
    set_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-set BLEU dump.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    strip_tags: bool,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CorrelationMethod {
    Pearson,
    Spearman,
    Both,
}

#[derive(Args, Debug)]
struct CorrelationArgs {
    /// One number per line.
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[arg(long, value_enum, default_value_t = CorrelationMethod::Both)]
    method: CorrelationMethod,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("input").required(true).args(["scores", "base"])))]
struct StatsArgs {
    /// Human ratings (0-6), one per line: mean with 95% interval.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Paired ratings for a side-by-side delta; needs `--test`.
    #[arg(long, requires = "test")]
    base: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    scores: PathBuf,
    /// Comma-separated `top<k>` or `min<t>` selectors.
    #[arg(long, value_delimiter = ',', required = true)]
    select: Vec<Selector>,
    #[arg(long)]
    outdir: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score a corpus and write an `id<TAB>score` sidecar.
    Score(ScoreArgs),
    /// Assign quality bins to scored pairs.
    Bin(BinArgs),
    /// Label pairs as Txn or Both.
    Translit(TranslitArgs),
    /// Build a tagged training corpus from a config file.
    Assemble(ConfigArgs),
    /// Keep the top-k (or above-threshold) scored pairs.
    FilterTopk(FilterArgs),
    /// Top-k plus a uniform sample of the remaining pairs.
    MixSample(MixArgs),
    /// Corpus BLEU.
    EvalBleu(BleuArgs),
    /// Word-level transliteration F1.
    EvalF1(F1Args),
    /// Bootstrap t-test between two systems.
    EvalSignificance(SignificanceArgs),
    /// Pearson and Spearman correlation.
    EvalCorrelation(CorrelationArgs),
    /// Human rating summaries.
    Stats(StatsArgs),
    /// Run a pipeline config, including iterative rounds.
    Run(ConfigArgs),
    /// One top-k corpus per selector.
    GridSearch(GridArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let exec = if cli.sequential {
        hintedbt::Execution::Sequential
    } else {
        hintedbt::Execution::default()
    };
    match commands::run(cli.command, exec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
