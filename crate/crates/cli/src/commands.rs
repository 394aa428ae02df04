use std::path::Path;

use anyhow::{bail, Context, Result};
use hintedbt::assemble::{
    assemble_training_set, file_sha256, manifest_path, mix_sample, topk_filter, topk_split, ScoringSource, Selector,
};
use hintedbt::binning::{assign_bins, bin_stats_k, sweep_bin_counts, write_assignments, BinningConfig};
use hintedbt::corpus_io::{read_lines, read_pairs, read_pairs_with, write_pairs, Origin, ReadOptions};
use hintedbt::eval::{
    bootstrap_significance_with, corpus_bleu, mean_ci, pearson, spearman, strip_all_tags, sxs_delta,
    word_level_translit_f1,
};
use hintedbt::kv::KvDoc;
use hintedbt::pipeline::{run_grid_search, run_iterative, GridSearchSpec, PipelineConfig};
use hintedbt::quality::{read_scored_ids, score_corpus_external, summarize, write_scores};
use hintedbt::translit::{classify_pairs, write_labels, CandidateGenerator, CandidateTable, TranslitStats};
use hintedbt::Execution;

use crate::{
    BinArgs, BleuArgs, Command, ConfigArgs, CorrelationArgs, CorrelationMethod, F1Args, FilterArgs, GeneratorArgs,
    GridArgs, MixArgs, ScoreArgs, SignificanceArgs, StatsArgs, TranslitArgs,
};

pub fn run(command: Command, exec: Execution) -> Result<()> {
    match command {
        Command::Score(a) => score(a),
        Command::Bin(a) => bin(a),
        Command::Translit(a) => translit(a, exec),
        Command::Assemble(a) => assemble(a),
        Command::FilterTopk(a) => filter_topk(a),
        Command::MixSample(a) => mix(a),
        Command::EvalBleu(a) => eval_bleu(a),
        Command::EvalF1(a) => eval_f1(a),
        Command::EvalSignificance(a) => eval_significance(a, exec),
        Command::EvalCorrelation(a) => eval_correlation(a),
        Command::Stats(a) => stats(a),
        Command::Run(a) => run_config(a),
        Command::GridSearch(a) => grid_search(a, exec),
    }
}

fn read_numbers(path: &Path) -> Result<Vec<f64>> {
    read_lines(path)?
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .with_context(|| format!("{}:{}: not a number: {l:?}", path.display(), i + 1))
        })
        .collect()
}

fn read_hypotheses(path: &Path, strip: bool) -> Result<Vec<String>> {
    let lines = read_lines(path)?;
    Ok(if strip {
        lines.iter().map(|l| strip_all_tags(l).to_owned()).collect()
    } else {
        lines
    })
}

fn generator(args: &GeneratorArgs) -> Result<CandidateGenerator> {
    let gen = match (&args.candidates, &args.romanize) {
        (Some(path), _) => CandidateGenerator::table(CandidateTable::load(path)?),
        (None, Some(lang)) => CandidateGenerator::romanizer(lang)?,
        (None, None) => unreachable!("clap requires one generator"),
    };
    Ok(gen.with_candidates(args.n)?)
}

fn join_floats(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn score(a: ScoreArgs) -> Result<()> {
    let opts = ReadOptions {
        skip_malformed: a.skip_malformed,
    };
    let corpus = read_pairs_with(&a.corpus, Origin::Bt, opts)?;
    let source = match (a.scores, a.embeddings, a.roundtrip) {
        (Some(p), _, _) => ScoringSource::External(p),
        (_, Some(mut e), _) => {
            let tgt = e.pop().expect("two values");
            let src = e.pop().expect("two values");
            ScoringSource::Embeddings { src, tgt }
        }
        (_, _, Some(p)) => ScoringSource::RoundTrip(p),
        _ => unreachable!("clap requires one scoring source"),
    };
    let scored = source.score(&corpus)?;
    write_scores(&scored, &a.output)?;
    let mut doc = KvDoc::new();
    doc.set("pairs", scored.len());
    doc.set("skipped", corpus.skipped);
    if let Some(s) = summarize(&scored) {
        doc.set("min", s.min);
        doc.set("max", s.max);
        doc.set("mean", s.mean);
    }
    print!("{}", doc.render());
    Ok(())
}

fn bin(a: BinArgs) -> Result<()> {
    let scored = read_scored_ids(&a.scores)?;
    let config = BinningConfig {
        k: a.k,
        method: a.method,
        seed: a.seed,
    };
    config.validate()?;
    let (assignment, boundaries) = assign_bins(&scored, &config)?;
    let stats = bin_stats_k(&scored, &assignment, a.k)?;
    println!("{stats}");
    let mut manifest = KvDoc::new();
    manifest.set("input.scores.path", a.scores.display());
    manifest.set("input.scores.sha256", file_sha256(&a.scores)?);
    manifest.set("bins.k", a.k);
    manifest.set("bins.method", a.method);
    if let Some(seed) = a.seed {
        manifest.set("bins.seed", seed);
    }
    manifest.set("bins.tie_break", "score asc, id asc");
    if let Some(b) = &boundaries {
        manifest.set("bins.cutpoints", join_floats(&b.cutpoints()));
    }
    stats.to_kv("bins.", &mut manifest);
    for (k, sweep) in sweep_bin_counts(&scored, &a.sweep)? {
        println!("\nk = {k}\n{sweep}");
        sweep.to_kv(&format!("sweep.k{k}."), &mut manifest);
    }
    if let Some(out) = &a.output {
        write_assignments(&assignment, out)?;
        manifest.write(manifest_path(out))?;
    }
    Ok(())
}

fn translit(a: TranslitArgs, exec: Execution) -> Result<()> {
    let corpus = read_pairs(&a.corpus, Origin::Bitext)?;
    let gen = generator(&a.generator)?;
    let labels = classify_pairs(&corpus.pairs, &gen, exec);
    if let Some(out) = &a.output {
        write_labels(&corpus.pairs, &labels, out)?;
    }
    println!("{}", TranslitStats::from_labels(&labels));
    Ok(())
}

fn report_assembly(output: &Path) -> Result<()> {
    let manifest = KvDoc::read(manifest_path(output))?;
    for key in ["output.pairs", "output.bitext", "output.bt"] {
        if let Some(v) = manifest.get(key) {
            println!("{key} = {v}");
        }
    }
    println!("wrote {}", output.display());
    Ok(())
}

fn assemble(a: ConfigArgs) -> Result<()> {
    let config = PipelineConfig::read(&a.config)?;
    if config.is_iterative() {
        bail!("{} configures iterative rounds; use `hintedbt run`", a.config.display());
    }
    assemble_training_set(&config.assembly)?;
    report_assembly(&config.assembly.output)
}

fn run_config(a: ConfigArgs) -> Result<()> {
    let config = PipelineConfig::read(&a.config)?;
    if !config.is_iterative() {
        assemble_training_set(&config.assembly)?;
        return report_assembly(&config.assembly.output);
    }
    let summary = run_iterative(&config)?;
    if summary.executed.is_empty() {
        println!("all {} rounds already done", summary.rounds.len());
    }
    for r in &summary.rounds {
        let ran = if summary.executed.contains(&r.round) { " (ran)" } else { "" };
        println!("round {}: {}{ran} -> {}", r.round, r.status, r.corpus.display());
    }
    Ok(())
}

fn filter_topk(a: FilterArgs) -> Result<()> {
    let corpus = read_pairs(&a.corpus, Origin::Bt)?;
    let scored = score_corpus_external(&corpus, &a.scores)?;
    let selector = match (a.top, a.min) {
        (Some(k), _) => Selector::Count(k),
        (None, Some(t)) => Selector::Threshold(t),
        (None, None) => unreachable!("clap requires one selector"),
    };
    let kept: Vec<_> = topk_filter(&scored, selector)?.into_iter().map(|s| s.pair).collect();
    write_pairs(&kept, &a.output)?;
    println!("{selector}: kept {} of {} pairs", kept.len(), scored.len());
    Ok(())
}

fn mix(a: MixArgs) -> Result<()> {
    let corpus = read_pairs(&a.corpus, Origin::Bt)?;
    let scored = score_corpus_external(&corpus, &a.scores)?;
    let (top, rest) = topk_split(&scored, Selector::Count(a.top))?;
    let mixed: Vec<_> = mix_sample(&top, &rest, a.extra, a.seed)?.into_iter().map(|s| s.pair).collect();
    write_pairs(&mixed, &a.output)?;
    println!("top{} + {} sampled = {} pairs", a.top, a.extra, mixed.len());
    Ok(())
}

fn eval_bleu(a: BleuArgs) -> Result<()> {
    let hyps = read_hypotheses(&a.hyp, a.strip_tags)?;
    let refs = read_lines(&a.reference)?;
    let b = corpus_bleu(&hyps, &refs)?;
    let p = b.precisions.map(|p| format!("{:.1}", 100.0 * p));
    println!(
        "BLEU = {:.2} {} (BP = {:.3} hyp_len = {} ref_len = {})",
        b.value,
        p.join("/"),
        b.brevity_penalty,
        b.hyp_len,
        b.ref_len
    );
    Ok(())
}

fn eval_f1(a: F1Args) -> Result<()> {
    let sources = read_lines(&a.source)?;
    let hyps = read_hypotheses(&a.hyp, a.strip_tags)?;
    let refs = read_lines(&a.reference)?;
    let report = word_level_translit_f1(&sources, &hyps, &refs, &generator(&a.generator)?)?;
    println!("{report}");
    Ok(())
}

fn eval_significance(a: SignificanceArgs, exec: Execution) -> Result<()> {
    let hyp_a = read_hypotheses(&a.hyp_a, a.strip_tags)?;
    let hyp_b = read_hypotheses(&a.hyp_b, a.strip_tags)?;
    let refs = read_lines(&a.reference)?;
    let report = bootstrap_significance_with(&hyp_a, &hyp_b, &refs, a.sets, a.set_size, a.seed, exec)?;
    print!("{}", report.render());
    if let Some(csv) = &a.csv {
        report.write_csv(csv)?;
    }
    Ok(())
}

fn eval_correlation(a: CorrelationArgs) -> Result<()> {
    let xs = read_numbers(&a.x)?;
    let ys = read_numbers(&a.y)?;
    if a.method != CorrelationMethod::Spearman {
        println!("pearson = {:.6}", pearson(&xs, &ys)?);
    }
    if a.method != CorrelationMethod::Pearson {
        println!("spearman = {:.6}", spearman(&xs, &ys)?);
    }
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    if let Some(path) = &a.scores {
        let s = mean_ci(&read_numbers(path)?)?;
        println!("{s}");
        println!("mean = {:.6}\nci_halfwidth = {:.6}\nn = {}", s.mean, s.ci_halfwidth, s.n);
    }
    if let (Some(base), Some(test)) = (&a.base, &a.test) {
        let r = sxs_delta(&read_numbers(base)?, &read_numbers(test)?)?;
        println!("sxs_delta = {:.6}\nsignificant = {}", r.delta, r.significant);
    }
    Ok(())
}

fn grid_search(a: GridArgs, exec: Execution) -> Result<()> {
    let spec = GridSearchSpec {
        selectors: a.select,
        corpus: a.corpus,
        scores: a.scores,
        outdir: a.outdir,
    };
    for o in run_grid_search(&spec, exec)? {
        println!("{}\t{}\t{}", o.selector, o.path.display(), o.pairs);
    }
    Ok(())
}

