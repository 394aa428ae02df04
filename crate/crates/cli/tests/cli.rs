use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hintedbt::corpus_io::{read_pairs, Origin};
use hintedbt::quality::{score_corpus_roundtrip, write_scores};

fn hintedbt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hintedbt"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("bt.tsv"),
        "कमल यहाँ है\tKamal is here\nवह घर गया\tHe went home\nदिल्ली बड़ी है\tDelhi is big\nएक\tone\nराम\tRam\n",
    )
    .unwrap();
    fs::write(d.join("rt.txt"), "kamal is here\nhe went to home\ndelhi is large\ntwo\nram\n").unwrap();
    fs::write(d.join("s.tsv"), "0\t0.9\n1\t0.1\n2\t0.5\n3\t0.3\n4\t0.7\n").unwrap();
    fs::write(d.join("cands.tsv"), "दिल्ली\tdelhi\nराम\tram\n").unwrap();
    dir
}

#[test]
fn score_matches_library_output() {
    let dir = setup();
    let d = dir.path();
    let o = hintedbt(d, &["score", "--corpus", "bt.tsv", "--roundtrip", "rt.txt", "-o", "cli.scores"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("mean = "));
    let corpus = read_pairs(d.join("bt.tsv"), Origin::Bt).unwrap();
    write_scores(&score_corpus_roundtrip(&corpus, d.join("rt.txt")).unwrap(), d.join("lib.scores")).unwrap();
    assert_eq!(fs::read(d.join("cli.scores")).unwrap(), fs::read(d.join("lib.scores")).unwrap());
}

#[test]
fn usage_errors_exit_2_and_domain_errors_exit_1() {
    let dir = setup();
    let d = dir.path();
    assert_eq!(hintedbt(d, &["score", "--corpus", "bt.tsv", "-o", "x"]).status.code(), Some(2));
    assert_eq!(hintedbt(d, &["bin", "--scores", "s.tsv", "--method", "sideways"]).status.code(), Some(2));
    assert_eq!(hintedbt(d, &["no-such-command"]).status.code(), Some(2));
    let too_many = hintedbt(d, &["bin", "--scores", "s.tsv", "--k", "9"]);
    assert_eq!(too_many.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&too_many.stderr).contains("cannot form 9 bins"));
    let lang = hintedbt(d, &["translit", "--corpus", "bt.tsv", "--romanize", "xx"]);
    assert_eq!(lang.status.code(), Some(1));
    assert_eq!(hintedbt(d, &["score", "--corpus", "missing.tsv", "--scores", "s.tsv", "-o", "x"]).status.code(), Some(1));
}

#[test]
fn bin_writes_assignments_and_manifest() {
    let dir = setup();
    let d = dir.path();
    let o = hintedbt(d, &["bin", "--scores", "s.tsv", "--k", "2", "-o", "bins.tsv", "--sweep", "3,4,5"]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(fs::read_to_string(d.join("bins.tsv")).unwrap(), "0\t2\n1\t1\n2\t1\n3\t1\n4\t2\n");
    let manifest = fs::read_to_string(d.join("bins.tsv.manifest")).unwrap();
    assert!(manifest.contains("bins.cutpoints = 0.7\n"), "{manifest}");
    assert!(manifest.contains("sweep.k5.bin5.count = 1\n"), "{manifest}");

    for out in ["r1.tsv", "r2.tsv"] {
        let o = hintedbt(d, &["bin", "--scores", "s.tsv", "--method", "random", "--seed", "7", "-o", out]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(d.join("r1.tsv")).unwrap(), fs::read(d.join("r2.tsv")).unwrap());
    assert_eq!(hintedbt(d, &["bin", "--scores", "s.tsv", "--method", "random"]).status.code(), Some(1));
}

#[test]
fn translit_labels_and_candidate_monotonicity() {
    let dir = setup();
    let d = dir.path();
    let o = hintedbt(d, &["translit", "--corpus", "bt.tsv", "--candidates", "cands.tsv", "-o", "labels.tsv"]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(fs::read_to_string(d.join("labels.tsv")).unwrap(), "0\tTxn\n1\tTxn\n2\tBoth\n3\tTxn\n4\tBoth\n");
    assert!(stdout(&o).contains("40.0%"));

    let both = |n: &str, out: &str| {
        assert!(hintedbt(d, &["translit", "--corpus", "bt.tsv", "--romanize", "hi", "--n", n, "-o", out]).status.success());
        fs::read_to_string(d.join(out))
            .unwrap()
            .lines()
            .filter(|l| l.ends_with("Both"))
            .map(str::to_owned)
            .collect::<Vec<_>>()
    };
    let one = both("1", "n1.tsv");
    let ten = both("10", "n10.tsv");
    assert!(one.iter().all(|l| ten.contains(l)));
    assert!(ten.len() >= one.len());
}

#[test]
fn translit_on_empty_corpus_reports_no_fractions() {
    let dir = setup();
    let d = dir.path();
    fs::write(d.join("empty.tsv"), "").unwrap();
    let o = hintedbt(d, &["translit", "--corpus", "empty.tsv", "--romanize", "hi"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("n/a"));
}

#[test]
fn filter_and_mix() {
    let dir = setup();
    let d = dir.path();
    assert!(hintedbt(d, &["filter-topk", "--corpus", "bt.tsv", "--scores", "s.tsv", "--top", "2", "-o", "top.tsv"]).status.success());
    assert_eq!(fs::read_to_string(d.join("top.tsv")).unwrap(), "कमल यहाँ है\tKamal is here\nराम\tRam\n");
    assert!(hintedbt(d, &["filter-topk", "--corpus", "bt.tsv", "--scores", "s.tsv", "--min", "0.5", "-o", "min.tsv"]).status.success());
    assert_eq!(fs::read_to_string(d.join("min.tsv")).unwrap().lines().count(), 3);
    let o = hintedbt(d, &["mix-sample", "--corpus", "bt.tsv", "--scores", "s.tsv", "--top", "2", "--extra", "2", "--seed", "1", "-o", "mix.tsv"]);
    assert!(o.status.success(), "{o:?}");
    let mixed = fs::read_to_string(d.join("mix.tsv")).unwrap();
    assert_eq!(mixed.lines().count(), 4);
    assert!(mixed.starts_with("कमल यहाँ है\tKamal is here\nराम\tRam\n"));
}

#[test]
fn eval_commands() {
    let dir = setup();
    let d = dir.path();
    fs::write(d.join("ref.txt"), "the cat sat on the mat\na dog ran\n").unwrap();
    fs::write(d.join("hyp.txt"), "<Both> the cat sat on the mat\n<Txn> a dog ran\n").unwrap();
    let plain = stdout(&hintedbt(d, &["eval-bleu", "--hyp", "hyp.txt", "--ref", "ref.txt", "--strip-tags"]));
    assert!(plain.starts_with("BLEU = 100.00"), "{plain}");
    let tagged = stdout(&hintedbt(d, &["eval-bleu", "--hyp", "hyp.txt", "--ref", "ref.txt"]));
    assert!(!tagged.starts_with("BLEU = 100.00"), "{tagged}");

    let sig = hintedbt(d, &["eval-significance", "--hyp-a", "hyp.txt", "--hyp-b", "hyp.txt", "--ref", "ref.txt", "--sets", "10", "--set-size", "2", "--csv", "sets.csv"]);
    assert!(sig.status.success(), "{sig:?}");
    assert!(stdout(&sig).contains("p_value = 1.000000e0"), "{}", stdout(&sig));
    assert_eq!(fs::read_to_string(d.join("sets.csv")).unwrap().lines().count(), 11);
    let too_big = hintedbt(d, &["eval-significance", "--hyp-a", "hyp.txt", "--hyp-b", "hyp.txt", "--ref", "ref.txt"]);
    assert_eq!(too_big.status.code(), Some(1));

    fs::write(d.join("src.txt"), "राम आया\nदिल्ली\n").unwrap();
    fs::write(d.join("f1ref.txt"), "Ram came\nDelhi\n").unwrap();
    fs::write(d.join("f1hyp.txt"), "<Both> Ram came\nthe city\n").unwrap();
    let f1 = stdout(&hintedbt(
        d,
        &["eval-f1", "--source", "src.txt", "--hyp", "f1hyp.txt", "--ref", "f1ref.txt", "--candidates", "cands.tsv", "--strip-tags"],
    ));
    assert!(f1.contains("tp=1 fp=0 fn=1"), "{f1}");

    fs::write(d.join("x.txt"), "1\n2\n3\n").unwrap();
    fs::write(d.join("y.txt"), "1\n3\n2\n").unwrap();
    let corr = stdout(&hintedbt(d, &["eval-correlation", "--x", "x.txt", "--y", "y.txt"]));
    assert_eq!(corr, "pearson = 0.500000\nspearman = 0.500000\n");
}

#[test]
fn stats_command() {
    let dir = setup();
    let d = dir.path();
    fs::write(d.join("h.txt"), "4\n4\n4\n4\n").unwrap();
    fs::write(d.join("t.txt"), "4.2\n4.2\n4.2\n4.2\n").unwrap();
    let o = stdout(&hintedbt(d, &["stats", "--scores", "h.txt"]));
    assert!(o.contains("ci_halfwidth = 0.000000"), "{o}");
    let o = stdout(&hintedbt(d, &["stats", "--base", "h.txt", "--test", "t.txt"]));
    assert!(o.contains("significant = true"), "{o}");
    fs::write(d.join("bad.txt"), "7\n1\n").unwrap();
    assert_eq!(hintedbt(d, &["stats", "--scores", "bad.txt"]).status.code(), Some(1));
}

#[test]
fn assemble_and_run_and_grid_search() {
    let dir = setup();
    let d = dir.path();
    fs::write(d.join("bitext.tsv"), "एक दो\tone two\n").unwrap();
    fs::write(
        d.join("hi.conf"),
        "bitext = bitext.tsv\nbt = bt.tsv\nscores = s.tsv\nbins = 2\nbitext_policy = top-bin\nseed = 4\noutput = hi.tsv\n",
    )
    .unwrap();
    let o = hintedbt(d, &["assemble", "--config", "hi.conf"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("output.pairs = 6"));
    let corpus = fs::read_to_string(d.join("hi.tsv")).unwrap();
    assert!(corpus.contains("<bin2> एक दो\tone two\n"));
    let again = hintedbt(d, &["run", "--config", "hi.conf"]);
    assert!(again.status.success());
    assert_eq!(fs::read_to_string(d.join("hi.tsv")).unwrap(), corpus);

    fs::write(d.join("broken.conf"), "bt = bt.tsv\nscores = nowhere.tsv\noutput = x.tsv\n").unwrap();
    let broken = hintedbt(d, &["assemble", "--config", "broken.conf"]);
    assert_eq!(broken.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&broken.stderr).contains("stage score"), "{broken:?}");

    let grid = hintedbt(d, &["grid-search", "--corpus", "bt.tsv", "--scores", "s.tsv", "--select", "top1,top3", "--outdir", "g"]);
    assert!(grid.status.success(), "{grid:?}");
    assert_eq!(fs::read_to_string(d.join("g/top1.tsv")).unwrap(), "कमल यहाँ है\tKamal is here\n");
    let over = hintedbt(d, &["grid-search", "--corpus", "bt.tsv", "--scores", "s.tsv", "--select", "top9", "--outdir", "g2"]);
    assert_eq!(over.status.code(), Some(1));
    assert_eq!(hintedbt(d, &["grid-search", "--corpus", "bt.tsv", "--scores", "s.tsv", "--select", "best", "--outdir", "g3"]).status.code(), Some(2));
}

#[test]
fn run_reports_translator_failure() {
    let dir = setup();
    let d = dir.path();
    fs::write(d.join("mono.txt"), "a\nb\n").unwrap();
    fs::write(
        d.join("iter.conf"),
        "monolingual = mono.txt\nworkdir = work\noutput = final.tsv\nrounds = 2\nbinning = random\nseed = 1\n\
         translator_command = false {input} {output}\n",
    )
    .unwrap();
    let o = hintedbt(d, &["run", "--config", "iter.conf"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("round 1"), "{o:?}");
    let state = fs::read_to_string(d.join("work/rounds.state")).unwrap();
    assert!(state.contains("round1.status = failed"), "{state}");
}
