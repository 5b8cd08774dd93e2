use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clap::CommandFactory;
use opinion_pulse::cli::Cli;
use opinion_pulse::corpus::{Format, MessageReader};
use opinion_pulse::polarity::PolarityLexicon;
use opinion_pulse::timeseries::{sentiment_series, write_sentiment_csv, Bucketer, Granularity, ScoreFilter, TzOffset};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_opinion-pulse"))
}

fn manifest(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn filter_keeps_two_of_five() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("matched.jsonl");
    let stats = dir.path().join("stats.json");
    let fixture = manifest("tests/data/five_messages.jsonl");
    let query = manifest("data/queries/table2.json");
    let o = run(&["filter", "--in", s(&fixture), "--query", s(&query), "--out", s(&out), "--stats", s(&stats)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("\"id\":\"1\"") && text.contains("\"id\":\"3\""));
    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(stats["total"], 5);
    assert_eq!(stats["rejected"], 0);
}

#[test]
fn repost_switch() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = manifest("tests/data/five_messages.jsonl");
    let counts = |flag: &str| {
        let out = dir.path().join(format!("freq_{flag}.csv"));
        let o = run(&["timeseries", "--kind", "frequency", "--in", s(&fixture), "--count-reposts", flag, "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(0));
        fs::read_to_string(out).unwrap()
    };
    let with = counts("true");
    let without = counts("false");
    assert!(with.ends_with("2020-03-14,1\n"), "{with}");
    assert!(without.ends_with("2020-03-13,2\n"), "{without}");
}

#[test]
fn kappa_prints_half() {
    let o = run(&["kappa", "--a", s(&manifest("tests/data/ann_a.tsv")), "--b", s(&manifest("tests/data/ann_b.tsv"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "kappa=0.5\n");
}

#[test]
fn every_subcommand_documents_its_flags() {
    let root = Cli::command();
    for sub in root.get_subcommands() {
        let name = sub.get_name();
        let o = run(&[name, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{name} --help");
        let help = String::from_utf8(o.stdout).unwrap();
        for arg in sub.get_arguments() {
            if let Some(long) = arg.get_long() {
                assert!(help.contains(&format!("--{long}")), "{name} --help lacks --{long}");
            }
        }
        assert!(help.contains("--seed"), "{name}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn exit_codes_and_no_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.jsonl");
    let query = manifest("data/queries/table2.json");

    let o = run(&["filter", "--in", "missing.jsonl", "--query", s(&query), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.jsonl"));
    assert!(!out.exists());

    let bad_query = dir.path().join("bad.json");
    fs::write(&bad_query, "{\"name\": \"x\", \"regex\": \"(\"}").unwrap();
    let o = run(&["filter", "--in", s(&manifest("tests/data/five_messages.jsonl")), "--query", s(&bad_query), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let o = run(&["filter", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["timeseries", "--kind", "frequency", "--in", "x.jsonl", "--out", s(&out), "--tz-offset", "1h"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tz-offset"));

    let labels = dir.path().join("labels.tsv");
    fs::write(&labels, "supports\tgoed\nmaybe\tweet niet\n").unwrap();
    let o = run(&["train", "--labels", s(&labels), "--out", s(&dir.path().join("m.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("labels.tsv") && err.contains("line 2"), "{err}");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2, "only the inputs written above remain");
}

#[test]
fn run_log_reports_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.jsonl");
    let o = run(&[
        "filter", "--log", "--seed", "7",
        "--in", s(&manifest("tests/data/five_messages.jsonl")),
        "--query", s(&manifest("data/queries/table2.json")),
        "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let log = String::from_utf8(o.stderr).unwrap();
    let first: serde_json::Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    assert_eq!(first["event"], "start");
    assert_eq!(first["seed"], 7);
    assert!(log.lines().all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));
}

#[test]
fn file_pipeline_matches_one_shot() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    let corpus = p("corpus.jsonl");
    let words = ["goed", "slecht", "mooi", "corona", "rivm", "thuis", "fijn", "huisarts", "ziek", "😀"];
    let mut raw = String::new();
    for i in 0..300u64 {
        let text = format!("{} {} {}", words[(i % 10) as usize], words[(i * 7 % 10) as usize], words[(i * 3 % 10) as usize]);
        let ts = 1_583_020_800 + i * 7_919;
        raw.push_str(&format!(
            "{{\"id\":\"{i}\",\"created_at\":{ts},\"text\":\"{text}\",\"lang\":\"nl\",\"platform\":\"twitter\"}}\n"
        ));
    }
    fs::write(&corpus, raw).unwrap();
    let query = manifest("data/queries/table2.json");
    let lexicon = manifest("data/lexicon/toy_nl.tsv");

    let ok = |args: &[&str]| {
        let o = run(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    };
    ok(&["filter", "--in", s(&corpus), "--query", s(&query), "--out", s(&p("matched.jsonl"))]);
    ok(&["sentiment", "--in", s(&p("matched.jsonl")), "--lexicon", s(&lexicon), "--out", s(&p("scored.csv"))]);
    ok(&["timeseries", "--kind", "sentiment", "--scored", s(&p("scored.csv")), "--bucket", "hour", "--out", s(&p("composed.csv"))]);
    ok(&["timeseries", "--kind", "sentiment", "--in", s(&p("matched.jsonl")), "--lexicon", s(&lexicon), "--bucket", "hour", "--out", s(&p("direct.csv"))]);
    let composed = fs::read(p("composed.csv")).unwrap();
    assert_eq!(composed, fs::read(p("direct.csv")).unwrap());

    let lex = PolarityLexicon::load(&lexicon).unwrap();
    let q = opinion_pulse::filterkit::TopicQuery::load(&query).unwrap();
    let scored = MessageReader::open(&corpus, Format::Jsonl)
        .unwrap()
        .filter(|m| q.matches(&m.text))
        .map(|m| (m.timestamp, lex.score(&m.text)));
    let series = sentiment_series(scored, Bucketer::new(Granularity::Hour, TzOffset::default()), ScoreFilter::All);
    let mut expected = Vec::new();
    write_sentiment_csv(&mut expected, &series, None).unwrap();
    assert_eq!(composed, expected);
}

#[test]
fn correlate_external_series() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    fs::write(&a, "bucket,mean,n\n2020-03-01,1,3\n2020-03-02,2,3\n2020-03-03,3,3\n2020-03-04,9,3\n").unwrap();
    fs::write(&b, "date,value\n2020-03-01,2\n2020-03-02,4\n2020-03-03,7\n").unwrap();
    let o = run(&["correlate", "--a", s(&a), "--b", s(&b)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let line = String::from_utf8(o.stdout).unwrap();
    assert!(line.starts_with("r=0.9933") && line.trim_end().ends_with("n_overlap=3"), "{line}");

    fs::write(&b, "date,value\n2020-03-01,5\n2020-03-02,5\n").unwrap();
    let o = run(&["correlate", "--a", s(&a), "--b", s(&b)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate series"));
}
