use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use super::output::{emit_json, open_file, to_json, Outputs, RunLog, Staged};
use super::source::Corpus;
use super::*;
use crate::corpus::{dedup, looks_dutch, parse_timestamp, sample, write_jsonl, LangFilter, SampleSpec};
use crate::error::Error;
use crate::filterkit::{expand_query_reviewed, ExpansionParams, TopicQuery};
use crate::polarity::{score_stream, scored_csv_writer, PolarityLexicon, PolarityScore, ScoredRow};
use crate::stance::{
    cross_validate, evaluate, grid_search, kappa, label_corpus, learning_curve, load_labels, prepare_annotation_set,
    train_traced, write_annotation_template, CurveParams, Grid, LabeledRow, StanceModel,
};
use crate::timeseries::{
    annotate_events, frequency_series, load_events, load_external_series, moving_average, read_series_csv,
    sentiment_series, stance_series, write_frequency_csv, write_sentiment_csv, write_stance_csv, Alignment,
    Bucketer, ScoreFilter, Series,
};

type CmdResult = std::result::Result<(), CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn dispatch(cli: &Cli, log: RunLog) -> CmdResult {
    let seed = cli.seed;
    log.event("start", json!({ "command": command_name(&cli.command), "seed": seed }));
    let mut outputs = Outputs::default();
    match &cli.command {
        Command::Filter(a) => filter(a, log, seed, &mut outputs)?,
        Command::ExpandQuery(a) => expand(a, log, &mut outputs)?,
        Command::Sentiment(a) => sentiment(a, log, &mut outputs)?,
        Command::Timeseries(a) => timeseries(a, log, &mut outputs)?,
        Command::AnnotateSample(a) => annotate_sample(a, log, seed, &mut outputs)?,
        Command::Kappa(a) => kappa_cmd(a, &mut outputs)?,
        Command::Train(a) => train_cmd(a, log, seed, &mut outputs)?,
        Command::Evaluate(a) => evaluate_cmd(a, &mut outputs)?,
        Command::CrossValidate(a) => cross_validate_cmd(a, log, seed, &mut outputs)?,
        Command::GridSearch(a) => grid_search_cmd(a, log, seed, &mut outputs)?,
        Command::LearningCurve(a) => learning_curve_cmd(a, log, seed, &mut outputs)?,
        Command::Predict(a) => predict(a, log, &mut outputs)?,
        Command::StanceSeries(a) => stance_series_cmd(a, log, &mut outputs)?,
        Command::Correlate(a) => correlate_cmd(a, &mut outputs)?,
    }
    outputs.commit()?;
    log.event("done", json!({}));
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Filter(_) => "filter",
        Command::ExpandQuery(_) => "expand-query",
        Command::Sentiment(_) => "sentiment",
        Command::Timeseries(_) => "timeseries",
        Command::AnnotateSample(_) => "annotate-sample",
        Command::Kappa(_) => "kappa",
        Command::Train(_) => "train",
        Command::Evaluate(_) => "evaluate",
        Command::CrossValidate(_) => "cross-validate",
        Command::GridSearch(_) => "grid-search",
        Command::LearningCurve(_) => "learning-curve",
        Command::Predict(_) => "predict",
        Command::StanceSeries(_) => "stance-series",
        Command::Correlate(_) => "correlate",
    }
}

fn open_corpus(args: &CorpusArgs, log: RunLog) -> Result<Corpus, CliError> {
    Ok(Corpus::new(&args.inputs, args.format, args.count_reposts, log)?)
}

fn finish_corpus(corpus: Corpus, log: RunLog) -> Result<crate::corpus::CorpusStats, CliError> {
    let (stats, reposts_dropped) = corpus.finish()?;
    log.event(
        "ingest",
        json!({ "total": stats.total, "rejected": stats.rejected, "reposts_dropped": reposts_dropped }),
    );
    Ok(stats)
}

fn sample_spec(rate: Option<f64>, count: Option<usize>) -> Result<Option<SampleSpec>, CliError> {
    match (rate, count) {
        (Some(r), None) if r > 0.0 && r <= 1.0 => Ok(Some(SampleSpec::Rate(r))),
        (Some(r), None) => Err(usage(format!("--sample-rate {r} is not in (0, 1]"))),
        (None, Some(n)) => Ok(Some(SampleSpec::Count(n))),
        (None, None) => Ok(None),
        (Some(_), Some(_)) => Err(usage("give either a sampling rate or a count, not both")),
    }
}

fn filter(a: &FilterArgs, log: RunLog, seed: u64, outputs: &mut Outputs) -> CmdResult {
    let query = TopicQuery::load(&a.query)?;
    let spec = sample_spec(a.sample_rate, a.sample_count)?;
    let lang = a.lang.as_deref().map(|l| {
        let f = LangFilter::new(l);
        if a.guess_undetermined {
            f.with_undetermined(Box::new(|m| looks_dutch(&m.text)))
        } else {
            f
        }
    });
    let mut corpus = open_corpus(&a.corpus, log)?;
    let mut out = Staged::create(&a.out)?;
    let mut written = 0u64;
    {
        let selected = corpus
            .by_ref()
            .filter(|m| lang.as_ref().is_none_or(|f| f.accepts(m)))
            .filter(|m| query.matches(&m.text));
        let mut selected: Box<dyn Iterator<Item = _>> = match a.dedup {
            Some(mode) => Box::new(dedup(selected, mode)),
            None => Box::new(selected),
        };
        match spec {
            None => {
                for m in &mut selected {
                    write_jsonl(&mut out, &m)?;
                    written += 1;
                }
            }
            Some(spec) => {
                for m in sample(selected.collect(), spec, seed)? {
                    write_jsonl(&mut out, &m)?;
                    written += 1;
                }
            }
        }
    }
    let stats = finish_corpus(corpus, log)?;
    log.event("filter", json!({ "query": query.name(), "written": written }));
    outputs.add(out);
    if let Some(p) = &a.stats {
        emit_json(outputs, Some(p), &stats)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ExpansionReport {
    query: String,
    rounds: Vec<crate::filterkit::ExpansionRound>,
    accepted: Vec<String>,
}

fn expand(a: &ExpandArgs, log: RunLog, outputs: &mut Outputs) -> CmdResult {
    let query = TopicQuery::load(&a.query)?;
    let mut corpus = open_corpus(&a.corpus, log)?;
    let msgs: Vec<_> = corpus.by_ref().collect();
    finish_corpus(corpus, log)?;
    let params = ExpansionParams {
        rounds: a.rounds,
        top_k: a.top_k,
        min_count: a.min_count,
    };
    let mut accepted: Vec<String> = Vec::new();
    let wanted: Vec<String> = a.accept.iter().map(|t| t.trim().to_lowercase()).collect();
    let rounds = expand_query_reviewed(&query, &msgs, params, |round| {
        let new: Vec<String> = round
            .candidates
            .iter()
            .filter(|c| wanted.contains(&c.token) && !accepted.contains(&c.token))
            .map(|c| c.token.clone())
            .collect();
        accepted.extend(new.iter().cloned());
        new
    })?;
    log.event("expand", json!({ "rounds": rounds.len(), "accepted": accepted }));
    if let Some(p) = &a.query_out {
        emit_json(outputs, Some(p), &query.with_keywords(&accepted)?)?;
    }
    let report = ExpansionReport {
        query: query.name().to_string(),
        rounds,
        accepted,
    };
    emit_json(outputs, a.out.as_deref(), &report)
        .map_err(CliError::from)
}

fn sentiment(a: &SentimentArgs, log: RunLog, outputs: &mut Outputs) -> CmdResult {
    let lexicon = PolarityLexicon::load(&a.lexicon)?;
    log.event("lexicon", json!({ "name": lexicon.name(), "entries": lexicon.entry_count() }));
    let mut corpus = open_corpus(&a.corpus, log)?;
    let mut out = Staged::create(&a.out)?;
    let summary = {
        let mut w = scored_csv_writer(&mut out);
        let mut scored = score_stream(&lexicon, corpus.by_ref());
        for (msg, score) in scored.by_ref() {
            w.serialize(ScoredRow::new(&msg, &score)).map_err(csv_error)?;
        }
        w.flush().map_err(Error::from)?;
        *scored.summary()
    };
    finish_corpus(corpus, log)?;
    outputs.add(out);
    if let Some(p) = &a.summary {
        emit_json(outputs, Some(p), &summary.report())?;
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Stream(e.into())
}

fn read_scored(path: &Path) -> Result<Vec<(chrono::DateTime<chrono::Utc>, PolarityScore)>, CliError> {
    let mut rdr = csv::Reader::from_reader(BufReader::new(open_file(path)?));
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<ScoredRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::line(path, line, e.to_string()))?;
        let ts = parse_timestamp(&row.timestamp)
            .ok_or_else(|| Error::line(path, line, format!("bad timestamp {:?}", row.timestamp)))?;
        out.push((ts, PolarityScore::from_parts(row.value, row.hits)));
    }
    Ok(out)
}

fn timeseries(a: &TimeseriesArgs, log: RunLog, outputs: &mut Outputs) -> CmdResult {
    let bucketer = Bucketer::new(a.buckets.bucket, a.buckets.tz_offset);
    if a.ma == Some(0) {
        return Err(usage("--ma must be at least 1"));
    }
    let corpus_args = || CorpusArgs {
        inputs: a.inputs.clone(),
        format: a.format,
        count_reposts: a.count_reposts,
    };
    let series = match a.kind {
        SeriesKind::Frequency => {
            if a.inputs.is_empty() {
                return Err(usage("frequency series need --in"));
            }
            let mut corpus = open_corpus(&corpus_args(), log)?;
            let s = frequency_series(corpus.by_ref().map(|m| m.timestamp), bucketer);
            finish_corpus(corpus, log)?;
            s
        }
        SeriesKind::Sentiment => {
            let filter = if a.nonzero_only { ScoreFilter::NonzeroOnly } else { ScoreFilter::All };
            match (&a.scored, &a.lexicon) {
                (Some(scored), None) => sentiment_series(read_scored(scored)?, bucketer, filter),
                (None, Some(lex)) if !a.inputs.is_empty() => {
                    let lexicon = PolarityLexicon::load(lex)?;
                    let mut corpus = open_corpus(&corpus_args(), log)?;
                    let s = sentiment_series(
                        corpus.by_ref().map(|m| (m.timestamp, lexicon.score(&m.text))),
                        bucketer,
                        filter,
                    );
                    finish_corpus(corpus, log)?;
                    s
                }
                _ => return Err(usage("sentiment series need --scored, or --in with --lexicon")),
            }
        }
    };
    log.event("series", json!({ "points": series.len(), "n": series.total_n() }));
    let ma = a.ma.map(|w| {
        let align = if a.centered { Alignment::Centered } else { Alignment::Trailing };
        moving_average(&series, w, align)
    });
    let mut out = Staged::create(&a.out)?;
    match a.kind {
        SeriesKind::Frequency => write_frequency_csv(&mut out, &series, ma.as_ref())?,
        SeriesKind::Sentiment => write_sentiment_csv(&mut out, &series, ma.as_ref())?,
    }
    outputs.add(out);
    if let Some(ev) = &a.events {
        let events = load_events(ev)?;
        let ann = annotate_events(&series, &events);
        log.event("events", json!({ "markers": ann.markers.len(), "out_of_range": ann.out_of_range.len() }));
        emit_json(outputs, a.markers_out.as_deref(), &ann)?;
    }
    Ok(())
}

fn annotate_sample(a: &AnnotateArgs, log: RunLog, seed: u64, outputs: &mut Outputs) -> CmdResult {
    let query = TopicQuery::load(&a.query)?;
    let spec = match sample_spec(a.rate, a.count)? {
        Some(s) => s,
        None => return Err(usage("give --count or --rate")),
    };
    let mut corpus = open_corpus(&a.corpus, log)?;
    let picked = prepare_annotation_set(corpus.by_ref(), &query, spec, seed)?;
    finish_corpus(corpus, log)?;
    log.event("sample", json!({ "selected": picked.len() }));
    let mut out = Staged::create(&a.out)?;
    write_annotation_template(&mut out, &picked)?;
    outputs.add(out);
    if let Some(p) = &a.messages_out {
        let mut m = Staged::create(p)?;
        for msg in &picked {
            write_jsonl(&mut m, msg)?;
        }
        outputs.add(m);
    }
    Ok(())
}

fn kappa_cmd(a: &KappaArgs, outputs: &mut Outputs) -> CmdResult {
    let first = load_labels(&a.a)?;
    let second = load_labels(&a.b)?;
    if first.len() != second.len() {
        return Err(Error::line(
            &a.b,
            first.len().min(second.len()) + 1,
            format!("{} labels here but {} in {}", second.len(), first.len(), a.a.display()),
        )
        .into());
    }
    for (i, (x, y)) in first.iter().zip(&second).enumerate() {
        if x.text.trim() != y.text.trim() {
            return Err(Error::line(&a.b, i + 1, "text differs from the first annotation file").into());
        }
    }
    let la: Vec<_> = first.iter().map(|e| e.label).collect();
    let lb: Vec<_> = second.iter().map(|e| e.label).collect();
    let report = kappa(&la, &lb)?;
    println!("kappa={}", report.kappa);
    if let Some(p) = &a.out {
        emit_json(outputs, Some(p), &report)?;
    }
    Ok(())
}

fn hyperparams(hp: &HyperparamArgs, seed: u64) -> Result<Hyperparams, CliError> {
    let h = Hyperparams {
        dim: hp.dim,
        epochs: hp.epochs,
        lr: hp.lr,
        ..base_hyperparams(&hp.subword, seed)
    };
    h.validate().map_err(|e| usage(e.to_string()))?;
    Ok(h)
}

fn base_hyperparams(sw: &SubwordArgs, seed: u64) -> Hyperparams {
    Hyperparams {
        char_ngram_min: sw.minn,
        char_ngram_max: sw.maxn,
        bucket: sw.buckets,
        seed,
        ..Hyperparams::default()
    }
}

fn stage_model(outputs: &mut Outputs, path: &Path, model: &StanceModel) -> CmdResult {
    let mut s = Staged::create(path)?;
    s.write_all(&model.to_bytes()?).map_err(Error::from)?;
    outputs.add(s);
    Ok(())
}

fn train_cmd(a: &TrainArgs, log: RunLog, seed: u64, outputs: &mut Outputs) -> CmdResult {
    let hp = hyperparams(&a.hp, seed)?;
    let examples = load_labels(&a.labels)?;
    log.event("train", json!({ "examples": examples.len(), "hyperparams": hp }));
    let (model, losses) = train_traced(&examples, &hp, true)?;
    log.event("trained", json!({ "final_loss": losses.last(), "vocab": model.vocab().len() }));
    stage_model(outputs, &a.out, &model)?;
    if let Some(p) = &a.trace {
        emit_json(outputs, Some(p), &json!({ "epoch_loss": losses }))?;
    }
    Ok(())
}

fn evaluate_cmd(a: &EvaluateArgs, outputs: &mut Outputs) -> CmdResult {
    let model = StanceModel::load(&a.model)?;
    let examples = load_labels(&a.labels)?;
    let report = evaluate(&model, &examples)?;
    emit_json(outputs, a.out.as_deref(), &report)?;
    Ok(())
}

fn cross_validate_cmd(a: &CrossValidateArgs, log: RunLog, seed: u64, outputs: &mut Outputs) -> CmdResult {
    let hp = hyperparams(&a.hp, seed)?;
    if a.folds < 2 {
        return Err(usage("--folds must be at least 2"));
    }
    let examples = load_labels(&a.labels)?;
    let cv = cross_validate(&examples, &hp, a.folds, seed)?;
    log.event("cross_validate", json!({ "mean_accuracy": cv.mean_accuracy }));
    emit_json(outputs, a.out.as_deref(), &cv)?;
    Ok(())
}

fn grid_search_cmd(a: &GridSearchArgs, log: RunLog, seed: u64, outputs: &mut Outputs) -> CmdResult {
    let base = base_hyperparams(&a.subword, seed);
    let grid = Grid {
        dims: a.dims.clone(),
        epochs: a.epochs.clone(),
        lrs: a.lrs.clone(),
    };
    for hp in grid.configs(&base) {
        hp.validate().map_err(|e| usage(e.to_string()))?;
    }
    let examples = load_labels(&a.labels)?;
    let (report, model) = grid_search(&examples, &grid, &base, a.objective, seed)?;
    log.event("grid_search", json!({ "trials": report.trials.len(), "best": report.best }));
    emit_json(outputs, a.out.as_deref(), &report)?;
    if let Some(p) = &a.model_out {
        stage_model(outputs, p, &model)?;
    }
    Ok(())
}

fn learning_curve_cmd(a: &LearningCurveArgs, log: RunLog, seed: u64, outputs: &mut Outputs) -> CmdResult {
    let hp = hyperparams(&a.hp, seed)?;
    if a.sizes.is_empty() || a.sizes.windows(2).any(|w| w[0] >= w[1]) || a.sizes[0] == 0 {
        return Err(usage("--sizes must be positive and strictly increasing"));
    }
    if a.repeats == 0 {
        return Err(usage("--repeats must be at least 1"));
    }
    let examples = load_labels(&a.labels)?;
    let test_size = a
        .test_size
        .unwrap_or_else(|| ((examples.len() as f64 * 0.1).round() as usize).max(1));
    let params = CurveParams {
        train_sizes: a.sizes.clone(),
        repeats: a.repeats,
        test_size,
        seed,
    };
    let points = learning_curve(&examples, &hp, &params)?;
    log.event("learning_curve", json!({ "points": points.len(), "test_size": test_size }));
    emit_json(outputs, a.out.as_deref(), &json!({ "test_size": test_size, "points": points }))?;
    Ok(())
}

fn predict(a: &PredictArgs, log: RunLog, outputs: &mut Outputs) -> CmdResult {
    let model = StanceModel::load(&a.model)?;
    let mut corpus = open_corpus(&a.corpus, log)?;
    let mut out = Staged::create(&a.out)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for lm in label_corpus(&model, corpus.by_ref()) {
            w.serialize(LabeledRow::from(&lm)).map_err(csv_error)?;
        }
        w.flush().map_err(Error::from)?;
    }
    finish_corpus(corpus, log)?;
    outputs.add(out);
    Ok(())
}

fn stance_series_cmd(a: &StanceSeriesArgs, log: RunLog, outputs: &mut Outputs) -> CmdResult {
    if a.buckets.bucket == Granularity::Hour {
        return Err(usage("stance series take --bucket day, week or month"));
    }
    let bucketer = Bucketer::new(a.buckets.bucket, a.buckets.tz_offset);
    let mut rdr = csv::Reader::from_reader(BufReader::new(open_file(&a.input)?));
    let mut labeled = Vec::new();
    for (i, row) in rdr.deserialize::<LabeledRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::line(&a.input, line, e.to_string()))?;
        let ts = parse_timestamp(&row.timestamp)
            .ok_or_else(|| Error::line(&a.input, line, format!("bad timestamp {:?}", row.timestamp)))?;
        labeled.push((ts, row.label));
    }
    let rates = stance_series(labeled, bucketer);
    log.event("stance_series", json!({ "buckets": rates.len() }));
    let mut out = Staged::create(&a.out)?;
    write_stance_csv(&mut out, &rates, a.buckets.bucket)?;
    outputs.add(out);
    Ok(())
}

fn load_any_series(path: &Path, column: Option<&str>, g: Granularity) -> Result<Series, CliError> {
    let mut first = String::new();
    BufReader::new(open_file(path)?)
        .read_line(&mut first)
        .map_err(|e| Error::io(path, e))?;
    let ours = first.split(',').next().is_some_and(|c| c.trim() == "bucket");
    if ours {
        Ok(read_series_csv(path, column, g)?)
    } else if column.is_some() {
        Err(usage(format!("{} is a date,value file; it has no named columns", path.display())))
    } else {
        Ok(load_external_series(path, g)?)
    }
}

fn correlate_cmd(a: &CorrelateArgs, outputs: &mut Outputs) -> CmdResult {
    let clip = |mut s: Series| {
        s.points.retain(|p| {
            let d = p.bucket.date();
            a.from.is_none_or(|f| d >= f) && a.to.is_none_or(|t| d <= t)
        });
        s
    };
    let sa = clip(load_any_series(&a.a, a.a_column.as_deref(), a.bucket)?);
    let sb = clip(load_any_series(&a.b, a.b_column.as_deref(), a.bucket)?);
    let c = crate::timeseries::correlate(&sa, &sb)?;
    println!("r={} n_overlap={}", c.r, c.n_overlap);
    if let Some(p) = &a.out {
        let raw = to_json(&c)?;
        let mut s = Staged::create(p)?;
        s.write_all(&raw).map_err(Error::from)?;
        outputs.add(s);
    }
    Ok(())
}
