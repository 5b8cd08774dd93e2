//! Command-line frontend. Each subcommand reads and writes flat files, so
//! stages compose through the filesystem.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 on a data error.

mod commands;
mod output;
mod source;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::corpus::{DedupMode, Format};
use crate::stance::{Hyperparams, Objective};
use crate::timeseries::{Granularity, TzOffset};

pub use output::{Outputs, RunLog, Staged};

/// Default seed of every randomized step.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "opinion-pulse", version, about = "Topic filtering, polarity, stance and time series over message corpora")]
pub struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Write a JSON-lines run log to stderr.
    #[arg(long, global = true)]
    pub log: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select on-topic messages with a keyword/regex query.
    Filter(FilterArgs),
    /// Rank candidate query terms by t-score against the unmatched corpus.
    ExpandQuery(ExpandArgs),
    /// Score messages with a polarity lexicon.
    Sentiment(SentimentArgs),
    /// Aggregate message counts or polarity per time bucket.
    Timeseries(TimeseriesArgs),
    /// Draw a deduplicated random sample for manual labeling.
    AnnotateSample(AnnotateArgs),
    /// Cohen's kappa between two annotation files.
    Kappa(KappaArgs),
    /// Train a stance classifier.
    Train(TrainArgs),
    /// Score a trained model on a labeled file.
    Evaluate(EvaluateArgs),
    /// k-fold cross-validation of one configuration.
    CrossValidate(CrossValidateArgs),
    /// Hyperparameter grid search on an 80/10/10 split.
    GridSearch(GridSearchArgs),
    /// Test scores as a function of training-set size.
    LearningCurve(LearningCurveArgs),
    /// Label a corpus with a trained model.
    Predict(PredictArgs),
    /// Stance proportions per time bucket.
    StanceSeries(StanceSeriesArgs),
    /// Pearson correlation of two series over their shared buckets.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Input corpus files (JSONL or TSV).
    #[arg(long = "in", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,

    /// Input layout; guessed from the extension when absent.
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Count reposts (retweets, crossposts). `--count-reposts false` drops them.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub count_reposts: bool,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,

    /// Query JSON file.
    #[arg(long)]
    pub query: PathBuf,

    /// Output JSONL of matched messages.
    #[arg(long)]
    pub out: PathBuf,

    /// Keep only this language tag.
    #[arg(long)]
    pub lang: Option<String>,

    /// With --lang nl, keep untagged messages only when a stopword test
    /// says they look Dutch (otherwise all untagged messages are kept).
    #[arg(long, requires = "lang")]
    pub guess_undetermined: bool,

    #[arg(long, value_enum)]
    pub dedup: Option<DedupMode>,

    /// Keep each matched message with this probability.
    #[arg(long, conflicts_with = "sample_count")]
    pub sample_rate: Option<f64>,

    /// Keep exactly this many matched messages.
    #[arg(long)]
    pub sample_count: Option<usize>,

    /// Write ingest statistics as JSON.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,

    #[arg(long)]
    pub query: PathBuf,

    #[arg(long, default_value_t = 1)]
    pub rounds: usize,

    #[arg(long, default_value_t = crate::filterkit::DEFAULT_TOP_K)]
    pub top_k: usize,

    /// Minimum count in the matched sub-corpus.
    #[arg(long, default_value_t = crate::filterkit::DEFAULT_MIN_COUNT)]
    pub min_count: u64,

    /// Terms accepted by a reviewer; each is added once it shows up among
    /// a round's candidates.
    #[arg(long, value_delimiter = ',')]
    pub accept: Vec<String>,

    /// Candidate report (JSON); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Write the query with accepted terms added.
    #[arg(long)]
    pub query_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SentimentArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,

    /// Lexicon TSV (term<TAB>score).
    #[arg(long)]
    pub lexicon: PathBuf,

    /// Scored CSV (id,timestamp,value,hits).
    #[arg(long)]
    pub out: PathBuf,

    /// Write corpus-level summary JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SeriesKind {
    Frequency,
    Sentiment,
}

#[derive(Debug, Args)]
pub struct BucketArgs {
    #[arg(long, value_enum, default_value_t = Granularity::Day)]
    pub bucket: Granularity,

    /// UTC offset applied before bucketing.
    #[arg(long, default_value = "+01:00", allow_hyphen_values = true)]
    pub tz_offset: TzOffset,
}

#[derive(Debug, Args)]
pub struct TimeseriesArgs {
    #[arg(long, value_enum)]
    pub kind: SeriesKind,

    /// Corpus files (frequency, or sentiment together with --lexicon).
    #[arg(long = "in", num_args = 1..)]
    pub inputs: Vec<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    pub count_reposts: bool,

    #[arg(long, conflicts_with = "scored")]
    pub lexicon: Option<PathBuf>,

    /// Scored CSV written by `sentiment`, instead of --in/--lexicon.
    #[arg(long, conflicts_with = "inputs")]
    pub scored: Option<PathBuf>,

    #[command(flatten)]
    pub buckets: BucketArgs,

    /// Average only messages with a nonzero score.
    #[arg(long)]
    pub nonzero_only: bool,

    /// Append a moving average over this many points.
    #[arg(long)]
    pub ma: Option<usize>,

    /// Center the moving-average window instead of trailing.
    #[arg(long, requires = "ma")]
    pub centered: bool,

    /// Events JSON ([{date,label}]) to place on the series.
    #[arg(long)]
    pub events: Option<PathBuf>,

    /// Where to write event markers; stdout when absent.
    #[arg(long, requires = "events")]
    pub markers_out: Option<PathBuf>,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,

    #[arg(long)]
    pub query: PathBuf,

    #[arg(long, conflicts_with = "rate", required_unless_present = "rate")]
    pub count: Option<usize>,

    #[arg(long)]
    pub rate: Option<f64>,

    /// Label template TSV: empty label column, tab, text.
    #[arg(long)]
    pub out: PathBuf,

    /// Also write the sampled messages as JSONL.
    #[arg(long)]
    pub messages_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KappaArgs {
    /// First annotator's labels TSV.
    #[arg(long)]
    pub a: PathBuf,

    /// Second annotator's labels TSV, same texts in the same order.
    #[arg(long)]
    pub b: PathBuf,

    /// Full agreement report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SubwordArgs {
    /// Shortest character n-gram.
    #[arg(long, default_value_t = Hyperparams::default().char_ngram_min)]
    pub minn: usize,

    /// Longest character n-gram.
    #[arg(long, default_value_t = Hyperparams::default().char_ngram_max)]
    pub maxn: usize,

    /// Hash buckets for character n-grams.
    #[arg(long, default_value_t = Hyperparams::default().bucket)]
    pub buckets: usize,
}

#[derive(Debug, Args)]
pub struct HyperparamArgs {
    #[arg(long, default_value_t = Hyperparams::default().dim)]
    pub dim: usize,

    #[arg(long, default_value_t = Hyperparams::default().epochs)]
    pub epochs: usize,

    #[arg(long, default_value_t = Hyperparams::default().lr)]
    pub lr: f64,

    #[command(flatten)]
    pub subword: SubwordArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled TSV (label<TAB>text).
    #[arg(long)]
    pub labels: PathBuf,

    #[command(flatten)]
    pub hp: HyperparamArgs,

    /// Model file.
    #[arg(long)]
    pub out: PathBuf,

    /// Write per-epoch training loss as JSON.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,

    #[arg(long)]
    pub labels: PathBuf,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrossValidateArgs {
    #[arg(long)]
    pub labels: PathBuf,

    #[arg(long, default_value_t = 10)]
    pub folds: usize,

    #[command(flatten)]
    pub hp: HyperparamArgs,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridSearchArgs {
    #[arg(long)]
    pub labels: PathBuf,

    #[arg(long, value_enum, default_value_t = Objective::FractionScore)]
    pub objective: Objective,

    /// Comma-separated vector dimensions.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,

    /// Comma-separated epoch counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub epochs: Vec<usize>,

    /// Comma-separated learning rates.
    #[arg(long, value_delimiter = ',', required = true)]
    pub lrs: Vec<f64>,

    #[command(flatten)]
    pub subword: SubwordArgs,

    /// Report JSON; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Save the selected model.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LearningCurveArgs {
    #[arg(long)]
    pub labels: PathBuf,

    /// Comma-separated, strictly increasing training-set sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,

    #[arg(long, default_value_t = 5)]
    pub repeats: usize,

    /// Held-out examples; defaults to 10% of the file.
    #[arg(long)]
    pub test_size: Option<usize>,

    #[command(flatten)]
    pub hp: HyperparamArgs,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,

    #[arg(long)]
    pub model: PathBuf,

    /// Labeled CSV (id,timestamp,label,p_supports,p_rejects,p_other).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StanceSeriesArgs {
    /// Labeled CSV written by `predict`.
    #[arg(long = "in")]
    pub input: PathBuf,

    #[command(flatten)]
    pub buckets: BucketArgs,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Series CSV written by `timeseries`, or a date,value CSV.
    #[arg(long)]
    pub a: PathBuf,

    #[arg(long)]
    pub b: PathBuf,

    /// Column of --a to use (series CSVs only).
    #[arg(long)]
    pub a_column: Option<String>,

    #[arg(long)]
    pub b_column: Option<String>,

    /// Bucket width both series are labeled with.
    #[arg(long, value_enum, default_value_t = Granularity::Day)]
    pub bucket: Granularity,

    /// First date to include (YYYY-MM-DD).
    #[arg(long)]
    pub from: Option<chrono::NaiveDate>,

    /// Last date to include.
    #[arg(long)]
    pub to: Option<chrono::NaiveDate>,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of one invocation.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(crate::Error),
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Data(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(e) => write!(f, "error: {e}"),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let log = RunLog::new(cli.log);
    match commands::dispatch(&cli, log) {
        Ok(()) => 0,
        Err(e) => {
            log.event("error", serde_json::json!({ "message": e.to_string(), "exit_code": e.exit_code() }));
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn parser_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["opinion-pulse", "filter"]), 1);
        assert_eq!(run(["opinion-pulse", "no-such-command"]), 1);
        assert_eq!(run(["opinion-pulse", "--help"]), 0);
    }
}
