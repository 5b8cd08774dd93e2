//! Lexicon-based polarity scoring.
//!
//! A message's score is the unweighted mean of every lexicon hit: each word
//! token found in the word map and each occurrence of an emoji entry in the
//! raw text. Messages without hits score 0.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Message;
use crate::error::{Error, Result};
use crate::tokenize::tokens;

/// Word and emoji polarity scores in [-1, 1].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolarityLexicon {
    name: String,
    words: HashMap<String, f64>,
    // ordered so emoji scanning and summation are reproducible
    emoji: BTreeMap<String, f64>,
}

/// Entries without any alphanumeric character are matched as emoji.
fn is_emoji_entry(term: &str) -> bool {
    !term.chars().any(char::is_alphanumeric)
}

impl PolarityLexicon {
    pub fn new(name: impl Into<String>) -> Self {
        PolarityLexicon {
            name: name.into(),
            ..Default::default()
        }
    }

    /// Adds one entry, routing it to the word or emoji map.
    pub fn insert(&mut self, term: &str, score: f64) -> std::result::Result<(), String> {
        if !score.is_finite() || !(-1.0..=1.0).contains(&score) {
            return Err("score out of range".into());
        }
        let term = term.trim();
        if term.is_empty() {
            return Err("empty term".into());
        }
        let duplicate = if is_emoji_entry(term) {
            self.emoji.insert(term.to_string(), score).is_some()
        } else {
            self.words.insert(term.to_lowercase(), score).is_some()
        };
        if duplicate {
            return Err(format!("duplicate term {term:?}"));
        }
        Ok(())
    }

    /// Loads `term<TAB>score` lines. Lines starting with `#` that contain no
    /// tab are comments, so hashtag entries still load.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("lexicon")
            .to_string();
        Self::parse(&raw, name).map_err(|(line, msg)| Error::line(path, line, msg))
    }

    /// Parses lexicon text; errors carry the 1-based line number.
    pub fn parse(raw: &str, name: impl Into<String>) -> std::result::Result<Self, (usize, String)> {
        let mut lex = PolarityLexicon::new(name);
        for (i, line) in raw.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || (line.starts_with('#') && !line.contains('\t')) {
                continue;
            }
            let (term, score) = line
                .split_once('\t')
                .ok_or((line_no, "expected term<TAB>score".to_string()))?;
            let score: f64 = score
                .trim()
                .parse()
                .map_err(|_| (line_no, format!("invalid score {:?}", score.trim())))?;
            lex.insert(term, score)
                .map_err(|msg| (line_no, format!("{msg}, line {line_no}")))?;
        }
        Ok(lex)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entry_count(&self) -> usize {
        self.words.len() + self.emoji.len()
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn emoji_count(&self) -> usize {
        self.emoji.len()
    }

    pub fn word_score(&self, word: &str) -> Option<f64> {
        self.words.get(word).copied()
    }

    /// Scores one text.
    pub fn score(&self, text: &str) -> PolarityScore {
        let mut hits: Vec<f64> = tokens(text).filter_map(|t| self.word_score(&t)).collect();
        for (emoji, &s) in &self.emoji {
            let n = text.matches(emoji.as_str()).count();
            hits.extend(std::iter::repeat_n(s, n));
        }
        PolarityScore::from_hits(hits)
    }
}

/// Polarity of one message.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarityScore {
    pub value: f64,
    pub hits: usize,
    pub is_zero: bool,
}

impl PolarityScore {
    pub const ZERO: PolarityScore = PolarityScore {
        value: 0.0,
        hits: 0,
        is_zero: true,
    };

    fn from_hits(mut hits: Vec<f64>) -> Self {
        if hits.is_empty() {
            return Self::ZERO;
        }
        // order-independent sum: the value depends only on the bag of hits
        hits.sort_by(f64::total_cmp);
        let value = (hits.iter().sum::<f64>() / hits.len() as f64).clamp(-1.0, 1.0);
        PolarityScore {
            value,
            hits: hits.len(),
            is_zero: value == 0.0,
        }
    }

    /// Rebuilds a score read back from a scored CSV.
    pub fn from_parts(value: f64, hits: usize) -> Self {
        PolarityScore {
            value,
            hits,
            is_zero: hits == 0 || value == 0.0,
        }
    }
}

/// Running aggregate of scores. Merging is associative.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PolaritySummary {
    pub count: u64,
    pub nonzero: u64,
    pub sum: f64,
}

impl PolaritySummary {
    pub fn add(&mut self, score: &PolarityScore) {
        self.count += 1;
        if !score.is_zero {
            self.nonzero += 1;
        }
        self.sum += score.value;
    }

    pub fn merge(&mut self, other: &PolaritySummary) {
        self.count += other.count;
        self.nonzero += other.nonzero;
        self.sum += other.sum;
    }

    /// Mean over all messages, zeros included. 0 for an empty stream.
    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    /// Mean over messages with a non-zero score only.
    pub fn mean_nonzero(&self) -> f64 {
        if self.nonzero == 0 {
            0.0
        } else {
            // zero scores contribute nothing to the sum
            self.sum / self.nonzero as f64
        }
    }

    pub fn nonzero_fraction(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.nonzero as f64 / self.count as f64
        }
    }

    pub fn report(&self) -> SummaryReport {
        SummaryReport {
            n: self.count,
            mean: self.mean(),
            mean_nonzero: self.mean_nonzero(),
            nonzero_fraction: self.nonzero_fraction(),
        }
    }
}

/// Serializable form of a [`PolaritySummary`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub n: u64,
    pub mean: f64,
    pub mean_nonzero: f64,
    pub nonzero_fraction: f64,
}

/// Iterator scoring each message and keeping a running summary.
pub struct ScoredStream<'a, I> {
    lexicon: &'a PolarityLexicon,
    inner: I,
    summary: PolaritySummary,
}

impl<I> ScoredStream<'_, I> {
    pub fn summary(&self) -> &PolaritySummary {
        &self.summary
    }
}

impl<I: Iterator<Item = Message>> Iterator for ScoredStream<'_, I> {
    type Item = (Message, PolarityScore);

    fn next(&mut self) -> Option<Self::Item> {
        let msg = self.inner.next()?;
        let score = self.lexicon.score(&msg.text);
        self.summary.add(&score);
        Some((msg, score))
    }
}

pub fn score_stream<I>(lexicon: &PolarityLexicon, msgs: I) -> ScoredStream<'_, I::IntoIter>
where
    I: IntoIterator<Item = Message>,
{
    ScoredStream {
        lexicon,
        inner: msgs.into_iter(),
        summary: PolaritySummary::default(),
    }
}

/// One row of the scored CSV (`id,timestamp,value,hits`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRow {
    pub id: String,
    pub timestamp: String,
    pub value: f64,
    pub hits: usize,
}

impl ScoredRow {
    pub fn new(msg: &Message, score: &PolarityScore) -> Self {
        ScoredRow {
            id: msg.id.clone(),
            timestamp: msg.created_at(),
            value: score.value,
            hits: score.hits,
        }
    }
}

/// CSV writer for scored output; the header is written on the first row.
pub fn scored_csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(true).from_writer(out)
}
