//! Line-delimited corpus reader and writer.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::message::{parse_timestamp, Message, Platform};
use crate::error::{Error, Result};

/// Input layout of a corpus file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Jsonl,
    Tsv,
}

impl Format {
    /// Guesses from the file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("tsv") => Format::Tsv,
            _ => Format::Jsonl,
        }
    }
}

/// Counts gathered while reading. `per_day` is keyed by UTC date.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: u64,
    pub rejected: u64,
    pub per_day: BTreeMap<NaiveDate, u64>,
    pub per_platform: BTreeMap<Platform, u64>,
}

impl CorpusStats {
    pub fn record(&mut self, msg: &Message) {
        self.total += 1;
        *self.per_day.entry(msg.timestamp.date_naive()).or_default() += 1;
        *self.per_platform.entry(msg.platform).or_default() += 1;
    }

    pub fn merge(&mut self, other: &CorpusStats) {
        self.total += other.total;
        self.rejected += other.rejected;
        for (day, n) in &other.per_day {
            *self.per_day.entry(*day).or_default() += n;
        }
        for (p, n) in &other.per_platform {
            *self.per_platform.entry(*p).or_default() += n;
        }
    }
}

/// Why a line was skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub line: usize,
    pub reason: String,
}

const MAX_DIAGNOSTICS: usize = 100;

/// Streaming reader yielding one [`Message`] per well-formed line.
///
/// Malformed lines are counted and skipped. A read failure ends the
/// iteration; it is reported by [`MessageReader::finish`].
pub struct MessageReader<R> {
    input: R,
    format: Format,
    source: PathBuf,
    line_no: usize,
    buf: Vec<u8>,
    stats: CorpusStats,
    diagnostics: Vec<Rejection>,
    failure: Option<io::Error>,
    done: bool,
}

impl MessageReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>, format: Format) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(BufReader::with_capacity(1 << 16, file), format, path))
    }
}

impl<R: BufRead> MessageReader<R> {
    pub fn new(input: R, format: Format, source: impl Into<PathBuf>) -> Self {
        MessageReader {
            input,
            format,
            source: source.into(),
            line_no: 0,
            buf: Vec::with_capacity(512),
            stats: CorpusStats::default(),
            diagnostics: Vec::new(),
            failure: None,
            done: false,
        }
    }

    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    /// The first rejected lines, capped at 100 entries.
    pub fn diagnostics(&self) -> &[Rejection] {
        &self.diagnostics
    }

    /// Drains the remaining input and returns the final counts.
    pub fn finish(mut self) -> Result<CorpusStats> {
        while self.next().is_some() {}
        match self.failure.take() {
            Some(e) => Err(Error::io(self.source, e)),
            None => Ok(self.stats),
        }
    }

    fn reject(&mut self, reason: String) {
        self.stats.rejected += 1;
        if self.diagnostics.len() < MAX_DIAGNOSTICS {
            self.diagnostics.push(Rejection {
                line: self.line_no,
                reason,
            });
        }
    }
}

impl<R: BufRead> Iterator for MessageReader<R> {
    type Item = Message;

    fn next(&mut self) -> Option<Message> {
        while !self.done {
            self.buf.clear();
            match self.input.read_until(b'\n', &mut self.buf) {
                Ok(0) => {
                    self.done = true;
                    return None;
                }
                Ok(_) => {}
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => {
                    self.failure = Some(e);
                    self.done = true;
                    return None;
                }
            }
            self.line_no += 1;
            let line = match std::str::from_utf8(&self.buf) {
                Ok(s) => s.trim_end_matches(['\n', '\r']),
                Err(_) => {
                    self.reject("invalid UTF-8".into());
                    continue;
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let parsed = match self.format {
                Format::Jsonl => parse_json_line(line),
                Format::Tsv => {
                    if self.line_no == 1 && line.starts_with("id\t") {
                        continue;
                    }
                    parse_tsv_line(line)
                }
            };
            match parsed {
                Ok(msg) => {
                    self.stats.record(&msg);
                    return Some(msg);
                }
                Err(reason) => self.reject(reason),
            }
        }
        None
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Scalar<'a> {
    Str(#[serde(borrow)] std::borrow::Cow<'a, str>),
    Int(i64),
    Uint(u64),
}

impl Scalar<'_> {
    fn into_string(self) -> String {
        match self {
            Scalar::Str(s) => s.into_owned(),
            Scalar::Int(i) => i.to_string(),
            Scalar::Uint(u) => u.to_string(),
        }
    }
}

#[derive(Deserialize)]
struct JsonRecord<'a> {
    #[serde(borrow)]
    id: Option<Scalar<'a>>,
    #[serde(borrow)]
    created_at: Option<Scalar<'a>>,
    #[serde(borrow, default)]
    text: Option<std::borrow::Cow<'a, str>>,
    #[serde(borrow, default)]
    lang: Option<std::borrow::Cow<'a, str>>,
    #[serde(borrow, default)]
    platform: Option<std::borrow::Cow<'a, str>>,
    #[serde(default)]
    retweet: Option<bool>,
}

fn parse_json_line(line: &str) -> std::result::Result<Message, String> {
    let rec: JsonRecord = serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    let id = rec.id.ok_or("missing id")?.into_string();
    let ts_raw = rec.created_at.ok_or("missing created_at")?.into_string();
    let timestamp =
        parse_timestamp(&ts_raw).ok_or_else(|| format!("unparseable timestamp {ts_raw:?}"))?;
    let text = rec.text.ok_or("missing text")?;
    let platform = Platform::from_str(rec.platform.as_deref().ok_or("missing platform")?)?;
    let lang = rec.lang.as_deref().unwrap_or(super::UNDETERMINED_LANG);
    Message::new(
        id,
        timestamp,
        text.into_owned(),
        lang,
        platform,
        rec.retweet.unwrap_or(false),
    )
    .ok_or_else(|| "empty text".to_string())
}

fn parse_tsv_line(line: &str) -> std::result::Result<Message, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() < 5 || cols.len() > 6 {
        return Err(format!("expected 5 or 6 tab-separated columns, found {}", cols.len()));
    }
    let timestamp =
        parse_timestamp(cols[1]).ok_or_else(|| format!("unparseable timestamp {:?}", cols[1]))?;
    let platform = Platform::from_str(cols[4])?;
    let is_repost = match cols.get(5).map(|s| s.trim()) {
        None | Some("") | Some("0") | Some("false") => false,
        Some("1") | Some("true") => true,
        Some(other) => return Err(format!("invalid retweet flag {other:?}")),
    };
    Message::new(cols[0], timestamp, cols[2], cols[3], platform, is_repost)
        .ok_or_else(|| "empty text".to_string())
}

#[derive(Serialize)]
struct JsonOut<'a> {
    id: &'a str,
    created_at: String,
    text: &'a str,
    lang: &'a str,
    platform: Platform,
    retweet: bool,
}

/// Writes one JSONL line in the reader's input schema.
pub fn write_jsonl<W: Write>(out: &mut W, msg: &Message) -> Result<()> {
    let rec = JsonOut {
        id: &msg.id,
        created_at: msg.created_at(),
        text: &msg.text,
        lang: &msg.lang,
        platform: msg.platform,
        retweet: msg.is_repost,
    };
    serde_json::to_writer(&mut *out, &rec)?;
    out.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(input: &str, format: Format) -> (Vec<Message>, CorpusStats, Vec<Rejection>) {
        let mut reader = MessageReader::new(input.as_bytes(), format, "mem");
        let msgs: Vec<_> = reader.by_ref().collect();
        let diags = reader.diagnostics().to_vec();
        (msgs, reader.finish().unwrap(), diags)
    }

    #[test]
    fn well_formed_line() {
        let (msgs, stats, _) = read(
            r#"{"id":"1","created_at":"2020-03-12T15:00:00Z","text":"persconferentie","lang":"nl","platform":"twitter"}"#,
            Format::Jsonl,
        );
        assert_eq!(msgs.len(), 1);
        assert_eq!(stats.rejected, 0);
        assert_eq!(msgs[0].text, "persconferentie");
        assert_eq!(msgs[0].created_at(), "2020-03-12T15:00:00Z");
        assert!(!msgs[0].is_repost);
    }

    #[test]
    fn malformed_line_counted() {
        let (msgs, stats, diags) = read("not json\n", Format::Jsonl);
        assert!(msgs.is_empty());
        assert_eq!(stats.rejected, 1);
        assert_eq!(diags[0].line, 1);
    }

    #[test]
    fn rejects_bad_timestamp_and_missing_text() {
        let input = concat!(
            r#"{"id":1,"created_at":1584025200,"text":"ok","platform":"reddit","retweet":true}"#,
            "\n",
            r#"{"id":"2","created_at":"gisteren","text":"x","platform":"twitter"}"#,
            "\n\n",
            r#"{"id":"3","created_at":"2020-03-12T15:00:00Z","platform":"twitter"}"#,
            "\n",
            r#"{"id":"4","created_at":"2020-03-12T15:00:00Z","text":"   ","platform":"twitter"}"#,
            "\n"
        );
        let (msgs, stats, diags) = read(input, Format::Jsonl);
        assert_eq!(msgs.len(), 1);
        assert_eq!(msgs[0].id, "1");
        assert_eq!(msgs[0].lang, "und");
        assert!(msgs[0].is_repost);
        assert_eq!(stats.rejected, 3);
        let lines: Vec<_> = diags.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![2, 4, 5]);
        assert!(diags[0].reason.contains("timestamp"));
        assert!(diags[1].reason.contains("text"));
    }

    #[test]
    fn thousand_lines_three_malformed() {
        let mut input = String::new();
        for i in 0..1000 {
            if i % 333 == 100 {
                input.push_str("{broken\n");
            } else {
                input.push_str(&format!(
                    "{{\"id\":\"{i}\",\"created_at\":\"2020-03-{:02}T10:00:00Z\",\"text\":\"t{i}\",\"lang\":\"nl\",\"platform\":\"twitter\"}}\n",
                    1 + i % 28
                ));
            }
        }
        let (msgs, stats, _) = read(&input, Format::Jsonl);
        assert_eq!(msgs.len(), 997);
        assert_eq!(stats.total, 997);
        assert_eq!(stats.rejected, 3);
        assert_eq!(stats.per_day.values().sum::<u64>(), 997);
        assert_eq!(stats.per_platform.values().sum::<u64>(), 997);
    }

    #[test]
    fn tsv_with_header() {
        let input = "id\tcreated_at\ttext\tlang\tplatform\n\
                     a\t2020-03-12T15:00:00Z\thallo daar\tnl\tnunl\n\
                     b\t2020-03-12T15:00:00Z\ttoo few\tnl\n\
                     c\t1584025200\tretweet\tnl\ttwitter\ttrue\n";
        let (msgs, stats, _) = read(input, Format::Tsv);
        assert_eq!(msgs.len(), 2);
        assert_eq!(msgs[0].platform, Platform::Nunl);
        assert!(msgs[1].is_repost);
        assert_eq!(stats.rejected, 1);
    }

    #[test]
    fn stats_json_shape() {
        let (_, stats, _) = read(
            r#"{"id":"1","created_at":"2020-03-12T15:00:00Z","text":"x","lang":"nl","platform":"twitter"}"#,
            Format::Jsonl,
        );
        let json = serde_json::to_string(&stats).unwrap();
        assert_eq!(
            json,
            r#"{"total":1,"rejected":0,"per_day":{"2020-03-12":1},"per_platform":{"twitter":1}}"#
        );
    }

    #[test]
    fn unreadable_file_is_fatal() {
        assert!(matches!(
            MessageReader::open("/nonexistent/corpus.jsonl", Format::Jsonl),
            Err(Error::Io { .. })
        ));
    }
}
