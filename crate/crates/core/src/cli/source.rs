use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use super::output::RunLog;
use crate::corpus::{CorpusStats, Format, Message, MessageReader};
use crate::error::{Error, Result};

/// Streams messages from several corpus files in order, optionally
/// dropping reposts. Call [`Corpus::finish`] after iterating.
pub struct Corpus {
    paths: std::collections::VecDeque<PathBuf>,
    format: Option<Format>,
    count_reposts: bool,
    current: Option<(PathBuf, MessageReader<BufReader<File>>)>,
    stats: CorpusStats,
    reposts_dropped: u64,
    failure: Option<Error>,
    log: RunLog,
}

impl Corpus {
    pub fn new(paths: &[PathBuf], format: Option<Format>, count_reposts: bool, log: RunLog) -> Result<Self> {
        for p in paths {
            if !p.is_file() {
                return Err(Error::io(p, std::io::Error::new(std::io::ErrorKind::NotFound, "no such file")));
            }
        }
        Ok(Corpus {
            paths: paths.iter().cloned().collect(),
            format,
            count_reposts,
            current: None,
            stats: CorpusStats::default(),
            reposts_dropped: 0,
            failure: None,
            log,
        })
    }

    fn close_current(&mut self) {
        let Some((path, reader)) = self.current.take() else { return };
        for r in reader.diagnostics() {
            self.log.event("rejected", serde_json::json!({ "path": path, "line": r.line, "reason": r.reason }));
        }
        match reader.finish() {
            Ok(s) => self.stats.merge(&s),
            Err(e) => self.failure = Some(e),
        }
    }

    /// Ingest counts over all files; fails if any file could not be read.
    pub fn finish(mut self) -> Result<(CorpusStats, u64)> {
        self.close_current();
        match self.failure {
            Some(e) => Err(e),
            None => Ok((self.stats, self.reposts_dropped)),
        }
    }
}

impl Iterator for Corpus {
    type Item = Message;

    fn next(&mut self) -> Option<Message> {
        loop {
            if self.failure.is_some() {
                return None;
            }
            if self.current.is_none() {
                let path = self.paths.pop_front()?;
                let format = self.format.unwrap_or_else(|| Format::from_path(&path));
                self.log.event("open", serde_json::json!({ "path": path, "format": format }));
                match MessageReader::open(&path, format) {
                    Ok(r) => self.current = Some((path, r)),
                    Err(e) => {
                        self.failure = Some(e);
                        return None;
                    }
                }
            }
            match self.current.as_mut().and_then(|(_, r)| r.next()) {
                Some(m) if !self.count_reposts && m.is_repost => self.reposts_dropped += 1,
                Some(m) => return Some(m),
                None => self.close_current(),
            }
        }
    }
}
