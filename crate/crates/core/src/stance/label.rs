use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stance toward a target policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Supports,
    Rejects,
    Other,
}

pub const NUM_LABELS: usize = 3;

impl Label {
    /// Fixed order used for model outputs and tie-breaking.
    pub const ORDER: [Label; NUM_LABELS] = [Label::Supports, Label::Rejects, Label::Other];

    pub fn index(self) -> usize {
        match self {
            Label::Supports => 0,
            Label::Rejects => 1,
            Label::Other => 2,
        }
    }

    pub fn from_index(i: usize) -> Label {
        Self::ORDER[i]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Supports => "supports",
            Label::Rejects => "rejects",
            Label::Other => "other",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "supports" | "support" | "s" => Ok(Label::Supports),
            "rejects" | "reject" | "r" => Ok(Label::Rejects),
            "other" | "o" => Ok(Label::Other),
            "" => Err("missing label".into()),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// One annotated text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub text: String,
    pub label: Label,
}

impl LabeledExample {
    pub fn new(text: impl Into<String>, label: Label) -> Self {
        LabeledExample {
            text: text.into(),
            label,
        }
    }
}

/// Parses `label<TAB>text` lines. Blank lines are skipped.
pub fn parse_labels(raw: &str) -> std::result::Result<Vec<LabeledExample>, (usize, String)> {
    let mut out = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (label, text) = line
            .split_once('\t')
            .ok_or((line_no, "expected label<TAB>text".to_string()))?;
        let label = Label::from_str(label).map_err(|e| (line_no, e))?;
        if text.trim().is_empty() {
            return Err((line_no, "empty text".into()));
        }
        out.push(LabeledExample::new(text, label));
    }
    Ok(out)
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<LabeledExample>> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&raw).map_err(|(line, msg)| Error::line(path, line, msg))
}

/// Tabs and line breaks inside a text would break the line format.
pub fn sanitize_text(text: &str) -> String {
    text.split(['\t', '\n', '\r']).collect::<Vec<_>>().join(" ")
}

pub fn write_labels<W: Write>(out: &mut W, examples: &[LabeledExample]) -> Result<()> {
    for ex in examples {
        writeln!(out, "{}\t{}", ex.label, sanitize_text(&ex.text))?;
    }
    Ok(())
}
