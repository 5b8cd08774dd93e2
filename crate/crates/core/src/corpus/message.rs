use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Serialize};

/// Source platform of a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Twitter,
    Nunl,
    Reddit,
}

impl Platform {
    pub const ALL: [Platform; 3] = [Platform::Twitter, Platform::Nunl, Platform::Reddit];

    pub fn as_str(self) -> &'static str {
        match self {
            Platform::Twitter => "twitter",
            Platform::Nunl => "nunl",
            Platform::Reddit => "reddit",
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Platform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "twitter" => Ok(Platform::Twitter),
            "nunl" | "nu.nl" => Ok(Platform::Nunl),
            "reddit" => Ok(Platform::Reddit),
            other => Err(format!("unknown platform {other:?}")),
        }
    }
}

/// One social-media post. Immutable once accepted by the reader.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub id: String,
    /// Second resolution, UTC.
    pub timestamp: DateTime<Utc>,
    pub text: String,
    /// Lowercase ISO-639-1 tag, or `"und"`.
    pub lang: String,
    pub platform: Platform,
    pub is_repost: bool,
}

pub const UNDETERMINED_LANG: &str = "und";

impl Message {
    /// Builds a message, normalising the language tag and truncating the
    /// timestamp to whole seconds. Returns `None` when the text is blank.
    pub fn new(
        id: impl Into<String>,
        timestamp: DateTime<Utc>,
        text: impl Into<String>,
        lang: &str,
        platform: Platform,
        is_repost: bool,
    ) -> Option<Message> {
        let text = text.into();
        if text.trim().is_empty() {
            return None;
        }
        let lang = lang.trim().to_ascii_lowercase();
        let lang = if lang.is_empty() {
            UNDETERMINED_LANG.to_string()
        } else {
            lang
        };
        let timestamp = Utc.timestamp_opt(timestamp.timestamp(), 0).single()?;
        Some(Message {
            id: id.into(),
            timestamp,
            text,
            lang,
            platform,
            is_repost,
        })
    }

    pub fn created_at(&self) -> String {
        self.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true)
    }
}

/// Parses ISO-8601 / RFC 3339 (with or without offset) or integer epoch seconds.
pub fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return None;
    }
    if let Ok(secs) = raw.parse::<i64>() {
        return Utc.timestamp_opt(secs, 0).single();
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M"] {
        if let Ok(naive) = chrono::NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(naive.and_utc());
        }
    }
    // Twitter API v1 style: "Thu Mar 12 15:00:00 +0000 2020"
    DateTime::parse_from_str(raw, "%a %b %d %H:%M:%S %z %Y")
        .ok()
        .map(|dt| dt.with_timezone(&Utc))
}
