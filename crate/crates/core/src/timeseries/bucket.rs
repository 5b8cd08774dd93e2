use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, Duration, FixedOffset, Months, NaiveDate, NaiveDateTime, Timelike, Utc};
use serde::{Deserialize, Serialize};

/// Width of a time bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Hour,
    Day,
    /// ISO week starting Monday.
    Week,
    Month,
}

impl Granularity {
    /// Start of the bucket containing `local`.
    pub fn floor(self, local: NaiveDateTime) -> NaiveDateTime {
        let date = local.date();
        match self {
            Granularity::Hour => date.and_hms_opt(local.hour(), 0, 0).expect("valid hour"),
            Granularity::Day => midnight(date),
            Granularity::Week => {
                midnight(date - Duration::days(date.weekday().num_days_from_monday() as i64))
            }
            Granularity::Month => midnight(date.with_day(1).expect("day 1 exists")),
        }
    }

    /// Start of the following bucket.
    pub fn next(self, key: NaiveDateTime) -> NaiveDateTime {
        match self {
            Granularity::Hour => key + Duration::hours(1),
            Granularity::Day => key + Duration::days(1),
            Granularity::Week => key + Duration::days(7),
            Granularity::Month => key + Months::new(1),
        }
    }

    pub fn format(self, key: NaiveDateTime) -> String {
        match self {
            Granularity::Hour => key.format("%Y-%m-%dT%H:00").to_string(),
            Granularity::Day | Granularity::Week => key.format("%Y-%m-%d").to_string(),
            Granularity::Month => key.format("%Y-%m").to_string(),
        }
    }
}

fn midnight(d: NaiveDate) -> NaiveDateTime {
    d.and_hms_opt(0, 0, 0).expect("midnight exists")
}

/// Parses a bucket label written by [`Granularity::format`], or a plain
/// ISO date.
pub fn parse_bucket(raw: &str) -> Option<NaiveDateTime> {
    let raw = raw.trim();
    for fmt in ["%Y-%m-%dT%H:%M", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(dt);
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return Some(midnight(d));
    }
    NaiveDate::parse_from_str(&format!("{raw}-01"), "%Y-%m-%d")
        .ok()
        .map(midnight)
}

/// Fixed UTC offset applied before bucketing. Defaults to +01:00.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TzOffset(FixedOffset);

impl TzOffset {
    pub fn from_seconds(secs: i32) -> Option<Self> {
        FixedOffset::east_opt(secs).map(TzOffset)
    }

    pub fn utc() -> Self {
        TzOffset(FixedOffset::east_opt(0).expect("zero offset"))
    }

    pub fn local(self, ts: DateTime<Utc>) -> NaiveDateTime {
        ts.with_timezone(&self.0).naive_local()
    }
}

impl Default for TzOffset {
    fn default() -> Self {
        TzOffset(FixedOffset::east_opt(3600).expect("one hour"))
    }
}

impl fmt::Display for TzOffset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for TzOffset {
    type Err = String;

    /// Accepts `Z`, `+HH`, `+HH:MM` and `+HHMM`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("z") || s.eq_ignore_ascii_case("utc") {
            return Ok(TzOffset::utc());
        }
        let bad = || format!("invalid UTC offset {s:?}; expected e.g. +01:00");
        let (sign, rest) = match s.as_bytes().first() {
            Some(b'+') => (1, &s[1..]),
            Some(b'-') => (-1, &s[1..]),
            _ => return Err(bad()),
        };
        let digits: String = rest.chars().filter(|c| *c != ':').collect();
        if !digits.chars().all(|c| c.is_ascii_digit()) || !(digits.len() == 2 || digits.len() == 4) {
            return Err(bad());
        }
        let hours: i32 = digits[..2].parse().map_err(|_| bad())?;
        let minutes: i32 = if digits.len() == 4 { digits[2..].parse().map_err(|_| bad())? } else { 0 };
        if hours > 23 || minutes > 59 {
            return Err(bad());
        }
        TzOffset::from_seconds(sign * (hours * 3600 + minutes * 60)).ok_or_else(bad)
    }
}
