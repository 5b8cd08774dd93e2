use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How keywords and the regex combine into one predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combine {
    KeywordsOnly,
    RegexOnly,
    KeywordsOrRegex,
}

/// On-disk form of a query.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct QuerySpec {
    name: String,
    #[serde(default)]
    keywords: Vec<String>,
    #[serde(default)]
    regex: Option<String>,
    #[serde(default)]
    combine: Option<Combine>,
}

/// A named topic selector: case-insensitive substring keywords, an optional
/// regex over case-folded text, or both.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "QuerySpec", into = "QuerySpec")]
pub struct TopicQuery {
    name: String,
    keywords: BTreeSet<String>,
    pattern: Option<String>,
    compiled: Option<Regex>,
    combine: Combine,
}

impl TopicQuery {
    /// Validates and compiles a query. An invalid regex fails here, never at
    /// match time.
    pub fn new<S: AsRef<str>>(
        name: impl Into<String>,
        keywords: impl IntoIterator<Item = S>,
        regex: Option<&str>,
        combine: Option<Combine>,
    ) -> Result<Self> {
        let name = name.into();
        let keywords: BTreeSet<String> = keywords
            .into_iter()
            .map(|k| k.as_ref().trim().to_lowercase())
            .filter(|k| !k.is_empty())
            .collect();
        let pattern = regex.map(str::to_string).filter(|p| !p.is_empty());
        let err = |message: String| Error::Query {
            name: name.clone(),
            message,
        };
        let combine = match combine {
            Some(c) => c,
            None => match (keywords.is_empty(), pattern.is_some()) {
                (false, true) => Combine::KeywordsOrRegex,
                (false, false) => Combine::KeywordsOnly,
                (true, true) => Combine::RegexOnly,
                (true, false) => return Err(err("needs keywords or a regex".into())),
            },
        };
        match combine {
            Combine::KeywordsOnly if keywords.is_empty() => {
                return Err(err("keywords_only query without keywords".into()))
            }
            Combine::RegexOnly if pattern.is_none() => {
                return Err(err("regex_only query without a regex".into()))
            }
            Combine::KeywordsOrRegex if keywords.is_empty() || pattern.is_none() => {
                return Err(err("keywords_or_regex needs both keywords and a regex".into()))
            }
            _ => {}
        }
        let compiled = pattern
            .as_deref()
            .map(|p| {
                RegexBuilder::new(p)
                    .case_insensitive(true)
                    .build()
                    .map_err(|e| err(format!("invalid regex: {e}")))
            })
            .transpose()?;
        Ok(TopicQuery {
            name,
            keywords,
            pattern,
            compiled,
            combine,
        })
    }

    pub fn from_keywords<S: AsRef<str>>(
        name: impl Into<String>,
        keywords: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        Self::new(name, keywords, None, Some(Combine::KeywordsOnly))
    }

    pub fn from_regex(name: impl Into<String>, pattern: &str) -> Result<Self> {
        Self::new(name, Vec::<String>::new(), Some(pattern), Some(Combine::RegexOnly))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&raw)?)
    }

    /// The eight COVID-19 filter keywords.
    pub fn table2() -> Self {
        serde_json::from_str(include_str!("../../data/queries/table2.json"))
            .expect("bundled query is valid")
    }

    /// The social-distancing regex query.
    pub fn social_distancing() -> Self {
        serde_json::from_str(include_str!("../../data/queries/socialdistancing.json"))
            .expect("bundled query is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn keywords(&self) -> &BTreeSet<String> {
        &self.keywords
    }

    pub fn pattern(&self) -> Option<&str> {
        self.pattern.as_deref()
    }

    pub fn combine(&self) -> Combine {
        self.combine
    }

    /// Returns a copy with extra keywords. A keywords-only or regex-only
    /// query widens to the combined form as needed.
    pub fn with_keywords<S: AsRef<str>>(&self, extra: impl IntoIterator<Item = S>) -> Result<Self> {
        let keywords: Vec<String> = self
            .keywords
            .iter()
            .cloned()
            .chain(extra.into_iter().map(|s| s.as_ref().to_string()))
            .collect();
        Self::new(self.name.clone(), keywords, self.pattern.as_deref(), None)
    }

    /// True iff some keyword occurs in `text`, ignoring case, with no
    /// word-boundary requirement.
    pub fn keyword_match(&self, text: &str) -> bool {
        self.keyword_match_folded(&text.to_lowercase())
    }

    /// True iff the regex matches anywhere in the case-folded text.
    pub fn regex_match(&self, text: &str) -> bool {
        self.regex_match_folded(&text.to_lowercase())
    }

    /// The combined predicate.
    pub fn matches(&self, text: &str) -> bool {
        let folded = text.to_lowercase();
        match self.combine {
            Combine::KeywordsOnly => self.keyword_match_folded(&folded),
            Combine::RegexOnly => self.regex_match_folded(&folded),
            Combine::KeywordsOrRegex => {
                self.keyword_match_folded(&folded) || self.regex_match_folded(&folded)
            }
        }
    }

    fn keyword_match_folded(&self, folded: &str) -> bool {
        self.keywords.iter().any(|k| folded.contains(k.as_str()))
    }

    fn regex_match_folded(&self, folded: &str) -> bool {
        self.compiled.as_ref().is_some_and(|re| re.is_match(folded))
    }
}

impl TryFrom<QuerySpec> for TopicQuery {
    type Error = Error;

    fn try_from(spec: QuerySpec) -> Result<Self> {
        TopicQuery::new(spec.name, spec.keywords, spec.regex.as_deref(), spec.combine)
    }
}

impl From<TopicQuery> for QuerySpec {
    fn from(q: TopicQuery) -> Self {
        QuerySpec {
            name: q.name,
            keywords: q.keywords.into_iter().collect(),
            regex: q.pattern,
            combine: Some(q.combine),
        }
    }
}
