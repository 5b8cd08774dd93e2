use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenize::tokens;

/// Token frequencies of one side of a corpus split.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TokenCounts {
    counts: HashMap<String, u64>,
    total: u64,
}

impl TokenCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_texts<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut counts = Self::new();
        for text in texts {
            counts.add_text(text);
        }
        counts
    }

    /// Counts in parallel over `texts` and merges the partial tables.
    pub fn from_texts_par<S: AsRef<str> + Sync>(texts: &[S]) -> Self {
        texts
            .par_iter()
            .fold(TokenCounts::new, |mut acc, t| {
                acc.add_text(t.as_ref());
                acc
            })
            .reduce(TokenCounts::new, |mut a, b| {
                a.merge(b);
                a
            })
    }

    pub fn add_text(&mut self, text: &str) {
        for tok in tokens(text) {
            self.add_token(tok, 1);
        }
    }

    pub fn add_token(&mut self, token: impl Into<String>, count: u64) {
        *self.counts.entry(token.into()).or_default() += count;
        self.total += count;
    }

    pub fn merge(&mut self, other: TokenCounts) {
        for (tok, n) in other.counts {
            *self.counts.entry(tok).or_default() += n;
        }
        self.total += other.total;
    }

    pub fn get(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    /// Total number of tokens.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Frequency comparison of one token between the matched and unmatched
/// sides of a split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollocationStats {
    pub token: String,
    pub count_matched: u64,
    pub count_unmatched: u64,
    pub n_matched: u64,
    pub n_unmatched: u64,
    pub t: f64,
}

/// Difference-of-proportions t-score:
/// `(p1 - p2) / sqrt(p1/n1 + p2/n2)` with `p1 = c1/n1`, `p2 = c2/n2`.
/// Zero when both counts are zero.
pub fn t_score(count_matched: u64, n_matched: u64, count_unmatched: u64, n_unmatched: u64) -> f64 {
    let (n1, n2) = (n_matched as f64, n_unmatched as f64);
    let p1 = count_matched as f64 / n1;
    let p2 = count_unmatched as f64 / n2;
    let var = p1 / n1 + p2 / n2;
    if var == 0.0 {
        0.0
    } else {
        (p1 - p2) / var.sqrt()
    }
}

/// Defaults for ranking.
pub const DEFAULT_MIN_COUNT: u64 = 5;
pub const DEFAULT_TOP_K: usize = 20;

/// Ranks tokens over-represented in `matched`. Only tokens seen at least
/// `min_count` times on the matched side are scored. Sorted by `t`
/// descending, then `count_matched` descending, then token.
pub fn tscore_rank(
    matched: &TokenCounts,
    unmatched: &TokenCounts,
    min_count: u64,
    top_k: usize,
) -> Result<Vec<CollocationStats>> {
    tscore_rank_excluding(matched, unmatched, min_count, top_k, |_| false)
}

/// [`tscore_rank`] skipping every token for which `exclude` returns true.
pub fn tscore_rank_excluding(
    matched: &TokenCounts,
    unmatched: &TokenCounts,
    min_count: u64,
    top_k: usize,
    exclude: impl Fn(&str) -> bool,
) -> Result<Vec<CollocationStats>> {
    if matched.total() == 0 {
        return Err(Error::NoMatchedTokens);
    }
    if unmatched.total() == 0 {
        return Err(Error::NoUnmatchedTokens);
    }
    let (n1, n2) = (matched.total(), unmatched.total());
    let mut ranked: Vec<CollocationStats> = matched
        .iter()
        .filter(|&(tok, c)| c >= min_count && c > 0 && !exclude(tok))
        .map(|(tok, c1)| {
            let c2 = unmatched.get(tok);
            CollocationStats {
                token: tok.to_string(),
                count_matched: c1,
                count_unmatched: c2,
                n_matched: n1,
                n_unmatched: n2,
                t: t_score(c1, n1, c2, n2),
            }
        })
        .collect();
    ranked.sort_by(rank_order);
    ranked.truncate(top_k);
    Ok(ranked)
}

fn rank_order(a: &CollocationStats, b: &CollocationStats) -> Ordering {
    b.t.total_cmp(&a.t)
        .then_with(|| b.count_matched.cmp(&a.count_matched))
        .then_with(|| a.token.cmp(&b.token))
}
