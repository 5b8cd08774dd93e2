//! Topic selection: keyword and regex queries, corpus splitting, and
//! t-score driven query expansion.

mod query;
mod tscore;

use serde::{Deserialize, Serialize};

pub use query::{Combine, TopicQuery};
pub use tscore::{
    t_score, tscore_rank, tscore_rank_excluding, CollocationStats, TokenCounts, DEFAULT_MIN_COUNT,
    DEFAULT_TOP_K,
};

use crate::corpus::Message;
use crate::error::Result;

/// Both halves of a corpus partition.
#[derive(Debug, Default, Clone)]
pub struct Split {
    pub matched: Vec<Message>,
    pub unmatched: Vec<Message>,
}

/// Partitions messages by `query`; every input lands in exactly one side.
pub fn split_corpus(msgs: impl IntoIterator<Item = Message>, query: &TopicQuery) -> Split {
    let mut split = Split::default();
    for m in msgs {
        if query.matches(&m.text) {
            split.matched.push(m);
        } else {
            split.unmatched.push(m);
        }
    }
    split
}

/// Token counts of the matched and unmatched sides without materialising
/// the partition.
pub fn split_counts<'a>(
    msgs: impl IntoIterator<Item = &'a Message>,
    query: &TopicQuery,
) -> (TokenCounts, TokenCounts, usize) {
    let mut matched = TokenCounts::new();
    let mut unmatched = TokenCounts::new();
    let mut n_matched = 0;
    for m in msgs {
        if query.matches(&m.text) {
            matched.add_text(&m.text);
            n_matched += 1;
        } else {
            unmatched.add_text(&m.text);
        }
    }
    (matched, unmatched, n_matched)
}

/// Candidate terms surfaced in one expansion round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRound {
    pub round: usize,
    pub query_keywords: Vec<String>,
    pub matched_messages: usize,
    pub candidates: Vec<CollocationStats>,
}

#[derive(Debug, Clone, Copy)]
pub struct ExpansionParams {
    pub rounds: usize,
    pub top_k: usize,
    pub min_count: u64,
}

impl Default for ExpansionParams {
    fn default() -> Self {
        ExpansionParams {
            rounds: 1,
            top_k: DEFAULT_TOP_K,
            min_count: DEFAULT_MIN_COUNT,
        }
    }
}

/// Runs `rounds` expansion rounds and reports the candidates of each. The
/// query is never changed; see [`expand_query_reviewed`] for a reviewer
/// that may accept terms between rounds.
pub fn expand_query(
    query: &TopicQuery,
    msgs: &[Message],
    params: ExpansionParams,
) -> Result<Vec<ExpansionRound>> {
    expand_query_reviewed(query, msgs, params, |_| Vec::new())
}

/// Like [`expand_query`], but after each round `review` receives the
/// candidates and returns the terms a reviewer accepted; they are added as
/// keywords before the next round.
pub fn expand_query_reviewed(
    query: &TopicQuery,
    msgs: &[Message],
    params: ExpansionParams,
    mut review: impl FnMut(&ExpansionRound) -> Vec<String>,
) -> Result<Vec<ExpansionRound>> {
    let mut current = query.clone();
    let mut report = Vec::with_capacity(params.rounds);
    for round in 1..=params.rounds.max(1) {
        let (matched, unmatched, matched_messages) = split_counts(msgs, &current);
        let candidates = tscore_rank_excluding(
            &matched,
            &unmatched,
            params.min_count,
            params.top_k,
            |tok| current.keywords().contains(tok) || current.matches(tok),
        )?;
        let entry = ExpansionRound {
            round,
            query_keywords: current.keywords().iter().cloned().collect(),
            matched_messages,
            candidates,
        };
        let accepted = review(&entry);
        report.push(entry);
        if !accepted.is_empty() {
            current = current.with_keywords(accepted)?;
        }
    }
    Ok(report)
}
