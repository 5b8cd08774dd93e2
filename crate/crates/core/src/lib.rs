//! Opinion monitoring over social media corpora: topic filtering with query
//! expansion, lexicon polarity, stance classification and time series.
//!
//! The modules compose as a pipeline. [`corpus`] streams messages from
//! JSONL or TSV dumps, [`filterkit`] selects the topical subset,
//! [`polarity`] and [`stance`] score it, and [`timeseries`] aggregates the
//! scores over time.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod filterkit;
pub mod polarity;
pub mod stance;
pub mod synthetic;
pub mod timeseries;
pub mod tokenize;

pub use error::{Error, Result};
