//! Message corpora: ingest, language filtering, deduplication and sampling.
//!
//! Everything here works on iterators so a month-scale dump can be streamed
//! through the pipeline without being held in memory. Only [`sample`] needs
//! the whole population.

mod ingest;
mod message;

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use ingest::{write_jsonl, CorpusStats, Format, MessageReader, Rejection};
pub use message::{parse_timestamp, Message, Platform, UNDETERMINED_LANG};

use crate::error::{Error, Result};

/// Decides whether a message tagged `"und"` should be kept.
pub type UndeterminedPredicate = Box<dyn Fn(&Message) -> bool + Send + Sync>;

/// Keeps messages whose language tag equals `keep`. Messages without a
/// determined language go through a pluggable predicate, which retains them
/// by default.
pub struct LangFilter {
    keep: String,
    undetermined: UndeterminedPredicate,
}

impl LangFilter {
    pub fn new(keep: &str) -> Self {
        LangFilter {
            keep: keep.trim().to_ascii_lowercase(),
            undetermined: Box::new(|_| true),
        }
    }

    pub fn with_undetermined(mut self, pred: UndeterminedPredicate) -> Self {
        self.undetermined = pred;
        self
    }

    pub fn accepts(&self, msg: &Message) -> bool {
        if msg.lang == self.keep {
            true
        } else if msg.lang == UNDETERMINED_LANG {
            (self.undetermined)(msg)
        } else {
            false
        }
    }
}

/// Lazy language filter over a message stream.
pub fn filter_lang<'a, I>(msgs: I, filter: &'a LangFilter) -> impl Iterator<Item = Message> + 'a
where
    I: IntoIterator<Item = Message>,
    I::IntoIter: 'a,
{
    msgs.into_iter().filter(move |m| filter.accepts(m))
}

const DUTCH_MARKERS: &[&str] = &[
    "de", "het", "een", "en", "van", "ik", "je", "niet", "dat", "is", "op", "te", "zijn", "met",
    "voor", "maar", "wat", "ook", "nog", "wel", "geen", "naar", "hij", "ze", "dit", "er",
];
const ENGLISH_MARKERS: &[&str] = &[
    "the", "and", "of", "to", "is", "you", "that", "it", "not", "for", "with", "but", "what",
    "this", "are", "was", "have", "they", "be", "at", "on",
];

/// Cheap stopword vote between Dutch and English, usable as an
/// undetermined-language predicate. Ties (including no evidence) count as
/// Dutch.
pub fn looks_dutch(text: &str) -> bool {
    let (mut nl, mut en) = (0usize, 0usize);
    for tok in crate::tokenize::tokens(text) {
        nl += DUTCH_MARKERS.contains(&tok.as_str()) as usize;
        en += ENGLISH_MARKERS.contains(&tok.as_str()) as usize;
    }
    nl >= en
}

/// Identity used when dropping duplicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DedupMode {
    /// (platform, id)
    ById,
    /// byte-exact trimmed text
    ByExactText,
}

/// Drops repeated messages; the first occurrence wins and order is kept.
pub fn dedup<I>(msgs: I, mode: DedupMode) -> impl Iterator<Item = Message>
where
    I: IntoIterator<Item = Message>,
{
    let mut seen_ids: HashSet<(Platform, String)> = HashSet::new();
    let mut seen_texts: HashSet<String> = HashSet::new();
    msgs.into_iter().filter(move |m| match mode {
        DedupMode::ById => seen_ids.insert((m.platform, m.id.clone())),
        DedupMode::ByExactText => seen_texts.insert(m.text.trim().to_string()),
    })
}

/// How many items to draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSpec {
    /// Each item kept independently with this probability, in (0, 1].
    Rate(f64),
    /// Exactly this many items, uniformly without replacement.
    Count(usize),
}

/// Uniform sample without replacement. Output keeps input order and is a
/// pure function of `(items, spec, seed)`.
pub fn sample<T>(items: Vec<T>, spec: SampleSpec, seed: u64) -> Result<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec {
        SampleSpec::Rate(rate) => {
            if !(rate > 0.0 && rate <= 1.0) {
                return Err(Error::SampleRate(rate));
            }
            Ok(items.into_iter().filter(|_| rng.gen::<f64>() < rate).collect())
        }
        SampleSpec::Count(n) => {
            if n > items.len() {
                return Err(Error::SampleTooLarge {
                    requested: n,
                    population: items.len(),
                });
            }
            let mut picked = rand::seq::index::sample(&mut rng, items.len(), n).into_vec();
            picked.sort_unstable();
            let mut picked = picked.into_iter().peekable();
            Ok(items
                .into_iter()
                .enumerate()
                .filter_map(|(i, item)| {
                    if picked.peek() == Some(&i) {
                        picked.next();
                        Some(item)
                    } else {
                        None
                    }
                })
                .collect())
        }
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use chrono::{TimeZone, Utc};

    pub fn msg(id: &str, text: &str, lang: &str) -> Message {
        let ts = Utc.with_ymd_and_hms(2020, 3, 12, 15, 0, 0).unwrap();
        Message::new(id, ts, text, lang, Platform::Twitter, false).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::msg;
    use super::*;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    #[test]
    fn lang_tag_match() {
        let f = LangFilter::new("nl");
        let msgs = vec![msg("1", "a", "nl"), msg("2", "b", "en"), msg("3", "c", "nl")];
        assert_eq!(msgs.iter().filter(|m| f.accepts(m)).count(), 2);
    }

    #[test]
    fn undetermined_default_and_hook() {
        let m = msg("1", "the cat is on the mat", "und");
        assert!(LangFilter::new("nl").accepts(&m));
        let strict = LangFilter::new("nl").with_undetermined(Box::new(|m| looks_dutch(&m.text)));
        assert!(!strict.accepts(&m));
        assert!(strict.accepts(&msg("2", "ik ben het er niet mee eens", "und")));
    }

    #[test]
    fn ten_percent_english_excluded() {
        let mut msgs: Vec<_> = (0..10).map(|i| msg(&format!("e{i}"), "x", "en")).collect();
        msgs.extend((0..90).map(|i| msg(&format!("n{i}"), "x", "nl")));
        let f = LangFilter::new("nl");
        let kept: Vec<_> = filter_lang(msgs, &f).collect();
        assert_eq!(kept.len(), 90);
    }

    #[test]
    fn dedup_by_id_and_text() {
        let a = vec![msg("1", "x", "nl"), msg("1", "y", "nl")];
        assert_eq!(dedup(a, DedupMode::ById).count(), 1);
        let b = vec![msg("1", "RT abc", "nl"), msg("2", "RT abc", "nl")];
        let kept: Vec<_> = dedup(b, DedupMode::ByExactText).collect();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "1");
    }

    #[test]
    fn same_id_different_platform_kept() {
        let mut b = msg("1", "x", "nl");
        b.platform = Platform::Reddit;
        assert_eq!(dedup(vec![msg("1", "x", "nl"), b], DedupMode::ById).count(), 2);
    }

    #[test]
    fn dedup_twenty_duplicates() {
        let mut msgs: Vec<_> = (0..80).map(|i| msg(&i.to_string(), &format!("text {i}"), "nl")).collect();
        for i in 0..20 {
            msgs.push(msg(&format!("d{i}"), &format!(" text {} ", i * 3), "nl"));
        }
        assert_eq!(dedup(msgs, DedupMode::ByExactText).count(), 80);
    }

    #[test]
    fn sample_identity_and_determinism() {
        let items: Vec<u32> = (0..1000).collect();
        assert_eq!(sample(items.clone(), SampleSpec::Rate(1.0), 3).unwrap(), items);
        let ten: Vec<u32> = (0..10).collect();
        let a = sample(ten.clone(), SampleSpec::Count(3), 7).unwrap();
        let b = sample(ten.clone(), SampleSpec::Count(3), 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sample_errors() {
        let err = sample(vec![1, 2, 3], SampleSpec::Count(5), 1).unwrap_err();
        let text = err.to_string();
        assert!(text.contains('5') && text.contains('3'), "{text}");
        assert!(sample(vec![1], SampleSpec::Rate(0.0), 1).is_err());
        assert!(sample(vec![1], SampleSpec::Rate(1.5), 1).is_err());
    }

    #[test]
    fn sample_sizes_follow_binomial() {
        let n = 2000usize;
        let rate = 0.01;
        let seeds = 400u64;
        let total: usize = (0..seeds)
            .map(|s| sample((0..n).collect::<Vec<_>>(), SampleSpec::Rate(rate), s).unwrap().len())
            .sum();
        let mean = total as f64 / seeds as f64;
        let expected = rate * n as f64;
        // standard error of the mean of `seeds` binomial draws
        let se = (n as f64 * rate * (1.0 - rate) / seeds as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * se, "mean {mean} vs {expected}");
    }

    #[test]
    fn one_percent_of_large_query() {
        let n = 670_249usize;
        let got = sample((0..n).collect::<Vec<_>>(), SampleSpec::Rate(0.01), 42).unwrap().len();
        let sd = (n as f64 * 0.01 * 0.99).sqrt();
        assert!((got as f64 - 6702.49).abs() < 3.0 * sd, "{got}");
    }

    fn arb_message() -> impl Strategy<Value = Message> {
        (
            "[a-z0-9]{1,8}",
            0i64..2_000_000_000,
            "[a-zA-Z0-9 #@\"\\\\é😀\t]{0,20}[a-z]",
            prop_oneof![Just("nl"), Just("en"), Just("und")],
            prop_oneof![Just(Platform::Twitter), Just(Platform::Nunl), Just(Platform::Reddit)],
            any::<bool>(),
        )
            .prop_map(|(id, secs, text, lang, platform, rt)| {
                let ts = Utc.timestamp_opt(secs, 0).unwrap();
                Message::new(id, ts, text, lang, platform, rt).unwrap()
            })
    }

    proptest! {
        #[test]
        fn jsonl_round_trip(msgs in proptest::collection::vec(arb_message(), 0..20)) {
            let mut buf = Vec::new();
            for m in &msgs {
                write_jsonl(&mut buf, m).unwrap();
            }
            let back: Vec<_> = MessageReader::new(&buf[..], Format::Jsonl, "mem").collect();
            prop_assert_eq!(back, msgs);
        }

        #[test]
        fn dedup_idempotent(msgs in proptest::collection::vec(arb_message(), 0..30),
                            by_text in any::<bool>()) {
            let mode = if by_text { DedupMode::ByExactText } else { DedupMode::ById };
            let once: Vec<_> = dedup(msgs, mode).collect();
            let twice: Vec<_> = dedup(once.clone(), mode).collect();
            prop_assert_eq!(once, twice);
        }
    }
}
