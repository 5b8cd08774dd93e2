//! Surfaces candidate keywords for a seed query by t-score, with a
//! reviewer that accepts one term after the first round.
//!
//!     cargo run --example query_expansion

use chrono::{Duration, TimeZone, Utc};
use opinion_pulse::corpus::{Message, Platform};
use opinion_pulse::filterkit::{expand_query_reviewed, ExpansionParams, TopicQuery};

fn main() -> opinion_pulse::Result<()> {
    let start = Utc.with_ymd_and_hms(2020, 4, 1, 8, 0, 0).unwrap();
    let on_topic = ["afstand meter supermarkt", "afstand houden meter", "meter afstand trein", "anderhalve meter afstand"];
    let off_topic = ["lekker weer vandaag", "trein weer vertraagd", "supermarkt was druk", "fiets kapot"];
    let msgs: Vec<Message> = (0..400)
        .map(|i| {
            let text = if i % 3 == 0 { on_topic[i % 4] } else { off_topic[i % 4] };
            Message::new(i.to_string(), start + Duration::minutes(i as i64), text, "nl", Platform::Twitter, false)
                .expect("non-empty text")
        })
        .collect();

    let seed = TopicQuery::from_keywords("afstand", ["afstand"])?;
    let params = ExpansionParams { rounds: 2, top_k: 5, min_count: 5 };
    let rounds = expand_query_reviewed(&seed, &msgs, params, |round| {
        if round.round == 1 {
            vec!["meter".to_string()]
        } else {
            Vec::new()
        }
    })?;
    for r in &rounds {
        println!("round {} keywords={:?} matched={}", r.round, r.query_keywords, r.matched_messages);
        for c in &r.candidates {
            println!("  {:<12} t={:>7.3}  {}/{} vs {}/{}", c.token, c.t, c.count_matched, c.n_matched, c.count_unmatched, c.n_unmatched);
        }
    }
    Ok(())
}
