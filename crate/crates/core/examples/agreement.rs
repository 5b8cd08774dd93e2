//! Draws an annotation sample and measures agreement between two
//! (simulated) annotators.
//!
//!     cargo run --example agreement

use chrono::{Duration, TimeZone, Utc};
use opinion_pulse::corpus::{Message, Platform, SampleSpec};
use opinion_pulse::filterkit::TopicQuery;
use opinion_pulse::stance::{kappa, prepare_annotation_set, write_annotation_template, Label};

fn main() -> opinion_pulse::Result<()> {
    let start = Utc.with_ymd_and_hms(2020, 6, 1, 0, 0, 0).unwrap();
    let texts = ["mondkapje verplicht, prima", "mondkapje is onzin", "weer een mondkapje vergeten", "zonnig weekend"];
    let msgs: Vec<Message> = (0..40)
        .filter_map(|i| {
            let text = format!("{} {}", texts[i % 4], i / 4);
            Message::new(i.to_string(), start + Duration::hours(i as i64), text, "nl", Platform::Twitter, false)
        })
        .collect();
    let sample = prepare_annotation_set(msgs, &TopicQuery::from_keywords("mondkapje", ["mondkapje"])?, SampleSpec::Count(8), 42)?;
    let mut template = Vec::new();
    write_annotation_template(&mut template, &sample)?;
    print!("{}", String::from_utf8_lossy(&template));

    use Label::{Other as O, Rejects as R, Supports as S};
    let first = [S, R, O, S, S, R, O, S];
    let second = [S, R, O, S, R, R, S, S];
    let k = kappa(&first, &second)?;
    println!(
        "observed {:.3}, expected {:.3}, kappa {:.3}",
        k.observed_agreement, k.expected_agreement, k.kappa
    );
    Ok(())
}
