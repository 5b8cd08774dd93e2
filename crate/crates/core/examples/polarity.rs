//! Lexicon polarity for a few messages and a corpus summary.
//!
//!     cargo run --example polarity

use std::path::Path;

use chrono::{TimeZone, Utc};
use opinion_pulse::corpus::{Message, Platform};
use opinion_pulse::polarity::{score_stream, PolarityLexicon};

fn main() -> opinion_pulse::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/lexicon/toy_nl.tsv");
    let lexicon = PolarityLexicon::load(&path)?;
    println!("{}: {} words, {} emoji", lexicon.name(), lexicon.word_count(), lexicon.emoji_count());

    let ts = Utc.with_ymd_and_hms(2020, 3, 15, 12, 0, 0).unwrap();
    let texts = ["Wat een mooie dag :)", "slecht nieuws, echt verschrikkelijk", "de trein vertrekt om 9 uur", "goed gedaan ❤️"];
    let msgs = texts
        .iter()
        .enumerate()
        .filter_map(|(i, t)| Message::new(i.to_string(), ts, *t, "nl", Platform::Twitter, false));
    let mut stream = score_stream(&lexicon, msgs);
    for (msg, score) in stream.by_ref() {
        println!("{:>6.3} ({} hits)  {}", score.value, score.hits, msg.text);
    }
    let summary = stream.summary().report();
    println!(
        "mean {:.3}, mean over nonzero {:.3}, nonzero share {:.2}",
        summary.mean, summary.mean_nonzero, summary.nonzero_fraction
    );
    Ok(())
}
