//! Streams a small corpus through the bundled topic queries.
//!
//!     cargo run --example keyword_filter

use std::io::Cursor;

use opinion_pulse::corpus::{Format, MessageReader};
use opinion_pulse::filterkit::TopicQuery;

const CORPUS: &str = r#"{"id":"1","created_at":"2020-03-12T14:02:11Z","text":"Het RIVM meldt nieuwe cijfers","lang":"nl","platform":"twitter"}
{"id":"2","created_at":"2020-03-12T15:30:00Z","text":"Lekker weer om te fietsen","lang":"nl","platform":"twitter"}
{"id":"3","created_at":"2020-04-02T09:00:00Z","text":"Hou toch eens anderhalve meter afstand!","lang":"nl","platform":"nunl"}
not even json
{"id":"4","created_at":1584100800,"text":"Blijf 1,5m van elkaar #blijfthuis","lang":"nl","platform":"reddit"}
"#;

fn main() -> opinion_pulse::Result<()> {
    for query in [TopicQuery::table2(), TopicQuery::social_distancing()] {
        let mut reader = MessageReader::new(Cursor::new(CORPUS), Format::Jsonl, "inline");
        println!("query {}:", query.name());
        for m in reader.by_ref().filter(|m| query.matches(&m.text)) {
            println!("  {} {}  {}", m.platform.as_str(), m.created_at(), m.text);
        }
        for r in reader.diagnostics() {
            println!("  skipped line {}: {}", r.line, r.reason);
        }
        let stats = reader.finish()?;
        println!("  read {} messages, rejected {}", stats.total, stats.rejected);
    }
    Ok(())
}
