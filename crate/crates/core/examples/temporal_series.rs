//! Daily frequencies with a 7-day moving average, an hourly sentiment
//! drill-down, event markers and a correlation between two series.
//!
//!     cargo run --example temporal_series

use std::path::Path;

use chrono::{Duration, TimeZone, Utc};
use opinion_pulse::polarity::PolarityScore;
use opinion_pulse::timeseries::{
    annotate_events, correlate, frequency_series, load_events, moving_average, sentiment_series, Alignment,
    Bucketer, Granularity, ScoreFilter, TzOffset,
};

fn main() -> opinion_pulse::Result<()> {
    let start = Utc.with_ymd_and_hms(2020, 3, 1, 0, 0, 0).unwrap();
    let stamps: Vec<_> = (0..5000i64)
        .map(|i| start + Duration::minutes((i * i) % (30 * 24 * 60)))
        .collect();
    let daily = frequency_series(stamps.iter().copied(), Bucketer::new(Granularity::Day, TzOffset::default()));
    let ma = moving_average(&daily, 7, Alignment::Trailing);
    for (p, m) in daily.points.iter().zip(&ma.points).take(10) {
        println!("{}  n={:<4} ma7={:>8.2}{}", daily.label(p), p.n, m.value, if m.partial { " (partial)" } else { "" });
    }

    let day = Utc.with_ymd_and_hms(2020, 3, 12, 7, 0, 0).unwrap();
    let scored = (0..600i64).map(|i| {
        let ts = day + Duration::minutes(i);
        let v = if ts.timestamp() >= Utc.with_ymd_and_hms(2020, 3, 12, 14, 0, 0).unwrap().timestamp() { -0.3 } else { 0.2 };
        (ts, PolarityScore::from_parts(v, 1))
    });
    let hourly = sentiment_series(scored, Bucketer::new(Granularity::Hour, TzOffset::default()), ScoreFilter::All);
    for p in &hourly.points {
        println!("{}  mean={:>5.2} n={}", hourly.label(p), p.value, p.n);
    }

    let events = load_events(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/events/press_conferences_2020.json"))?;
    let ann = annotate_events(&daily, &events);
    println!("{} events on the series, {} outside it", ann.markers.len(), ann.out_of_range.len());

    let c = correlate(&daily, &ma)?;
    println!("daily counts vs their moving average: r={:.3} over {} days", c.r, c.n_overlap);
    Ok(())
}
