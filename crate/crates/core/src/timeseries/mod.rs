//! Temporal aggregation: message frequencies, mean polarity and stance
//! rates per bucket, moving averages, Pearson correlation and event
//! markers.
//!
//! Timestamps are stored in UTC; bucketing first shifts them by a fixed
//! offset. Frequency series fill gaps with zero counts, value series omit
//! empty buckets. All per-bucket accumulators merge associatively, so
//! shards can be aggregated separately.

mod bucket;
mod io;

use std::collections::BTreeMap;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

pub use bucket::{parse_bucket, Granularity, TzOffset};
pub use io::{
    load_events, load_external_series, parse_external_series, read_series_csv, write_frequency_csv,
    write_sentiment_csv, write_stance_csv,
};

use crate::error::{Error, Result};
use crate::polarity::PolarityScore;
use crate::stance::{Label, NUM_LABELS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub bucket: NaiveDateTime,
    pub value: f64,
    /// Contributing messages.
    pub n: u64,
    /// Set by [`moving_average`] on points whose window was truncated.
    #[serde(default)]
    pub partial: bool,
}

/// Points with strictly increasing buckets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub granularity: Granularity,
    pub points: Vec<SeriesPoint>,
}

impl Series {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn label(&self, p: &SeriesPoint) -> String {
        self.granularity.format(p.bucket)
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn total_n(&self) -> u64 {
        self.points.iter().map(|p| p.n).sum()
    }
}

/// Assigns UTC instants to buckets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bucketer {
    pub granularity: Granularity,
    pub offset: TzOffset,
}

impl Bucketer {
    pub fn new(granularity: Granularity, offset: TzOffset) -> Self {
        Bucketer { granularity, offset }
    }

    pub fn key(&self, ts: DateTime<Utc>) -> NaiveDateTime {
        self.granularity.floor(self.offset.local(ts))
    }
}

/// Per-bucket message counts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BucketCounts(BTreeMap<NaiveDateTime, u64>);

impl BucketCounts {
    pub fn add(&mut self, key: NaiveDateTime) {
        *self.0.entry(key).or_default() += 1;
    }

    pub fn merge(&mut self, other: &BucketCounts) {
        for (k, n) in &other.0 {
            *self.0.entry(*k).or_default() += n;
        }
    }

    /// Series spanning first to last bucket with zero-filled gaps.
    pub fn into_series(self, granularity: Granularity) -> Series {
        let mut points = Vec::new();
        if let (Some(&first), Some(&last)) = (self.0.keys().next(), self.0.keys().next_back()) {
            let mut key = first;
            while key <= last {
                let n = self.0.get(&key).copied().unwrap_or(0);
                points.push(SeriesPoint {
                    bucket: key,
                    value: n as f64,
                    n,
                    partial: false,
                });
                key = granularity.next(key);
            }
        }
        Series { granularity, points }
    }
}

/// Message count per bucket, gaps filled with zero.
pub fn frequency_series(
    timestamps: impl IntoIterator<Item = DateTime<Utc>>,
    bucketer: Bucketer,
) -> Series {
    let mut counts = BucketCounts::default();
    for ts in timestamps {
        counts.add(bucketer.key(ts));
    }
    counts.into_series(bucketer.granularity)
}

/// Which scores enter a bucket mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreFilter {
    /// Every message, zero scores included.
    #[default]
    All,
    NonzeroOnly,
}

/// Per-bucket sums of polarity values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BucketMeans(BTreeMap<NaiveDateTime, (f64, u64)>);

impl BucketMeans {
    pub fn add(&mut self, key: NaiveDateTime, value: f64) {
        let e = self.0.entry(key).or_default();
        e.0 += value;
        e.1 += 1;
    }

    pub fn merge(&mut self, other: &BucketMeans) {
        for (k, (s, n)) in &other.0 {
            let e = self.0.entry(*k).or_default();
            e.0 += s;
            e.1 += n;
        }
    }

    pub fn into_series(self, granularity: Granularity) -> Series {
        let points = self
            .0
            .into_iter()
            .filter(|(_, (_, n))| *n > 0)
            .map(|(bucket, (sum, n))| SeriesPoint {
                bucket,
                value: sum / n as f64,
                n,
                partial: false,
            })
            .collect();
        Series { granularity, points }
    }
}

/// Mean polarity per bucket; empty buckets are omitted.
pub fn sentiment_series(
    scored: impl IntoIterator<Item = (DateTime<Utc>, PolarityScore)>,
    bucketer: Bucketer,
    filter: ScoreFilter,
) -> Series {
    let mut means = BucketMeans::default();
    for (ts, score) in scored {
        if filter == ScoreFilter::NonzeroOnly && score.is_zero {
            continue;
        }
        means.add(bucketer.key(ts), score.value);
    }
    means.into_series(bucketer.granularity)
}

/// Label proportions of one bucket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StanceRates {
    pub bucket: NaiveDateTime,
    pub support_rate: f64,
    pub reject_rate: f64,
    pub other_rate: f64,
    pub n: u64,
}

/// Label proportions per bucket; empty buckets are omitted.
pub fn stance_series(
    labeled: impl IntoIterator<Item = (DateTime<Utc>, Label)>,
    bucketer: Bucketer,
) -> Vec<StanceRates> {
    let mut counts: BTreeMap<NaiveDateTime, [u64; NUM_LABELS]> = BTreeMap::new();
    for (ts, label) in labeled {
        counts.entry(bucketer.key(ts)).or_default()[label.index()] += 1;
    }
    counts
        .into_iter()
        .map(|(bucket, c)| {
            let n: u64 = c.iter().sum();
            let rate = |k: usize| c[k] as f64 / n as f64;
            StanceRates {
                bucket,
                support_rate: rate(0),
                reject_rate: rate(1),
                other_rate: rate(2),
                n,
            }
        })
        .collect()
}

/// Window placement for [`moving_average`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// The point and the `window - 1` points before it.
    #[default]
    Trailing,
    /// `(window - 1) / 2` points before, the rest after.
    Centered,
}

/// Mean over a sliding window of points. Truncated windows at the edges are
/// averaged over the points available and flagged `partial`.
pub fn moving_average(series: &Series, window: usize, alignment: Alignment) -> Series {
    let window = window.max(1);
    let len = series.points.len();
    let (before, after) = match alignment {
        Alignment::Trailing => (window - 1, 0),
        Alignment::Centered => ((window - 1) / 2, window - 1 - (window - 1) / 2),
    };
    let points = (0..len)
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after).min(len - 1);
            let slice = &series.points[lo..=hi];
            let value = slice.iter().map(|p| p.value).sum::<f64>() / slice.len() as f64;
            SeriesPoint {
                value,
                partial: slice.len() < window,
                ..series.points[i]
            }
        })
        .collect();
    Series {
        granularity: series.granularity,
        points,
    }
}

/// Pearson correlation over shared buckets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub n_overlap: usize,
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateSeries("fewer than 2 overlapping points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateSeries("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson r over the intersection of both series' buckets.
pub fn correlate(a: &Series, b: &Series) -> Result<Correlation> {
    let lookup: BTreeMap<NaiveDateTime, f64> = b.points.iter().map(|p| (p.bucket, p.value)).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = a
        .points
        .iter()
        .filter_map(|p| lookup.get(&p.bucket).map(|&v| (p.value, v)))
        .unzip();
    Ok(Correlation {
        r: pearson(&xs, &ys)?,
        n_overlap: xs.len(),
    })
}

/// A dated annotation such as a press conference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub date: NaiveDate,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub bucket: String,
    pub date: NaiveDate,
    pub label: String,
    /// False when the bucket lies inside the range but has no point.
    pub has_point: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventAnnotations {
    pub markers: Vec<Marker>,
    pub out_of_range: Vec<Event>,
}

/// Attaches each event to its bucket. Events before the first or after the
/// last bucket are listed under `out_of_range`.
pub fn annotate_events(series: &Series, events: &[Event]) -> EventAnnotations {
    let g = series.granularity;
    let (first, last) = match (series.points.first(), series.points.last()) {
        (Some(f), Some(l)) => (f.bucket, l.bucket),
        _ => {
            return EventAnnotations {
                markers: Vec::new(),
                out_of_range: events.to_vec(),
            }
        }
    };
    let mut markers = Vec::new();
    let mut out_of_range = Vec::new();
    for ev in events {
        let key = g.floor(ev.date.and_hms_opt(0, 0, 0).expect("midnight"));
        if key < first || key > last {
            out_of_range.push(ev.clone());
            continue;
        }
        let has_point = series.points.binary_search_by(|p| p.bucket.cmp(&key)).is_ok();
        markers.push(Marker {
            bucket: g.format(key),
            date: ev.date,
            label: ev.label.clone(),
            has_point,
        });
    }
    EventAnnotations { markers, out_of_range }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, TimeZone};
    use proptest::prelude::*;

    fn utc(y: i32, m: u32, d: u32, h: u32, min: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, h, min, 0).unwrap()
    }

    fn day_bucketer() -> Bucketer {
        Bucketer::new(Granularity::Day, TzOffset::utc())
    }

    fn series_of(values: &[f64]) -> Series {
        let start = NaiveDate::from_ymd_opt(2020, 3, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        Series {
            granularity: Granularity::Day,
            points: values
                .iter()
                .enumerate()
                .map(|(i, &v)| SeriesPoint { bucket: start + Duration::days(i as i64), value: v, n: 1, partial: false })
                .collect(),
        }
    }

    #[test]
    fn frequency_gap_fill() {
        let ts = vec![utc(2020, 3, 1, 1, 0), utc(2020, 3, 1, 2, 0), utc(2020, 3, 1, 3, 0), utc(2020, 3, 3, 9, 0)];
        let s = frequency_series(ts, day_bucketer());
        let got: Vec<_> = s.points.iter().map(|p| (s.label(p), p.n)).collect();
        assert_eq!(got, vec![("2020-03-01".into(), 3), ("2020-03-02".into(), 0), ("2020-03-03".into(), 1)]);
        assert_eq!(s.points[1].value, 0.0);
        assert!(frequency_series(Vec::new(), day_bucketer()).is_empty());
    }

    #[test]
    fn hourly_boundary() {
        let b = Bucketer::new(Granularity::Hour, TzOffset::default());
        let s = frequency_series(vec![utc(2020, 3, 12, 13, 59), utc(2020, 3, 12, 14, 1)], b);
        assert_eq!(s.len(), 2);
        assert_eq!(s.label(&s.points[0]), "2020-03-12T14:00");
        assert_eq!(s.label(&s.points[1]), "2020-03-12T15:00");
    }

    #[test]
    fn sentiment_means() {
        let sc = |v: f64| PolarityScore::from_parts(v, usize::from(v != 0.0));
        let items = vec![
            (utc(2020, 3, 1, 1, 0), sc(0.6)),
            (utc(2020, 3, 1, 2, 0), sc(-0.7)),
            (utc(2020, 3, 1, 3, 0), sc(0.0)),
            (utc(2020, 3, 4, 3, 0), sc(0.2)),
        ];
        let s = sentiment_series(items.clone(), day_bucketer(), ScoreFilter::All);
        assert_eq!(s.len(), 2, "empty buckets omitted");
        assert!((s.points[0].value - (-0.1 / 3.0)).abs() < 1e-12);
        assert_eq!(s.points[0].n, 3);
        let nz = sentiment_series(items, day_bucketer(), ScoreFilter::NonzeroOnly);
        assert!((nz.points[0].value - (-0.05)).abs() < 1e-12);
        assert_eq!(nz.points[0].n, 2);
    }

    #[test]
    fn constant_scores() {
        let items: Vec<_> = (0..48).map(|h| (utc(2020, 3, 1, 0, 0) + Duration::hours(h), PolarityScore::from_parts(0.25, 1))).collect();
        let s = sentiment_series(items, Bucketer::new(Granularity::Hour, TzOffset::utc()), ScoreFilter::All);
        assert!(s.points.iter().all(|p| p.value == 0.25));
    }

    #[test]
    fn stance_rates() {
        use Label::*;
        let t = utc(2020, 3, 1, 12, 0);
        let rates = stance_series(vec![(t, Supports), (t, Supports), (t, Rejects), (t, Other)], day_bucketer());
        assert_eq!(rates.len(), 1);
        let r = rates[0];
        assert_eq!((r.support_rate, r.reject_rate, r.other_rate, r.n), (0.5, 0.25, 0.25, 4));
        let all = stance_series(vec![(t, Supports)], day_bucketer());
        assert_eq!((all[0].support_rate, all[0].reject_rate, all[0].other_rate), (1.0, 0.0, 0.0));
    }

    #[test]
    fn weekly_and_monthly_buckets() {
        let b = Bucketer::new(Granularity::Month, TzOffset::default());
        let labeled = vec![(utc(2020, 3, 31, 23, 30), Label::Supports), (utc(2020, 3, 31, 22, 30), Label::Rejects)];
        let rates = stance_series(labeled, b);
        // 23:30 UTC is April 1st at +01:00
        assert_eq!(rates.len(), 2);
        assert_eq!(Granularity::Month.format(rates[1].bucket), "2020-04");
    }

    #[test]
    fn moving_average_cases() {
        let s = series_of(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let ma = moving_average(&s, 7, Alignment::Trailing);
        assert_eq!(ma.points[6].value, 4.0);
        assert!(!ma.points[6].partial);
        assert!(ma.points[..6].iter().all(|p| p.partial));
        assert_eq!(ma.points[1].value, 1.5);
        assert_eq!(moving_average(&s, 1, Alignment::Trailing).values(), s.values());
        let c = series_of(&[3.0; 10]);
        assert_eq!(moving_average(&c, 7, Alignment::Trailing).values(), c.values());
        let centered = moving_average(&s, 3, Alignment::Centered);
        assert_eq!(centered.values(), vec![1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 6.5]);
        assert!(centered.points[0].partial && centered.points[6].partial && !centered.points[3].partial);
    }

    #[test]
    fn pearson_cases() {
        let a = series_of(&[1.0, 2.0, 3.0]);
        let b = series_of(&[2.0, 4.0, 7.0]);
        let c = correlate(&a, &b).unwrap();
        // sxy = 5, sxx = 2, syy = 114/9
        assert!((c.r - 5.0 / (2.0f64 * 114.0 / 9.0).sqrt()).abs() < 1e-12);
        assert!((c.r - 0.99340).abs() < 5e-6);
        assert_eq!(c.n_overlap, 3);
        assert!((correlate(&a, &a).unwrap().r - 1.0).abs() < 1e-15);
        let neg = series_of(&[-1.0, -2.0, -3.0]);
        assert!((correlate(&a, &neg).unwrap().r + 1.0).abs() < 1e-15);
        assert!(matches!(correlate(&a, &series_of(&[5.0, 5.0, 5.0])), Err(Error::DegenerateSeries(_))));
        assert!(correlate(&series_of(&[1.0]), &series_of(&[1.0])).is_err());
    }

    #[test]
    fn correlation_uses_bucket_intersection() {
        let a = series_of(&[1.0, 2.0, 3.0, 4.0]);
        let mut b = series_of(&[9.0, 2.0, 4.0, 7.0]);
        b.points.remove(0);
        let c = correlate(&a, &b).unwrap();
        assert_eq!(c.n_overlap, 3);
        assert!((c.r - 0.99340).abs() < 5e-6);
    }

    #[test]
    fn events() {
        let s = series_of(&[1.0, 2.0, 3.0]);
        let events = vec![
            Event { date: NaiveDate::from_ymd_opt(2020, 3, 2).unwrap(), label: "pc".into() },
            Event { date: NaiveDate::from_ymd_opt(2020, 4, 2).unwrap(), label: "late".into() },
        ];
        let ann = annotate_events(&s, &events);
        assert_eq!(ann.markers.len(), 1);
        assert_eq!(ann.markers[0].bucket, "2020-03-02");
        assert!(ann.markers[0].has_point);
        assert_eq!(ann.out_of_range, vec![events[1].clone()]);
    }

    #[test]
    fn planted_afternoon_drop() {
        // 14:00 local = 13:00 UTC at +01:00
        let local_hour = |h: i64| utc(2020, 3, 12, 0, 0) + Duration::hours(h - 1);
        let mut items = Vec::new();
        for h in 8..20 {
            let v = if h >= 15 { -0.4 } else { 0.3 };
            for k in 0..10 {
                items.push((local_hour(h) + Duration::minutes(k * 5), PolarityScore::from_parts(v, 1)));
            }
        }
        let s = sentiment_series(items, Bucketer::new(Granularity::Hour, TzOffset::default()), ScoreFilter::All);
        let drop = s.points.windows(2).position(|w| w[1].value < w[0].value).unwrap() + 1;
        assert_eq!(s.label(&s.points[drop]), "2020-03-12T15:00");
        assert_eq!(s.points.iter().filter(|p| p.value < 0.0).count(), 5);
    }

    #[test]
    fn planted_monthly_support() {
        let planted = [0.95, 0.85, 0.7, 0.55, 0.45];
        let mut items = Vec::new();
        for (m, &rate) in planted.iter().enumerate() {
            let n = 200;
            let supports = (rate * n as f64).round() as usize;
            for i in 0..n {
                let ts = utc(2020, 3 + m as u32, 1 + (i % 28) as u32, 12, 0);
                let label = if i < supports { Label::Supports } else if i % 2 == 0 { Label::Rejects } else { Label::Other };
                items.push((ts, label));
            }
        }
        let rates = stance_series(items, Bucketer::new(Granularity::Month, TzOffset::default()));
        assert_eq!(rates.len(), 5);
        for (r, want) in rates.iter().zip(planted) {
            assert!((r.support_rate - want).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn frequency_conserves(offsets in proptest::collection::vec(0i64..(60 * 24 * 40), 0..300)) {
            let base = utc(2020, 2, 1, 0, 0);
            let ts: Vec<_> = offsets.iter().map(|&m| base + Duration::minutes(m)).collect();
            for g in [Granularity::Hour, Granularity::Day, Granularity::Week, Granularity::Month] {
                let s = frequency_series(ts.clone(), Bucketer::new(g, TzOffset::default()));
                prop_assert_eq!(s.total_n(), ts.len() as u64);
                prop_assert!(s.points.windows(2).all(|w| w[0].bucket < w[1].bucket));
            }
        }

        #[test]
        fn stance_rates_sum_to_one(labels in proptest::collection::vec((0i64..2000, 0usize..3), 1..200)) {
            let base = utc(2020, 3, 1, 0, 0);
            let items: Vec<_> = labels.iter().map(|&(h, l)| (base + Duration::hours(h), Label::from_index(l))).collect();
            for r in stance_series(items, Bucketer::new(Granularity::Week, TzOffset::default())) {
                prop_assert!((r.support_rate + r.reject_rate + r.other_rate - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn moving_average_bounded(values in proptest::collection::vec(-100.0f64..100.0, 1..40), window in 1usize..10, centered in any::<bool>()) {
            let s = series_of(&values);
            let align = if centered { Alignment::Centered } else { Alignment::Trailing };
            let ma = moving_average(&s, window, align);
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(ma.points.iter().all(|p| p.value >= lo - 1e-9 && p.value <= hi + 1e-9));
            prop_assert_eq!(moving_average(&s, 1, align).values(), values);
        }

        #[test]
        fn pearson_symmetric_and_affine_invariant(
            pairs in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..30),
            scale in 0.1f64..10.0, shift in -100.0f64..100.0,
        ) {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let Ok(r) = pearson(&xs, &ys) {
                prop_assert!((r - pearson(&ys, &xs).unwrap()).abs() < 1e-12);
                let tx: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
                prop_assert!((r - pearson(&tx, &ys).unwrap()).abs() < 1e-12);
            }
        }
    }
}
