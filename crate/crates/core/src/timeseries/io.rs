use std::collections::BTreeSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{parse_bucket, Event, Granularity, Series, SeriesPoint, StanceRates};
use crate::error::{Error, Result};

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, line: usize, e: impl std::fmt::Display) -> Error {
    Error::line(path, line, e.to_string())
}

fn ma_cells(ma: Option<&Series>, i: usize) -> Vec<String> {
    match ma {
        Some(ma) => {
            let p = &ma.points[i];
            vec![p.value.to_string(), p.partial.to_string()]
        }
        None => Vec::new(),
    }
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_to_io)?;
    for row in rows {
        w.write_record(&row).map_err(csv_to_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_to_io(e: csv::Error) -> Error {
    Error::Stream(e.into())
}

fn with_ma<'a>(base: &[&'a str], ma: Option<&Series>) -> Vec<&'a str> {
    let mut h = base.to_vec();
    if ma.is_some() {
        h.extend(["ma", "partial"]);
    }
    h
}

/// `bucket,n`, plus `ma,partial` when a moving average is given.
pub fn write_frequency_csv<W: Write>(out: W, series: &Series, ma: Option<&Series>) -> Result<()> {
    let rows = series.points.iter().enumerate().map(|(i, p)| {
        let mut row = vec![series.label(p), p.n.to_string()];
        row.extend(ma_cells(ma, i));
        row
    });
    write_rows(out, &with_ma(&["bucket", "n"], ma), rows)
}

/// `bucket,mean,n`, plus `ma,partial` when a moving average is given.
pub fn write_sentiment_csv<W: Write>(out: W, series: &Series, ma: Option<&Series>) -> Result<()> {
    let rows = series.points.iter().enumerate().map(|(i, p)| {
        let mut row = vec![series.label(p), p.value.to_string(), p.n.to_string()];
        row.extend(ma_cells(ma, i));
        row
    });
    write_rows(out, &with_ma(&["bucket", "mean", "n"], ma), rows)
}

/// `bucket,support,reject,other,n`.
pub fn write_stance_csv<W: Write>(out: W, rates: &[StanceRates], granularity: Granularity) -> Result<()> {
    let rows = rates.iter().map(|r| {
        vec![
            granularity.format(r.bucket),
            r.support_rate.to_string(),
            r.reject_rate.to_string(),
            r.other_rate.to_string(),
            r.n.to_string(),
        ]
    });
    write_rows(out, &["bucket", "support", "reject", "other", "n"], rows)
}

/// Reads one column of a CSV written by this module. `column` defaults to
/// `mean` when present, otherwise `n`.
pub fn read_series_csv(path: &Path, column: Option<&str>, granularity: Granularity) -> Result<Series> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let headers = rdr.headers().map_err(|e| csv_err(path, 1, e))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let col = match column {
        Some(name) => find(name).ok_or_else(|| csv_err(path, 1, format!("no column {name:?}")))?,
        None => find("mean")
            .or_else(|| find("n"))
            .ok_or_else(|| csv_err(path, 1, "expected a mean or n column"))?,
    };
    let n_col = find("n");
    let mut points: Vec<SeriesPoint> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| csv_err(path, line, e))?;
        let cell = |k: usize| rec.get(k).unwrap_or("");
        let bucket = parse_bucket(cell(0)).ok_or_else(|| csv_err(path, line, format!("bad bucket {:?}", cell(0))))?;
        if points.last().is_some_and(|p| p.bucket >= bucket) {
            return Err(csv_err(path, line, "buckets must be strictly increasing"));
        }
        let value: f64 = cell(col).trim().parse().map_err(|_| csv_err(path, line, format!("bad value {:?}", cell(col))))?;
        let n = n_col.and_then(|k| cell(k).trim().parse().ok()).unwrap_or(0);
        points.push(SeriesPoint { bucket, value, n, partial: false });
    }
    Ok(Series { granularity, points })
}

/// Parses `date,value` rows, with or without a header line. Rows are
/// sorted by date; duplicate or unparseable dates are errors.
pub fn parse_external_series<R: Read>(input: R, source: &Path, granularity: Granularity) -> Result<Series> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut points: Vec<(SeriesPoint, usize)> = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(source, i + 1, e))?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.len() < 2 {
            return Err(csv_err(source, line, "expected date,value"));
        }
        let value = rec[1].parse::<f64>();
        let bucket = parse_bucket(&rec[0]);
        if i == 0 && value.is_err() && bucket.is_none() {
            continue;
        }
        let bucket = bucket.ok_or_else(|| csv_err(source, line, format!("unparseable date {:?}", &rec[0])))?;
        let value = value.map_err(|_| csv_err(source, line, format!("bad value {:?}", &rec[1])))?;
        if !seen.insert(bucket) {
            return Err(csv_err(source, line, format!("duplicate date {}", &rec[0])));
        }
        points.push((SeriesPoint { bucket, value, n: 1, partial: false }, line));
    }
    points.sort_by_key(|(p, _)| p.bucket);
    Ok(Series {
        granularity,
        points: points.into_iter().map(|(p, _)| p).collect(),
    })
}

pub fn load_external_series(path: &Path, granularity: Granularity) -> Result<Series> {
    parse_external_series(open(path)?, path, granularity)
}

/// A JSON array of `{"date": "YYYY-MM-DD", "label": ...}` objects.
pub fn load_events(path: &Path) -> Result<Vec<Event>> {
    serde_json::from_reader(open(path)?).map_err(|e| Error::line(path, e.line(), e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::{moving_average, Alignment};

    fn parse(raw: &str) -> Result<Series> {
        parse_external_series(raw.as_bytes(), Path::new("ext.csv"), Granularity::Day)
    }

    #[test]
    fn external_with_and_without_header() {
        let a = parse("date,value\n2020-03-02,5\n2020-03-01,4.5\n").unwrap();
        let b = parse("2020-03-02,5\n2020-03-01,4.5\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values(), vec![4.5, 5.0]);
    }

    #[test]
    fn external_errors_carry_line() {
        let e = parse("date,value\n2020-03-01,1\n2020-03-01,2\n").unwrap_err().to_string();
        assert!(e.contains("line 3") && e.contains("duplicate"), "{e}");
        let e = parse("date,value\n2020-03-01,1\nyesterday,2\n").unwrap_err().to_string();
        assert!(e.contains("line 3") && e.contains("unparseable"), "{e}");
    }

    #[test]
    fn csv_round_trip() {
        let raw = "2020-03-01,1\n2020-03-02,2\n2020-03-03,6\n";
        let s = parse(raw).unwrap();
        let ma = moving_average(&s, 2, Alignment::Trailing);
        let mut buf = Vec::new();
        write_sentiment_csv(&mut buf, &s, Some(&ma)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("bucket,mean,n,ma,partial\n2020-03-01,1,1,1,true\n"), "{text}");
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        std::fs::write(&p, &text).unwrap();
        assert_eq!(read_series_csv(&p, None, Granularity::Day).unwrap().values(), s.values());
        assert_eq!(read_series_csv(&p, Some("ma"), Granularity::Day).unwrap().values(), vec![1.0, 1.5, 4.0]);
    }

    #[test]
    fn bundled_events_parse() {
        let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/events/press_conferences_2020.json");
        let ev = load_events(&p).unwrap();
        assert!(ev.len() > 20);
        assert!(ev.windows(2).all(|w| w[0].date < w[1].date));
    }
}
