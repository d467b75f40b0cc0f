use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// How a CSV file is turned into series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestOptions {
    /// Zero-based column holding the values. Defaults to the last column.
    pub value_column: Option<usize>,
    /// Zero-based column holding timestamps. Defaults to the first column
    /// when there are at least two; `None` with one column means index time.
    pub time_column: Option<usize>,
    /// Longest run of missing points filled by linear interpolation.
    /// Longer gaps split the series.
    pub max_gap: usize,
    /// How far (in seconds) a timestamp may go backwards before the file is
    /// rejected. Smaller disorder is fixed by sorting.
    pub tolerance: f64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            value_column: None,
            time_column: None,
            max_gap: 5,
            tolerance: 0.0,
        }
    }
}

/// What came out of a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    /// Gap-free pieces in time order.
    pub segments: Vec<TimeSeries>,
    /// Rows dropped for a non-finite or missing value, or a repeated
    /// timestamp.
    pub rejected_rows: usize,
    pub interpolated_points: usize,
    pub header_skipped: bool,
}

impl Ingested {
    /// The longest segment (the first one on ties).
    pub fn longest(&self) -> &TimeSeries {
        let mut best = &self.segments[0];
        for s in &self.segments[1..] {
            if s.len() > best.len() {
                best = s;
            }
        }
        best
    }
}

/// Reads `timestamp,value` rows or a bare value column from a file.
pub fn ingest_csv(path: impl AsRef<Path>, opts: &IngestOptions) -> Result<Ingested> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Ingest {
        row: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    ingest_reader(file, opts)
}

/// As [`ingest_csv`] for any reader.
pub fn ingest_reader(input: impl Read, opts: &IngestOptions) -> Result<Ingested> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);

    let mut rows: Vec<(f64, f64)> = Vec::new();
    let mut rejected = 0;
    let mut header_skipped = false;
    let mut bare = None;
    let mut last_time = f64::NEG_INFINITY;
    // every timestamp seen, rejected rows included, fixes the grid step
    let mut times = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ingest_err(i + 1, e.to_string()))?;
        let row = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let width = record.len();
        let value_col = opts.value_column.unwrap_or(width - 1);
        let time_col = match opts.time_column {
            Some(c) => Some(c),
            None if width >= 2 => Some(0),
            None => None,
        };
        let first_data = rows.is_empty() && rejected == 0 && !header_skipped;
        let Some(raw_value) = record.get(value_col) else {
            return Err(ingest_err(row, format!("no column {value_col}")));
        };
        let time = match time_col {
            Some(c) => match record.get(c).map(parse_time) {
                Some(Some(t)) => Some(t),
                _ if first_data => {
                    header_skipped = true;
                    continue;
                }
                _ => return Err(ingest_err(row, format!("unparsable timestamp {:?}", record.get(c).unwrap_or("")))),
            },
            None => None,
        };
        let value = if raw_value.is_empty() {
            None
        } else {
            match raw_value.parse::<f64>() {
                Ok(v) => Some(v),
                Err(_) if first_data => {
                    header_skipped = true;
                    continue;
                }
                Err(_) => return Err(ingest_err(row, format!("unparsable value {raw_value:?}"))),
            }
        };
        match bare {
            None => bare = Some(time.is_none()),
            Some(b) if b != time.is_none() => {
                return Err(ingest_err(row, "rows mix timestamped and bare values"));
            }
            _ => {}
        }
        let t = time.unwrap_or((rows.len() + rejected) as f64);
        if t < last_time - opts.tolerance {
            return Err(ingest_err(
                row,
                format!("timestamp {t} goes back more than {} s (previous {last_time})", opts.tolerance),
            ));
        }
        last_time = last_time.max(t);
        times.push(t);
        match value {
            Some(v) if v.is_finite() => rows.push((t, v)),
            _ => {
                rejected += 1;
                log::warn!("row {row}: dropped non-finite or missing value");
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Ingest {
            row: None,
            message: "no valid rows".into(),
        });
    }
    let bare = bare.unwrap_or(true);

    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let before = rows.len();
    rows.dedup_by(|b, a| a.0 == b.0);
    rejected += before - rows.len();

    times.sort_by(f64::total_cmp);
    let step = if bare {
        1.0
    } else {
        times
            .windows(2)
            .map(|p| p[1] - p[0])
            .filter(|&d| d > 0.0)
            .fold(f64::INFINITY, f64::min)
    };
    let step = if step.is_finite() { step } else { 1.0 };

    let mut segments = Vec::new();
    let mut interpolated = 0;
    let mut start = rows[0].0;
    let mut current = vec![rows[0].1];
    for p in rows.windows(2) {
        let (t0, v0) = p[0];
        let (t1, v1) = p[1];
        let missing = ((t1 - t0) / step).round() as usize - 1;
        if missing > opts.max_gap {
            log::warn!("gap of {missing} points after t={t0} splits the series");
            segments.push(finish(std::mem::take(&mut current), start, step, bare)?);
            start = t1;
        } else {
            for k in 1..=missing {
                let f = k as f64 / (missing + 1) as f64;
                current.push(v0 + (v1 - v0) * f);
            }
            interpolated += missing;
        }
        current.push(v1);
    }
    segments.push(finish(current, start, step, bare)?);
    Ok(Ingested {
        segments,
        rejected_rows: rejected,
        interpolated_points: interpolated,
        header_skipped,
    })
}

fn finish(values: Vec<f64>, start: f64, step: f64, bare: bool) -> Result<TimeSeries> {
    let s = TimeSeries::new(values)?;
    if bare {
        Ok(s)
    } else {
        s.with_timestamps(start, step)
    }
}

fn ingest_err(row: usize, message: impl Into<String>) -> Error {
    Error::Ingest {
        row: Some(row),
        message: message.into(),
    }
}

/// Epoch seconds, RFC 3339, or a naive ISO-8601 date-time read as UTC.
fn parse_time(text: &str) -> Option<f64> {
    if let Ok(t) = text.parse::<f64>() {
        return t.is_finite().then_some(t);
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Some(t.timestamp_millis() as f64 / 1000.0);
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(text, fmt) {
            return Some(t.and_utc().timestamp_millis() as f64 / 1000.0);
        }
    }
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .ok()
        .map(|d| d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp() as f64)
}

/// Writes a series in the format [`ingest_csv`] reads: `timestamp,value`
/// rows when it has a time grid, a bare value column otherwise.
pub fn write_csv(series: &TimeSeries, mut out: impl Write) -> Result<()> {
    for (i, v) in series.values().iter().enumerate() {
        match series.time_at(i) {
            Some(t) => writeln!(out, "{t},{v}")?,
            None => writeln!(out, "{v}")?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn read(text: &str) -> Result<Ingested> {
        ingest_reader(text.as_bytes(), &IngestOptions::default())
    }

    #[test]
    fn timestamp_value_rows() {
        let got = read("0,1.0\n60,2.0\n120,3.0").unwrap();
        assert_eq!(got.segments.len(), 1);
        let s = &got.segments[0];
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(s.step_seconds(), Some(60.0));
        assert_eq!(s.start_time(), Some(0.0));
    }

    #[test]
    fn missing_row_is_interpolated() {
        let got = read("0,1.0\n120,3.0\n180,4.0").unwrap();
        assert_eq!(got.segments[0].values(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(got.interpolated_points, 1);
    }

    #[test]
    fn header_and_comments_are_skipped() {
        let got = read("# exported\ntime,value\n0,1\n60,2\n").unwrap();
        assert!(got.header_skipped);
        assert_eq!(got.segments[0].values(), &[1.0, 2.0]);
        let bare = read("value\n1\n2\n3\n").unwrap();
        assert!(bare.header_skipped);
        assert_eq!(bare.segments[0].values(), &[1.0, 2.0, 3.0]);
        assert_eq!(bare.segments[0].step_seconds(), None);
    }

    #[test]
    fn iso_timestamps() {
        let got = read("2024-01-01T00:00:00Z,1\n2024-01-01T00:01:00Z,2\n2024-01-01 00:02:00,3\n").unwrap();
        let s = &got.segments[0];
        assert_eq!(s.step_seconds(), Some(60.0));
        assert_eq!(s.start_time(), Some(1_704_067_200.0));
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn long_gap_splits() {
        let opts = IngestOptions { max_gap: 2, ..Default::default() };
        let got = ingest_reader("0,1\n1,2\n2,3\n10,4\n11,5\n".as_bytes(), &opts).unwrap();
        assert_eq!(got.segments.len(), 2);
        assert_eq!(got.segments[1].start_time(), Some(10.0));
        assert_eq!(got.longest().values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn non_finite_rows_are_counted() {
        let got = read("0,1\n1,NaN\n2,inf\n3,\n4,5\n").unwrap();
        assert_eq!(got.rejected_rows, 3);
        assert_eq!(got.segments[0].values(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(got.interpolated_points, 3);
    }

    #[test]
    fn errors_carry_rows() {
        match read("0,1\n60,abc\n") {
            Err(Error::Ingest { row: Some(2), .. }) => {}
            other => panic!("{other:?}"),
        }
        match read("0,1\n60,2\n30,3\n") {
            Err(Error::Ingest { row: Some(3), .. }) => {}
            other => panic!("{other:?}"),
        }
        let lenient = IngestOptions { tolerance: 60.0, ..Default::default() };
        let sorted = ingest_reader("0,1\n60,2\n30,3\n".as_bytes(), &lenient).unwrap();
        assert_eq!(sorted.segments[0].values(), &[1.0, 3.0, 2.0]);
        assert!(matches!(read("# nothing\n"), Err(Error::Ingest { row: None, .. })));
        assert!(matches!(read("0,nan\n"), Err(Error::Ingest { .. })));
        assert!(matches!(ingest_csv("/nonexistent/x.csv", &IngestOptions::default()), Err(Error::Ingest { .. })));
    }

    #[test]
    fn duplicate_timestamps_keep_the_first() {
        let got = read("0,1\n0,9\n1,2\n").unwrap();
        assert_eq!(got.segments[0].values(), &[1.0, 2.0]);
        assert_eq!(got.rejected_rows, 1);
    }

    proptest! {
        #[test]
        fn round_trip(
            values in prop::collection::vec(-1e6f64..1e6, 2..200),
            start in -1_000_000i64..2_000_000_000,
            step in 1u32..100_000,
            timed in any::<bool>(),
        ) {
            let mut s = TimeSeries::new(values).unwrap();
            if timed {
                s = s.with_timestamps(start as f64, f64::from(step)).unwrap();
            }
            let mut buf = Vec::new();
            write_csv(&s, &mut buf).unwrap();
            let back = ingest_reader(&buf[..], &IngestOptions::default()).unwrap();
            prop_assert_eq!(back.segments.len(), 1);
            prop_assert_eq!(&back.segments[0], &s);
            prop_assert_eq!(back.rejected_rows, 0);
        }
    }
}
