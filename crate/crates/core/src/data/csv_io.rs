use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::gp::TimeSeries;
use crate::{Error, Result};

/// A CSV column chosen by header name or zero-based index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnSpec {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for ColumnSpec {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnSpec::Index(i),
            Err(_) => ColumnSpec::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvOptions {
    /// Defaults to the last column, which covers single-column files and
    /// the `t,value` layout written by [`write_csv`].
    pub value_column: Option<ColumnSpec>,
    /// Optional time column. Its raw text is kept for reporting.
    pub time_column: Option<ColumnSpec>,
    /// Use the parsed time column as timestamps instead of `0..n-1`.
    pub use_time_values: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSeries {
    pub series: TimeSeries,
    /// Raw text of the time column, when one was selected.
    pub raw_times: Option<Vec<String>>,
}

fn csv_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn resolve_value(
    spec: Option<&ColumnSpec>,
    header: Option<&csv::StringRecord>,
    first: Option<&csv::StringRecord>,
    path: &Path,
) -> Result<usize> {
    match spec {
        Some(spec) => resolve(spec, header, path),
        None => Ok(header.or(first).map_or(0, |r| r.len().saturating_sub(1))),
    }
}

fn resolve(spec: &ColumnSpec, header: Option<&csv::StringRecord>, path: &Path) -> Result<usize> {
    match spec {
        ColumnSpec::Index(i) => Ok(*i),
        ColumnSpec::Name(name) => header
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| csv_err(path, format!("no column named {name:?}"))),
    }
}

/// Load one numeric column of a comma-separated file.
///
/// A header row is assumed when a column is selected by name, or when the
/// first row's value cell is not a number.
pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<LoadedSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows: Vec<(usize, csv::StringRecord)> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e.to_string()))?;
        // blank lines are skipped by the reader; keep 1-based line numbers
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        rows.push((line, rec));
    }

    let by_name = matches!(options.value_column, Some(ColumnSpec::Name(_)))
        || matches!(options.time_column, Some(ColumnSpec::Name(_)));
    let header_present = match rows.first() {
        None => false,
        Some(_) if by_name => true,
        Some((_, first)) => {
            let idx = resolve_value(options.value_column.as_ref(), None, Some(first), path)?;
            first.get(idx).is_none_or(|c| c.parse::<f64>().is_err())
        }
    };
    let header = if header_present { Some(rows.remove(0).1) } else { None };
    let value_idx = resolve_value(
        options.value_column.as_ref(),
        header.as_ref(),
        rows.first().map(|(_, r)| r),
        path,
    )?;
    let time_idx = options
        .time_column
        .as_ref()
        .map(|c| resolve(c, header.as_ref(), path))
        .transpose()?;

    if rows.is_empty() {
        return Err(Error::EmptySeries);
    }

    let mut values = Vec::with_capacity(rows.len());
    let mut raw_times = time_idx.map(|_| Vec::with_capacity(rows.len()));
    let mut bad = Vec::new();
    for (line, rec) in &rows {
        match rec.get(value_idx).map(str::parse::<f64>) {
            Some(Ok(v)) if v.is_finite() => values.push(v),
            _ => bad.push(*line),
        }
        if let (Some(ti), Some(raw)) = (time_idx, raw_times.as_mut()) {
            raw.push(rec.get(ti).unwrap_or("").to_string());
        }
    }
    if !bad.is_empty() {
        return Err(Error::BadRows {
            path: path.to_path_buf(),
            rows: bad,
        });
    }

    let series = match (&raw_times, options.use_time_values) {
        (Some(raw), true) => {
            let mut times = Vec::with_capacity(raw.len());
            let mut bad = Vec::new();
            for ((line, _), text) in rows.iter().zip(raw) {
                match text.parse::<f64>() {
                    Ok(t) if t.is_finite() => times.push(t),
                    _ => bad.push(*line),
                }
            }
            if !bad.is_empty() {
                return Err(Error::BadRows {
                    path: path.to_path_buf(),
                    rows: bad,
                });
            }
            TimeSeries::new(times, values)?
        }
        _ => TimeSeries::from_values(values)?,
    };
    Ok(LoadedSeries { series, raw_times })
}

/// Write a series as `t,value` with a header.
pub fn write_csv<W: Write>(series: &TimeSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::Protocol(e.to_string());
    w.write_record(["t", "value"]).map_err(to_err)?;
    for (t, y) in series.iter() {
        w.write_record([t.to_string(), y.to_string()]).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Protocol(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn plain_values() {
        let f = file("1\n2\n3\n");
        let s = load_csv(f.path(), &CsvOptions::default()).unwrap().series;
        assert_eq!(s.timestamps(), &[0.0, 1.0, 2.0]);
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn header_and_named_column() {
        let f = file("time,flow\n00:00,10\n00:05,12.5\n");
        let opts = CsvOptions {
            value_column: Some(ColumnSpec::Name("flow".into())),
            time_column: Some(ColumnSpec::Name("time".into())),
            use_time_values: false,
        };
        let loaded = load_csv(f.path(), &opts).unwrap();
        assert_eq!(loaded.series.values(), &[10.0, 12.5]);
        assert_eq!(loaded.series.timestamps(), &[0.0, 1.0]);
        assert_eq!(loaded.raw_times.unwrap(), vec!["00:00", "00:05"]);
        // auto-detected header with index selection
        let s = load_csv(
            f.path(),
            &CsvOptions {
                value_column: Some(ColumnSpec::Index(1)),
                ..Default::default()
            },
        )
        .unwrap()
        .series;
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn blank_value_row_is_reported() {
        let f = file("v\n1\n\"\"\n3\n");
        match load_csv(f.path(), &CsvOptions::default()) {
            Err(Error::BadRows { rows, .. }) => assert_eq!(rows, vec![3]),
            other => panic!("unexpected {other:?}"),
        }
        let f = file("a,b\n1,2\n3,\n5,6\n");
        match load_csv(
            f.path(),
            &CsvOptions {
                value_column: Some(ColumnSpec::Index(1)),
                ..Default::default()
            },
        ) {
            Err(Error::BadRows { rows, .. }) => assert_eq!(rows, vec![3]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn default_column_is_the_last_one() {
        let f = file("t,value\n0,1.5\n1,2.5\n");
        let s = load_csv(f.path(), &CsvOptions::default()).unwrap().series;
        assert_eq!(s.values(), &[1.5, 2.5]);
        let f = file("4\n5\n");
        let s = load_csv(f.path(), &CsvOptions::default()).unwrap().series;
        assert_eq!(s.values(), &[4.0, 5.0]);
    }

    #[test]
    fn header_only_is_empty() {
        let f = file("value\n");
        assert!(matches!(
            load_csv(f.path(), &CsvOptions::default()),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn missing_file() {
        let err = load_csv("/nonexistent/x.csv", &CsvOptions::default()).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.csv"));
    }

    #[test]
    fn explicit_time_column_must_increase() {
        let f = file("t,v\n0,1\n2,2\n1,3\n");
        let opts = CsvOptions {
            value_column: Some(ColumnSpec::Name("v".into())),
            time_column: Some(ColumnSpec::Name("t".into())),
            use_time_values: true,
        };
        assert!(matches!(
            load_csv(f.path(), &opts),
            Err(Error::NonIncreasingTime { .. })
        ));
    }

    #[test]
    fn write_then_read() {
        let s = TimeSeries::from_values(vec![0.25, -1.5, 3.0]).unwrap();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let f = file(std::str::from_utf8(&buf).unwrap());
        let back = load_csv(
            f.path(),
            &CsvOptions {
                value_column: Some(ColumnSpec::Name("value".into())),
                ..Default::default()
            },
        )
        .unwrap()
        .series;
        assert_eq!(back, s);
    }
}
