use std::io::{Read, Write};

use chrono::{Datelike, NaiveDate};

use super::BacktestError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricePoint {
    pub date: NaiveDate,
    pub close: f64,
}

/// Daily closing prices with strictly increasing dates.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    points: Vec<PricePoint>,
    reordered: bool,
}

impl PriceSeries {
    /// Sorts by date; rejects duplicate dates and non-positive prices.
    pub fn new(mut points: Vec<PricePoint>) -> Result<Self, BacktestError> {
        if points.is_empty() {
            return Err(BacktestError::EmptySeries);
        }
        if let Some(p) = points.iter().find(|p| !(p.close.is_finite() && p.close > 0.0)) {
            return Err(BacktestError::NonPositivePrice { date: p.date, value: p.close });
        }
        let reordered = points.windows(2).any(|w| w[0].date > w[1].date);
        points.sort_by_key(|p| p.date);
        if let Some(w) = points.windows(2).find(|w| w[0].date == w[1].date) {
            return Err(BacktestError::DuplicateDate(w[0].date));
        }
        Ok(Self { points, reordered })
    }

    pub fn points(&self) -> &[PricePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Set when the input rows were not already in date order.
    pub fn was_reordered(&self) -> bool {
        self.reordered
    }

    /// Writes the series as `date,close` CSV, prices at full precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "date,close")?;
        for p in &self.points {
            writeln!(out, "{},{}", p.date.format("%Y-%m-%d"), p.close)?;
        }
        Ok(())
    }
}

/// Parses `date,close` CSV (ISO dates, decimal prices, LF or CRLF).
pub fn load_prices<R: Read>(source: R) -> Result<PriceSeries, BacktestError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| BacktestError::Parse { row: 1, column: 0, reason: e.to_string() })?
        .clone();
    let header_fields: Vec<&str> = headers.iter().collect();
    if header_fields != ["date", "close"] {
        return Err(BacktestError::Parse {
            row: 1,
            column: 0,
            reason: format!("header must be exactly `date,close`, got `{}`", header_fields.join(",")),
        });
    }

    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
            BacktestError::Parse { row, column: 0, reason: e.to_string() }
        })?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() == 1 && record.get(0).is_some_and(|f| f.trim().is_empty()) {
            continue;
        }
        if record.len() != 2 {
            return Err(BacktestError::Parse {
                row,
                column: record.len().min(3),
                reason: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let date_field = &record[0];
        let date = parse_date(date_field).ok_or_else(|| BacktestError::Parse {
            row,
            column: 1,
            reason: format!("`{date_field}` is not a YYYY-MM-DD date"),
        })?;
        let close_field = &record[1];
        let close: f64 = close_field
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| BacktestError::Parse {
                row,
                column: 2,
                reason: format!("`{close_field}` is not a decimal number"),
            })?;
        if close <= 0.0 {
            return Err(BacktestError::NonPositivePrice { date, value: close });
        }
        points.push(PricePoint { date, close });
    }
    if points.is_empty() {
        return Err(BacktestError::Parse { row: 2, column: 0, reason: "no data rows".into() });
    }
    PriceSeries::new(points)
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    let b = s.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return None;
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

/// A contiguous run of trading days executed as one plan.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanWindow {
    pub label: String,
    pub days: Vec<PricePoint>,
}

impl PlanWindow {
    pub fn new(label: impl Into<String>, days: Vec<PricePoint>) -> Result<Self, BacktestError> {
        let label = label.into();
        if days.len() < 2 {
            return Err(BacktestError::WindowTooShort { label, days: days.len() });
        }
        Ok(Self { label, days })
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn prices(&self) -> Vec<f64> {
        self.days.iter().map(|d| d.close).collect()
    }

    /// Exchange rates: shares per unit of capital, `1 / price`.
    pub fn rates(&self) -> Vec<f64> {
        self.days.iter().map(|d| 1.0 / d.close).collect()
    }

    pub fn last_price(&self) -> f64 {
        self.days.last().expect("window has at least two days").close
    }
}

/// A calendar month left out because it had fewer than two trading days.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedMonth {
    pub label: String,
    pub days: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub windows: Vec<PlanWindow>,
    pub skipped: Vec<SkippedMonth>,
}

/// Splits a series by calendar month (`YYYY-MM` of the date field).
pub fn segment_monthly(series: &PriceSeries) -> Segmentation {
    let mut windows = Vec::new();
    let mut skipped = Vec::new();
    let points = series.points();
    let mut start = 0;
    while start < points.len() {
        let key = (points[start].date.year(), points[start].date.month());
        let end = points[start..]
            .iter()
            .position(|p| (p.date.year(), p.date.month()) != key)
            .map_or(points.len(), |k| start + k);
        let label = format!("{:04}-{:02}", key.0, key.1);
        let days = points[start..end].to_vec();
        if days.len() >= 2 {
            windows.push(PlanWindow { label, days });
        } else {
            skipped.push(SkippedMonth { label, days: days.len() });
        }
        start = end;
    }
    Segmentation { windows, skipped }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn minimal_file() {
        let s = load_prices("date,close\n1997-01-02,100.0\n1997-01-03,107.0".as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.points()[1].close, 107.0);
        assert!(!s.was_reordered());
    }

    #[test]
    fn crlf_accepted() {
        let s = load_prices("date,close\r\n1997-01-02,100\r\n1997-01-03,101\r\n".as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn empty_body_is_parse_error() {
        assert!(matches!(load_prices("date,close\n".as_bytes()), Err(BacktestError::Parse { .. })));
        assert!(matches!(load_prices("".as_bytes()), Err(BacktestError::Parse { .. })));
    }

    #[test]
    fn header_must_match() {
        let err = load_prices("day,price\n1997-01-02,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, BacktestError::Parse { row: 1, .. }));
    }

    #[test]
    fn bad_fields_report_position() {
        let err = load_prices("date,close\n1997-01-02,1\n1997-13-02,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, BacktestError::Parse { row: 3, column: 1, .. }), "{err:?}");
        let err = load_prices("date,close\n1997-01-02,abc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, BacktestError::Parse { row: 2, column: 2, .. }), "{err:?}");
        let err = load_prices("date,close\n1997-01-02,1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, BacktestError::Parse { row: 2, .. }), "{err:?}");
        let err = load_prices("date,close\n97-01-02,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, BacktestError::Parse { column: 1, .. }), "{err:?}");
    }

    #[test]
    fn non_positive_and_duplicates() {
        assert!(matches!(
            load_prices("date,close\n1997-01-02,0\n".as_bytes()),
            Err(BacktestError::NonPositivePrice { .. })
        ));
        assert!(matches!(
            load_prices("date,close\n1997-01-02,1\n1997-01-02,2\n".as_bytes()),
            Err(BacktestError::DuplicateDate(_))
        ));
    }

    #[test]
    fn out_of_order_rows_sorted_and_flagged() {
        let sorted = load_prices("date,close\n1997-01-02,1\n1997-01-03,2\n1997-01-06,3\n".as_bytes()).unwrap();
        let shuffled = load_prices("date,close\n1997-01-06,3\n1997-01-02,1\n1997-01-03,2\n".as_bytes()).unwrap();
        assert!(shuffled.was_reordered());
        assert_eq!(sorted.points(), shuffled.points());
    }

    #[test]
    fn write_then_load_is_identity() {
        let s = PriceSeries::new(vec![
            PricePoint { date: d("1997-01-02"), close: 1.0 / 3.0 },
            PricePoint { date: d("1997-01-03"), close: 123.45678901234568 },
        ])
        .unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(load_prices(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn monthly_segmentation() {
        let csv = "date,close\n1997-01-02,1\n1997-01-03,1\n1997-02-03,1\n1997-02-04,1\n1997-03-03,1\n1997-03-04,1\n1997-03-05,1\n1997-04-01,1\n";
        let seg = segment_monthly(&load_prices(csv.as_bytes()).unwrap());
        let labels: Vec<&str> = seg.windows.iter().map(|w| w.label.as_str()).collect();
        assert_eq!(labels, ["1997-01", "1997-02", "1997-03"]);
        assert_eq!(seg.windows[2].len(), 3);
        assert_eq!(seg.skipped, vec![SkippedMonth { label: "1997-04".into(), days: 1 }]);
    }

    #[test]
    fn same_month_different_years_are_distinct() {
        let csv = "date,close\n1997-01-02,1\n1997-01-03,1\n1998-01-02,1\n1998-01-05,1\n";
        let seg = segment_monthly(&load_prices(csv.as_bytes()).unwrap());
        assert_eq!(seg.windows.len(), 2);
    }

    #[test]
    fn short_window_rejected() {
        assert!(PlanWindow::new("x", vec![PricePoint { date: d("1997-01-02"), close: 1.0 }]).is_err());
    }
}
