use std::fmt::Write as _;

use serde::Serialize;

use super::{BacktestReport, PlanResult, StrategyOutcome, Violation};
use crate::numfmt::{format_sig, round_sig};
use crate::svg::{LineChart, Series};

#[derive(Serialize)]
struct ReportJson<'a> {
    params: ParamsJson,
    windows: Vec<WindowJson<'a>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    skipped: Vec<SkippedJson<'a>>,
}

#[derive(Serialize)]
struct ParamsJson {
    alpha: f64,
    beta: f64,
}

#[derive(Serialize)]
struct WindowJson<'a> {
    label: &'a str,
    n: usize,
    strategies: Vec<StrategyJson<'a>>,
}

#[derive(Serialize)]
struct StrategyJson<'a> {
    name: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    shares: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    currency_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    realized_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    violations: Option<Vec<ViolationJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct ViolationJson {
    day: usize,
    factor: f64,
    min: f64,
    max: f64,
}

#[derive(Serialize)]
struct SkippedJson<'a> {
    label: &'a str,
    days: usize,
}

impl From<&Violation> for ViolationJson {
    fn from(v: &Violation) -> Self {
        Self { day: v.day, factor: round_sig(v.factor), min: round_sig(v.min), max: round_sig(v.max) }
    }
}

impl<'a> From<&'a StrategyOutcome> for StrategyJson<'a> {
    fn from(o: &'a StrategyOutcome) -> Self {
        match &o.result {
            Ok(r) => Self {
                name: &o.name,
                shares: Some(round_sig(r.shares)),
                currency_value: Some(round_sig(r.currency_value)),
                realized_ratio: Some(round_sig(r.realized_ratio)),
                violations: Some(r.violations.iter().map(ViolationJson::from).collect()),
                error: None,
            },
            Err(e) => Self {
                name: &o.name,
                shares: None,
                currency_value: None,
                realized_ratio: None,
                violations: None,
                error: Some(e),
            },
        }
    }
}

/// One flattened `(window, strategy)` row.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub label: String,
    pub n: usize,
    pub strategy: String,
    pub result: Result<PlanResult, String>,
}

impl BacktestReport {
    pub fn summary_rows(&self) -> Vec<SummaryRow> {
        self.windows
            .iter()
            .flat_map(|w| {
                w.outcomes.iter().map(|o| SummaryRow {
                    label: w.label.clone(),
                    n: w.n,
                    strategy: o.name.clone(),
                    result: o.result.clone(),
                })
            })
            .collect()
    }

    /// JSON document; all numbers rounded to 12 significant digits.
    pub fn to_json(&self) -> String {
        let doc = ReportJson {
            params: ParamsJson { alpha: round_sig(self.bounds.alpha), beta: round_sig(self.bounds.beta) },
            windows: self
                .windows
                .iter()
                .map(|w| WindowJson {
                    label: &w.label,
                    n: w.n,
                    strategies: w.outcomes.iter().map(StrategyJson::from).collect(),
                })
                .collect(),
            skipped: self.skipped.iter().map(|s| SkippedJson { label: &s.label, days: s.days }).collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,n,strategy,shares,currency_value,realized_ratio,violations,error\n");
        for row in self.summary_rows() {
            match &row.result {
                Ok(r) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},",
                        row.label,
                        row.n,
                        csv_field(&row.strategy),
                        format_sig(r.shares),
                        format_sig(r.currency_value),
                        format_sig(r.realized_ratio),
                        r.violations.len()
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, "{},{},{},,,,,{}", row.label, row.n, csv_field(&row.strategy), csv_field(e));
                }
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "alpha = {}  beta = {}  slack = {}",
            format_sig(self.bounds.alpha),
            format_sig(self.bounds.beta),
            format_sig(self.slack)
        );
        if self.reordered_input {
            let _ = writeln!(out, "warning: input rows were not in date order and have been sorted");
        }
        let _ = writeln!(
            out,
            "{:<8} {:>3}  {:<10} {:>16} {:>16} {:>16} {:>10}",
            "month", "n", "strategy", "shares", "value", "ratio", "violations"
        );
        for row in self.summary_rows() {
            match &row.result {
                Ok(r) => {
                    let _ = writeln!(
                        out,
                        "{:<8} {:>3}  {:<10} {:>16} {:>16} {:>16} {:>10}",
                        row.label,
                        row.n,
                        row.strategy,
                        format_sig(r.shares),
                        format_sig(r.currency_value),
                        format_sig(r.realized_ratio),
                        r.violations.len()
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, "{:<8} {:>3}  {:<10} skipped: {}", row.label, row.n, row.strategy, e);
                }
            }
        }
        for s in &self.skipped {
            let _ = writeln!(out, "skipped month {} ({} trading day)", s.label, s.days);
        }
        out
    }

    /// Realized ratio per window, one line per strategy.
    pub fn to_svg(&self) -> String {
        let names: Vec<&str> = self
            .windows
            .first()
            .map(|w| w.outcomes.iter().map(|o| o.name.as_str()).collect())
            .unwrap_or_default();
        let series = names
            .iter()
            .enumerate()
            .map(|(k, name)| Series {
                name: name.to_string(),
                points: self
                    .windows
                    .iter()
                    .enumerate()
                    .filter_map(|(i, w)| {
                        w.outcomes
                            .iter()
                            .find(|o| o.name == *name)
                            .and_then(|o| o.result.as_ref().ok())
                            .map(|r| (i as f64, r.realized_ratio))
                    })
                    .collect(),
                dashed: k > 0,
            })
            .collect();
        LineChart {
            title: "Realized competitive ratios".into(),
            x_label: "month".into(),
            y_label: "realized ratio".into(),
            series,
            x_ticks: self.windows.iter().enumerate().map(|(i, w)| (i as f64, w.label.clone())).collect(),
        }
        .render()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
