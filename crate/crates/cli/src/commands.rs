use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use buyhold_core::backtest::{self, NamedStrategy, Plan, SyntheticConfig, VIOLATION_SLACK};
use buyhold_core::buyhold::{self, MarketParams, ReturnBounds, StaticStrategy};
use buyhold_core::game::{self, GameError, PayoffMatrix, Tolerances};
use buyhold_core::numfmt::{format_sig, round_sig};
use buyhold_core::svg::{LineChart, Series};
use serde::Serialize;

use crate::args::{
    BacktestArgs, Command, DownturnsArgs, Format, SolveArgs, SweepArgs, SynthArgs, WeightsArgs,
};
use crate::error::CliError;

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Weights(a) => weights(a),
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Downturns(a) => downturns(a),
        Command::Backtest(a) => backtest(a),
        Command::Synth(a) => synth(a),
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

fn data(e: impl ToString) -> CliError {
    CliError::Data(e.to_string())
}

fn unsupported(command: &str, format: Format) -> CliError {
    let name = format!("{format:?}").to_lowercase();
    CliError::Usage(format!("`{command}` cannot emit {name} output"))
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_end(&mut buf).map_err(|e| data(format!("reading standard input: {e}")))?;
    } else {
        buf = fs::read(path).map_err(|e| data(format!("reading {}: {e}", path.display())))?;
    }
    Ok(buf)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| data(format!("writing {}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(content.as_bytes()).and_then(|_| stdout.flush()).map_err(data)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serialises");
    s.push('\n');
    s
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().copied().map(round_sig).collect()
}

fn joined(v: &[f64], sep: &str) -> String {
    v.iter().copied().map(format_sig).collect::<Vec<_>>().join(sep)
}

fn params(bounds: ReturnBounds, days: u32) -> Result<MarketParams, CliError> {
    bounds.with_days(days as usize).map_err(usage)
}

#[derive(Serialize)]
struct WeightsJson {
    alpha: f64,
    beta: f64,
    n: usize,
    ratio: f64,
    weights: Vec<f64>,
    adversary: Vec<f64>,
}

fn weights(a: WeightsArgs) -> Result<(), CliError> {
    let p = params(a.market.bounds()?, a.days)?;
    let b = buyhold::bal_weights(&p);
    let c = buyhold::bal_adversary(&p);
    let r = buyhold::bal_ratio(&p);
    let out = render_weights(&p, b.weights(), c.weights(), r, a.output.format.unwrap_or(Format::Text));
    emit(&a.output.out, &out)
}

fn render_weights(p: &MarketParams, b: &[f64], c: &[f64], r: f64, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Text => {
            let _ = writeln!(out, "alpha = {}  beta = {}  n = {}", format_sig(p.alpha()), format_sig(p.beta()), p.n());
            let _ = writeln!(out, "ratio = {}", format_sig(r));
            let _ = writeln!(out, "{:>5}  {:>18}  {:>18}", "day", "weight", "adversary");
            for (i, (x, y)) in b.iter().zip(c).enumerate() {
                let _ = writeln!(out, "{:>5}  {:>18}  {:>18}", i + 1, format_sig(*x), format_sig(*y));
            }
        }
        Format::Csv => {
            out.push_str("day,weight,adversary,ratio\n");
            for (i, (x, y)) in b.iter().zip(c).enumerate() {
                let _ = writeln!(out, "{},{},{},{}", i + 1, format_sig(*x), format_sig(*y), format_sig(r));
            }
        }
        Format::Json => {
            out = to_json(&WeightsJson {
                alpha: round_sig(p.alpha()),
                beta: round_sig(p.beta()),
                n: p.n(),
                ratio: round_sig(r),
                weights: rounded(b),
                adversary: rounded(c),
            })
        }
        Format::Svg => {
            let points = |v: &[f64]| v.iter().enumerate().map(|(i, &w)| ((i + 1) as f64, w)).collect();
            out = LineChart {
                title: format!("BAL weights, n = {}, ratio {}", p.n(), format_sig_short(r)),
                x_label: "day".into(),
                y_label: "fraction of capital".into(),
                series: vec![
                    Series { name: "BAL".into(), points: points(b), dashed: false },
                    Series { name: "adversary".into(), points: points(c), dashed: true },
                ],
                x_ticks: Vec::new(),
            }
            .render()
        }
    }
    out
}

fn format_sig_short(x: f64) -> String {
    buyhold_core::numfmt::format_sig_digits(x, 6)
}

#[derive(Serialize)]
struct SolveJson {
    route: String,
    value: f64,
    ratio: f64,
    unique: bool,
    online: Vec<f64>,
    adversary: Vec<f64>,
}

fn solve(a: SolveArgs) -> Result<(), CliError> {
    let rows = parse_matrix(&read_input(&a.input)?)?;
    let h = PayoffMatrix::from_rows(&rows).map_err(|e| match e {
        GameError::NonPositiveEntry { row, col, value } => {
            data(format!("matrix: row {}, column {}: entry {value} must be positive", row + 1, col + 1))
        }
        e => data(e),
    })?;
    let mut tol = Tolerances::default();
    if let Some(t) = a.tolerance {
        tol.negative_rounding = t;
    }
    let (s, route) = game::solve_game_with(&h, &tol).map_err(data)?;
    let (x, y) = (s.online.weights(), s.adversary.weights());
    let out = match a.output.format.unwrap_or(Format::Text) {
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "route      {route}");
            let _ = writeln!(out, "value      {}", format_sig(s.value));
            let _ = writeln!(out, "ratio      {}", format_sig(s.ratio));
            let _ = writeln!(out, "unique     {}", s.unique);
            let _ = writeln!(out, "online     {}", joined(x, " "));
            let _ = writeln!(out, "adversary  {}", joined(y, " "));
            out
        }
        Format::Csv => {
            let mut out = String::from("field,index,value\n");
            let _ = writeln!(out, "route,,{route}");
            let _ = writeln!(out, "value,,{}", format_sig(s.value));
            let _ = writeln!(out, "ratio,,{}", format_sig(s.ratio));
            let _ = writeln!(out, "unique,,{}", s.unique);
            for (name, v) in [("online", x), ("adversary", y)] {
                for (i, w) in v.iter().enumerate() {
                    let _ = writeln!(out, "{name},{},{}", i + 1, format_sig(*w));
                }
            }
            out
        }
        Format::Json => to_json(&SolveJson {
            route: route.to_string(),
            value: round_sig(s.value),
            ratio: round_sig(s.ratio),
            unique: s.unique,
            online: rounded(x),
            adversary: rounded(y),
        }),
        Format::Svg => return Err(unsupported("solve", Format::Svg)),
    };
    emit(&a.output.out, &out)
}

/// Row-major numeric CSV without a header; every row must have the same width.
fn parse_matrix(bytes: &[u8]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| data(format!("matrix: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(j, f)| {
                f.parse::<f64>()
                    .map_err(|_| data(format!("matrix: row {line}, column {}: `{f}` is not a number", j + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(data(format!(
                    "matrix: row {line} has {} entries, expected {}",
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(data("matrix: no rows"));
    }
    Ok(rows)
}

#[derive(Serialize)]
struct SweepJson {
    alpha: f64,
    beta: f64,
    rows: Vec<SweepRowJson>,
}

#[derive(Serialize)]
struct SweepRowJson {
    n: usize,
    bal: f64,
    da: f64,
}

fn sweep(a: SweepArgs) -> Result<(), CliError> {
    let bounds = a.market.bounds()?;
    if a.to < a.from {
        return Err(usage(format!("empty range: --from {} is after --to {}", a.from, a.to)));
    }
    let rows = buyhold::ratio_sweep(bounds, a.from as usize, a.to as usize).map_err(usage)?;
    let out = match a.output.format.unwrap_or(Format::Text) {
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "alpha = {}  beta = {}", format_sig(bounds.alpha), format_sig(bounds.beta));
            let _ = writeln!(out, "{:>6}  {:>18}  {:>18}", "n", "BAL", "DA");
            for r in &rows {
                let _ = writeln!(out, "{:>6}  {:>18}  {:>18}", r.n, format_sig(r.bal), format_sig(r.da));
            }
            out
        }
        Format::Csv => {
            let mut out = String::from("n,bal,da\n");
            for r in &rows {
                let _ = writeln!(out, "{},{},{}", r.n, format_sig(r.bal), format_sig(r.da));
            }
            out
        }
        Format::Json => to_json(&SweepJson {
            alpha: round_sig(bounds.alpha),
            beta: round_sig(bounds.beta),
            rows: rows.iter().map(|r| SweepRowJson { n: r.n, bal: round_sig(r.bal), da: round_sig(r.da) }).collect(),
        }),
        Format::Svg => LineChart {
            title: format!(
                "Competitive ratios, alpha = {}, beta = {}",
                format_sig_short(bounds.alpha),
                format_sig_short(bounds.beta)
            ),
            x_label: "n".into(),
            y_label: "competitive ratio".into(),
            series: vec![
                Series { name: "BAL".into(), points: rows.iter().map(|r| (r.n as f64, r.bal)).collect(), dashed: false },
                Series { name: "DA".into(), points: rows.iter().map(|r| (r.n as f64, r.da)).collect(), dashed: true },
            ],
            x_ticks: Vec::new(),
        }
        .render(),
    };
    emit(&a.output.out, &out)
}

#[derive(Serialize)]
struct DownturnsJson {
    alpha: f64,
    beta: f64,
    n: usize,
    downturns: Vec<Vec<f64>>,
}

fn downturns(a: DownturnsArgs) -> Result<(), CliError> {
    let p = params(a.market.bounds()?, a.days)?;
    let seqs = buyhold::downturns(&p).map_err(usage)?;
    let out = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => seqs.iter().map(|e| joined(e.rates(), ",") + "\n").collect(),
        Format::Text => seqs
            .iter()
            .enumerate()
            .map(|(j, e)| format!("e{:<5} {}\n", j + 1, joined(e.rates(), " ")))
            .collect(),
        Format::Json => to_json(&DownturnsJson {
            alpha: round_sig(p.alpha()),
            beta: round_sig(p.beta()),
            n: p.n(),
            downturns: seqs.iter().map(|e| rounded(e.rates())).collect(),
        }),
        Format::Svg => return Err(unsupported("downturns", Format::Svg)),
    };
    emit(&a.output.out, &out)
}

/// `NAME=w1,w2,...`; weights are normalized to sum to one.
fn parse_fixed(spec: &str) -> Result<NamedStrategy, CliError> {
    let (name, list) = spec
        .split_once('=')
        .filter(|(n, _)| !n.trim().is_empty())
        .ok_or_else(|| usage(format!("--fixed `{spec}`: expected NAME=w1,w2,...")))?;
    let weights = list
        .split(',')
        .map(|w| w.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(format!("--fixed `{spec}`: {e}")))?;
    let s = StaticStrategy::normalized(&weights).map_err(|e| usage(format!("--fixed `{spec}`: {e}")))?;
    Ok(NamedStrategy::new(name.trim(), Plan::Fixed(s)))
}

fn backtest(a: BacktestArgs) -> Result<(), CliError> {
    let bounds = a.market.bounds()?;
    let mut strategies = NamedStrategy::standard();
    for spec in &a.fixed {
        strategies.push(parse_fixed(spec)?);
    }
    let series = backtest::load_prices(read_input(&a.input)?.as_slice()).map_err(data)?;
    if series.was_reordered() {
        eprintln!("warning: price rows were not in date order; sorted by date");
    }
    let report = backtest::compare_report(&series, bounds, &strategies, a.tolerance.unwrap_or(VIOLATION_SLACK))
        .map_err(data)?;
    for s in &report.skipped {
        eprintln!("warning: skipped {} with {} trading day", s.label, s.days);
    }
    let out = match a.output.format.unwrap_or(Format::Text) {
        Format::Text => report.to_text(),
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
        Format::Svg => report.to_svg(),
    };
    emit(&a.output.out, &out)
}

fn synth(a: SynthArgs) -> Result<(), CliError> {
    let cfg = SyntheticConfig {
        bounds: a.market.bounds()?,
        start: a.start,
        months: a.months,
        start_price: a.start_price,
        seed: a.seed,
    };
    let series = backtest::synthetic_series(&cfg).map_err(usage)?;
    let mut buf = Vec::new();
    series.write_csv(&mut buf).map_err(data)?;
    emit(&a.out, &String::from_utf8(buf).expect("CSV output is ASCII"))
}
