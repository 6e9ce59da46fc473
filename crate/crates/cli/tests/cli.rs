use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use buyhold_core::buyhold::{payoff_matrix_k, MarketParams};
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_buyhold")).args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_buyhold"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn ok_stdout(out: Output) -> String {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(out: Output) -> Value {
    serde_json::from_str(&ok_stdout(out)).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn weights_two_two_three() {
    let v = json(run(&["weights", "--alpha", "2", "--beta", "2", "--days", "3", "--format", "json"]));
    assert_eq!(floats(&v["weights"]), vec![0.4, 0.2, 0.4]);
    assert_eq!(floats(&v["adversary"]), vec![0.4, 0.2, 0.4]);
    assert!((v["ratio"].as_f64().unwrap() - 5.0 / 3.0).abs() < 1e-11);
    let text = ok_stdout(run(&["weights", "--alpha", "2", "--beta", "2", "--days", "3"]));
    assert!(text.contains("ratio = 1.66666666667"));
}

#[test]
fn weights_taipei_two_days() {
    let v = json(run(&["weights", "--preset", "taipei", "--days", "2", "--format", "json"]));
    let b = floats(&v["weights"]);
    assert!((b[0] - 0.4831).abs() < 5e-5, "{b:?}");
    assert!((v["ratio"].as_f64().unwrap() - 1.0350).abs() < 5e-5);
    // the adversary mixture is the weights with first and last swapped
    assert_eq!(floats(&v["adversary"]), vec![b[1], b[0]]);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["weights", "--days", "1", "--preset", "taipei"],
        vec!["weights", "--days", "3"],
        vec!["weights", "--alpha", "2", "--days", "3"],
        vec!["weights", "--alpha", "2", "--beta", "2", "--preset", "taipei", "--days", "3"],
        vec!["weights", "--alpha", "0.9", "--beta", "2", "--days", "3"],
        vec!["weights", "--preset", "nowhere", "--days", "3"],
        vec!["sweep", "--preset", "taipei", "--from", "10", "--to", "9"],
        vec!["sweep", "--preset", "taipei", "--from", "2", "--to", "10001"],
        vec!["downturns", "--preset", "taipei", "--days", "3", "--format", "svg"],
        vec!["backtest", "--preset", "taipei", "--fixed", "bad", "-"],
        vec!["nonsense"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty(), "{args:?}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn solve_small_games() {
    let v = json(run_stdin(&["solve", "-", "--format", "json"], "1\n"));
    assert_eq!(v["value"].as_f64(), Some(1.0));
    assert_eq!(v["ratio"].as_f64(), Some(1.0));

    let v = json(run_stdin(&["solve", "-", "--format", "json"], "1,0.5\n0.5,1\n"));
    assert_eq!(v["route"], "closed-form");
    assert!((v["value"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert!((v["ratio"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-11);
    assert_eq!(floats(&v["online"]), vec![0.5, 0.5]);
    assert_eq!(floats(&v["adversary"]), vec![0.5, 0.5]);
    assert_eq!(v["unique"], true);
}

#[test]
fn solve_falls_back_to_lp() {
    // rectangular: the closed form cannot apply
    let v = json(run_stdin(&["solve", "-", "--format", "json"], "1,2\n2,1\n1.5,1.5\n"));
    assert_eq!(v["route"], "linear-program");
    assert!((v["value"].as_f64().unwrap() - 1.5).abs() < 1e-9);
    // dominated column: H^-1 u has a negative component
    let v = json(run_stdin(&["solve", "-", "--format", "json"], "1,3\n2,4\n"));
    assert_eq!(v["route"], "linear-program");
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn solve_data_errors_exit_one() {
    for input in ["1,0\n0,1\n", "1,2\n3\n", "1,x\n", "", "1,-2\n"] {
        let out = run_stdin(&["solve", "-"], input);
        assert_eq!(out.status.code(), Some(1), "{input:?}");
        let err = String::from_utf8_lossy(&out.stderr).to_string();
        assert!(err.starts_with("error: "), "{err}");
    }
    let out = run_stdin(&["solve", "-"], "1,2\n3,abc\n");
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2, column 2"));
    assert_eq!(run(&["solve", "/definitely/not/here.csv"]).status.code(), Some(1));
}

#[test]
fn solve_on_k_matches_weights() {
    let dir = TempDir::new().unwrap();
    for (alpha, beta, n) in [(2.0, 2.0, 3), (1.0 / 0.93, 1.07, 22), (1.5, 3.0, 7), (3.0, 1.2, 12)] {
        let p = MarketParams::new(alpha, beta, n).unwrap();
        let k = payoff_matrix_k(&p).unwrap();
        let mut csv = String::new();
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{}", k.get(i, j))).collect();
            csv.push_str(&row.join(","));
            csv.push('\n');
        }
        let file = dir.path().join(format!("k{n}.csv"));
        fs::write(&file, csv).unwrap();

        let (a, b) = (format!("{alpha}"), format!("{beta}"));
        let days = n.to_string();
        let w = json(run(&["weights", "--alpha", &a, "--beta", &b, "--days", &days, "--format", "json"]));
        let s = json(run(&["solve", path_str(&file), "--format", "json"]));
        assert_eq!(s["route"], "closed-form");
        assert_eq!(s["unique"], true);
        assert!((s["ratio"].as_f64().unwrap() - w["ratio"].as_f64().unwrap()).abs() <= 1e-9);
        for (key_s, key_w) in [("online", "weights"), ("adversary", "adversary")] {
            for (x, y) in floats(&s[key_s]).iter().zip(floats(&w[key_w])) {
                assert!((x - y).abs() <= 1e-9, "{key_s} n={n}");
            }
        }
    }
}

#[test]
fn sweep_taipei() {
    let csv = ok_stdout(run(&["sweep", "--preset", "taipei", "--from", "2", "--to", "100", "--format", "csv"]));
    let rows: Vec<(usize, f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 99);
    assert_eq!(rows[0].0, 2);
    assert_eq!(rows[98].0, 100);
    for r in &rows {
        assert!(r.1 <= r.2, "{r:?}");
    }
    for w in rows.windows(2) {
        assert!(w[1].1 > w[0].1);
    }
    let svg = ok_stdout(run(&["sweep", "--preset", "taipei", "--format", "svg"]));
    assert!(svg.starts_with("<svg") && svg.matches("<polyline").count() == 2);
}

#[test]
fn sweep_degenerate_single_row() {
    let v = json(run(&["sweep", "--alpha", "2", "--beta", "2", "--from", "2", "--to", "2", "--format", "json"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0]["bal"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-11);
    assert!((rows[0]["da"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-11);
}

#[test]
fn downturn_rows() {
    let csv = ok_stdout(run(&["downturns", "--alpha", "2", "--beta", "2", "--days", "2"]));
    assert_eq!(csv, "2,1\n2,4\n");
    let csv = ok_stdout(run(&["downturns", "--alpha", "2", "--beta", "2", "--days", "3"]));
    assert_eq!(csv.lines().nth(1), Some("2,4,2"));
    let v = json(run(&["downturns", "--preset", "tokyo", "--days", "20", "--format", "json"]));
    let rows = v["downturns"].as_array().unwrap();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r.as_array().unwrap().len() == 20));
}

fn synth_file(dir: &TempDir, seed: &str) -> std::path::PathBuf {
    let file = dir.path().join(format!("synth{seed}.csv"));
    let out = run(&["synth", "--preset", "taipei", "--seed", seed, "--out", path_str(&file)]);
    assert_eq!(out.status.code(), Some(0));
    file
}

#[test]
fn backtest_synthetic_year() {
    let dir = TempDir::new().unwrap();
    let prices = synth_file(&dir, "11");
    let v = json(run(&["backtest", "--preset", "taipei", path_str(&prices), "--format", "json"]));
    let windows = v["windows"].as_array().unwrap();
    assert_eq!(windows.len(), 12);
    let mut rows = 0;
    for w in windows {
        let n = w["n"].as_u64().unwrap() as usize;
        let sweep = json(run(&[
            "sweep", "--preset", "taipei", "--from", &n.to_string(), "--to", &n.to_string(), "--format", "json",
        ]));
        let bounds = &sweep["rows"][0];
        for s in w["strategies"].as_array().unwrap() {
            rows += 1;
            assert!(s["violations"].as_array().unwrap().is_empty());
            let realized = s["realized_ratio"].as_f64().unwrap();
            let key = if s["name"] == "BAL" { "bal" } else { "da" };
            assert!(realized >= 1.0 - 1e-12);
            assert!(realized <= bounds[key].as_f64().unwrap() + 1e-9);
        }
    }
    assert_eq!(rows, 24);

    let csv = ok_stdout(run(&["backtest", "--preset", "taipei", path_str(&prices), "--format", "csv"]));
    assert_eq!(csv.lines().count(), 25);
    let svg = ok_stdout(run(&["backtest", "--preset", "taipei", path_str(&prices), "--format", "svg"]));
    assert!(svg.starts_with("<svg"));
}

#[test]
fn backtest_flat_prices() {
    let mut csv = String::from("date,close\n");
    for d in 1..=28 {
        csv.push_str(&format!("1997-02-{d:02},55.5\n"));
    }
    let v = json(run_stdin(&["backtest", "--alpha", "1.1", "--beta", "1.1", "-", "--format", "json"], &csv));
    for s in v["windows"][0]["strategies"].as_array().unwrap() {
        assert!((s["realized_ratio"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn backtest_flags_injected_drop_and_exits_zero() {
    let dir = TempDir::new().unwrap();
    let prices = fs::read_to_string(synth_file(&dir, "5")).unwrap();
    // halve every price from 1997-03-12 on: one 50% daily drop
    let mut lines = vec!["date,close".to_string()];
    for l in prices.lines().skip(1) {
        let (date, close) = l.split_once(',').unwrap();
        let mut close: f64 = close.parse().unwrap();
        if date >= "1997-03-12" {
            close *= 0.5;
        }
        lines.push(format!("{date},{close}"));
    }
    let input = lines.join("\n") + "\n";
    let v = json(run_stdin(&["backtest", "--preset", "taipei", "-", "--format", "json"], &input));
    let mut flagged = Vec::new();
    for w in v["windows"].as_array().unwrap() {
        let viol = w["strategies"][0]["violations"].as_array().unwrap();
        if !viol.is_empty() {
            flagged.push((w["label"].as_str().unwrap().to_string(), viol.clone()));
        }
        assert!(w["strategies"][0]["realized_ratio"].is_f64());
    }
    assert_eq!(flagged.len(), 1);
    assert_eq!(flagged[0].0, "1997-03");
    assert_eq!(flagged[0].1.len(), 1);
    // 1997-03-12 is the 8th weekday of March
    assert_eq!(flagged[0].1[0]["day"], 7);
    // the rate doubles on top of an admissible move
    let v = &flagged[0].1[0];
    let factor = v["factor"].as_f64().unwrap();
    assert!(factor > v["max"].as_f64().unwrap());
    assert!((2.0 / 1.07..=2.0 / 0.93).contains(&factor), "{factor}");
}

#[test]
fn backtest_parse_error_exit_one() {
    let out = run_stdin(&["backtest", "--preset", "taipei", "-"], "date,close\n1997-01-02,100.0\n1997-01-03,abc\n");
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 3") && err.contains("column 2"), "{err}");

    let out = run_stdin(&["backtest", "--preset", "taipei", "-"], "day,price\n1997-01-02,1\n");
    assert_eq!(out.status.code(), Some(1));
    let out = run_stdin(&["backtest", "--preset", "taipei", "-"], "date,close\n");
    assert_eq!(out.status.code(), Some(1));
    let out = run_stdin(&["backtest", "--preset", "taipei", "-"], "date,close\n1997-01-02,1\n1997-01-02,2\n");
    assert_eq!(out.status.code(), Some(1));
    let out = run_stdin(&["backtest", "--preset", "taipei", "-"], "date,close\n1997-01-02,0\n");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn backtest_fixed_strategy_and_reordered_input() {
    let input = "date,close\r\n1997-01-03,10\r\n1997-01-02,10\r\n1997-01-06,11\r\n";
    let out = run_stdin(&["backtest", "--preset", "taipei", "--fixed", "front=1,0,0", "-", "--format", "json"], input);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sorted"));
    let v = json(out);
    let strategies = v["windows"][0]["strategies"].as_array().unwrap();
    assert_eq!(strategies.len(), 3);
    assert_eq!(strategies[2]["name"], "front");
    assert!((strategies[2]["shares"].as_f64().unwrap() - 0.1).abs() < 1e-12);
    // a fixed 2-day strategy cannot run on a 3-day month; it is annotated, not fatal
    let v = json(run_stdin(&["backtest", "--preset", "taipei", "--fixed", "pair=1,1", "-", "--format", "json"], input));
    assert!(v["windows"][0]["strategies"][2]["error"].is_string());
}

#[test]
fn outputs_are_byte_stable() {
    let dir = TempDir::new().unwrap();
    let a = fs::read(synth_file(&dir, "77")).unwrap();
    let b = fs::read(synth_file(&dir, "77")).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, fs::read(synth_file(&dir, "78")).unwrap());
    let prices = dir.path().join("synth77.csv");
    for format in ["json", "csv", "svg", "text"] {
        let args = ["backtest", "--preset", "taipei", path_str(&prices), "--format", format];
        assert_eq!(ok_stdout(run(&args)), ok_stdout(run(&args)), "{format}");
    }
    for args in [
        vec!["weights", "--preset", "vienna", "--days", "21", "--format", "svg"],
        vec!["sweep", "--preset", "paris", "--format", "json"],
        vec!["downturns", "--preset", "bangkok", "--days", "5", "--format", "text"],
    ] {
        assert_eq!(ok_stdout(run(&args)), ok_stdout(run(&args)));
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("w.csv");
    let out = run(&["weights", "--preset", "tokyo", "--days", "4", "--format", "csv", "--out", path_str(&file)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&file).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("day,weight,adversary,ratio\n"));
}
