use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gauss-renyi")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

struct Csv {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Csv {
        let mut meta = Vec::new();
        let mut lines = text.lines();
        let mut header = None;
        for line in lines.by_ref() {
            match line.strip_prefix("# ") {
                Some(m) => {
                    let (k, v) = m.split_once(": ").unwrap();
                    meta.push((k.to_string(), v.to_string()));
                }
                None => {
                    header = Some(line);
                    break;
                }
            }
        }
        let columns = header.unwrap().split(',').map(str::to_string).collect();
        let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
        Csv { meta, columns, rows }
    }

    fn meta(&self, key: &str) -> &str {
        &self.meta.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("missing {key}")).1
    }

    fn col(&self, name: &str) -> usize {
        self.columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("missing column {name}"))
    }

    fn num(&self, row: usize, name: &str) -> f64 {
        self.rows[row][self.col(name)].parse().unwrap()
    }

    fn row_by_key(&self, key: &str) -> usize {
        self.rows.iter().position(|r| r[0] == key).unwrap()
    }
}

fn assert_provenance(csv: &Csv, command: &str) {
    assert_eq!(csv.meta("command"), command);
    assert!(!csv.meta("gauss-renyi").is_empty());
    assert!(!csv.meta("config").is_empty());
    assert!(!csv.meta("seed").is_empty());
    assert!(!csv.meta("tail_bound").is_empty());
}

#[test]
#[allow(clippy::approx_constant)]
fn density_at_zero_is_gauss() {
    let csv = Csv::parse(&ok(&["density", "--eps", "0", "--grid-points", "11"]));
    assert_provenance(&csv, "density");
    assert_eq!(csv.rows.len(), 11);
    for r in 0..csv.rows.len() {
        let x = csv.num(r, "x");
        let gauss = 1.0 / (std::f64::consts::LN_2 * (1.0 + x));
        assert!((csv.num(r, "h_eps") - gauss).abs() < 1e-10);
        assert_eq!(csv.num(r, "h_eps"), csv.num(r, "h0"));
    }
    assert!((csv.num(0, "h0") - 1.442695).abs() < 5e-7);
}

#[test]
fn density_residual_is_fourth_order() {
    let eps: f64 = 0.05;
    let csv = Csv::parse(&ok(&["density", "--eps", "0.05", "--order", "3", "--grid-points", "41"]));
    for c in ["c1", "c2", "c3", "residual"] {
        csv.col(c);
    }
    let worst = (0..csv.rows.len()).map(|r| csv.num(r, "residual")).fold(0.0, f64::max);
    assert!(worst < 0.43 * eps.powi(4), "residual {worst:e}");
    let tail: f64 = csv.meta("tail_bound").parse().unwrap();
    assert!(tail < 1e-10);
}

#[test]
fn digits_at_zero_match_gauss_kuzmin() {
    let csv = Csv::parse(&ok(&["digits", "--eps", "0", "--n-max", "20"]));
    assert_provenance(&csv, "digits");
    for r in 0..20 {
        let (a, b) = (csv.num(r, "p_approx"), csv.num(r, "p_gauss_kuzmin"));
        assert!((a - b).abs() < 1e-12, "N={}: {a} {b}", r + 1);
    }
    let p5 = csv.num(4, "p_approx");
    assert!((p5 - (36.0f64 / 35.0).log2()).abs() < 1e-12);
    let total = csv.row_by_key("total");
    assert!((csv.num(total, "p_approx") - 1.0).abs() < 1e-12);
    assert!((csv.num(total, "p_gauss_kuzmin") - 1.0).abs() < 1e-12);
}

#[test]
fn digits_with_mixing_stay_normalized() {
    let csv = Csv::parse(&ok(&["digits", "--eps", "0.1", "--n-max", "30"]));
    let total = csv.row_by_key("total");
    assert!((csv.num(total, "p_approx") - 1.0).abs() < 1e-9);
    assert_eq!(csv.meta("flagged_negative"), "none");
    assert!(csv.num(0, "p_approx") < csv.num(0, "p_gauss_kuzmin"));
}

#[test]
fn convergence_slopes() {
    let csv = Csv::parse(&ok(&["convergence", "--eps-grid", "0.01,0.02,0.04", "--order", "3"]));
    assert_provenance(&csv, "convergence");
    assert_eq!(csv.rows.len(), 9);
    for r in 0..csv.rows.len() {
        let k = csv.num(r, "k");
        let slope = csv.num(r, "fitted_slope");
        let band = match k as u32 {
            1 => 1.5..2.5,
            2 => 2.5..3.5,
            _ => 3.5..4.5,
        };
        assert!(band.contains(&slope), "k={k} slope={slope}");
    }
}

#[test]
fn bounds_table() {
    let csv = Csv::parse(&ok(&["bounds", "--max-index", "4"]));
    assert_provenance(&csv, "bounds");
    assert_eq!(csv.rows.len(), 4);
    assert_eq!(csv.rows[0][csv.col("eps_max")], "deferred (i=1 case in prior work)");
    assert!(csv.rows[0][csv.col("theta1")].is_empty());
    assert!((csv.num(1, "theta1") - 0.233924).abs() < 1e-6);
    assert!((csv.num(1, "C_i") - 1.171424).abs() < 1e-6);
    assert!((csv.num(1, "eps_max") - 0.817148).abs() < 1e-6);
    for r in 1..4 {
        let e = csv.num(r, "eps_max");
        assert!(e > 0.0 && e < 1.0);
    }
}

#[test]
fn simulate_first_digit_and_reproducibility() {
    let args = ["simulate", "--eps", "0", "--samples", "200000", "--seed", "11", "--n-max", "5"];
    let first = ok(&args);
    assert_eq!(first, ok(&args), "reruns must be byte-identical");
    let csv = Csv::parse(&first);
    assert_provenance(&csv, "simulate");
    assert_eq!(csv.meta("seed"), "11");
    let f1 = csv.num(0, "frequency");
    let se = csv.num(0, "standard_error");
    assert!((f1 - 0.415).abs() < 4.0 * se + 1e-3, "{f1} {se}");
    let counts: u64 = csv.rows.iter().map(|r| r[csv.col("count")].parse::<u64>().unwrap()).sum();
    assert_eq!(counts, 200_000);
    csv.col("frequency_lead1");
}

#[test]
fn deterministic_commands_are_byte_identical() {
    for args in [&["density", "--eps", "0.03"][..], &["digits", "--eps", "0.2"], &["bounds"]] {
        assert_eq!(ok(args), ok(args));
    }
}

#[test]
fn json_output() {
    let v: Value = serde_json::from_str(&ok(&["digits", "--eps", "0", "--n-max", "5", "--format", "json"])).unwrap();
    assert_eq!(v["provenance"]["command"], "digits");
    assert_eq!(v["columns"][0], "N");
    assert_eq!(v["rows"].as_array().unwrap().len(), 7);
    let p1 = v["rows"][0]["p_approx"].as_f64().unwrap();
    assert!((p1 - (4.0f64 / 3.0).log2()).abs() < 1e-12);
    assert_eq!(v["rows"][6]["N"], "total");

    let b: Value = serde_json::from_str(&ok(&["bounds", "--max-index", "2", "--format", "json"])).unwrap();
    assert!(b["rows"][0]["theta1"].is_null());
}

#[test]
fn out_file_matches_stdout() {
    let path = std::env::temp_dir().join(format!("gauss-renyi-cli-{}.csv", std::process::id()));
    let args = ["bounds", "--max-index", "3"];
    let p = path.to_str().unwrap();
    let written = run(&[args[0], args[1], args[2], "--out", p]);
    assert!(written.status.success());
    assert!(written.stdout.is_empty());
    let file = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(file, ok(&args));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["density", "--eps", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["density", "--order", "0"]).status.code(), Some(1));
    assert_eq!(run(&["convergence", "--eps-grid", "0.01"]).status.code(), Some(1));
    assert_eq!(run(&["convergence", "--eps-grid", "0,0.1"]).status.code(), Some(1));
    assert_eq!(run(&["convergence", "--eps-grid", "-0.1,0.1"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--samples", "0"]).status.code(), Some(1));
    assert_eq!(run(&["digits", "--taylor-order", "5"]).status.code(), Some(1));
    assert_eq!(run(&["density", "--a-max", "4"]).status.code(), Some(1));
    let bad = run(&["density", "--eps", "-1"]);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("--eps"));
    assert!(bad.stdout.is_empty());
}
