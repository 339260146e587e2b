use std::f64::consts::PI;
use std::process::Command;

use dynmap::cli::{BlpOutput, DivisibilityOutput, SolveOutput, TableReport};
use dynmap::diagnostics::Verdict;

fn dynmap(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dynmap")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn golden_headers() {
    let golden = include_str!("golden/headers.txt");
    let cases: [&[&str]; 7] = [
        &["rates", "--steps", "2"],
        &["capacity", "--steps", "2"],
        &["divisibility", "--steps", "2", "--output", "csv"],
        &["blp", "--steps", "2", "--output", "csv"],
        &["semimarkov", "--steps", "2", "--output", "csv"],
        &["solve", "--backend", "volterra", "--steps", "2", "--tmax", "0.1", "--output", "csv"],
        &["solve", "--backend", "ode", "--steps", "2", "--output", "csv"],
    ];
    let mut got = String::new();
    for args in cases {
        let (code, out, _) = dynmap(args);
        assert_eq!(code, 0, "{args:?}");
        let header: Vec<&str> =
            out.lines().take_while(|l| l.starts_with('#')).chain(out.lines().find(|l| !l.starts_with('#'))).collect();
        got.push_str(&format!("{}: {}\n", args[0], header.join(" | ")));
    }
    assert_eq!(got, golden);
}

#[test]
fn rates_reach_pointwise_value_and_are_flat_before_switch() {
    let (code, out, _) = dynmap(&["rates"]);
    assert_eq!(code, 0);
    let r = rows(&out);
    assert_eq!(r.len(), 1001);
    assert!(r.iter().all(|row| row.len() == 4));
    // Put grid point 375 exactly on t* + 3π/4.
    let target = 4f64.ln() + 3.0 * PI / 4.0;
    let tmax = (target * 1000.0 / 375.0).to_string();
    let (_, out, _) = dynmap(&["rates", "--tmax", &tmax]);
    let row = &rows(&out)[375];
    assert!((row[0] - target).abs() < 1e-12);
    assert!((row[2] + 0.2).abs() < 1e-9, "{}", row[2]);

    let (_, out, _) = dynmap(&["rates", "--tmax", &4f64.ln().to_string(), "--steps", "50"]);
    for row in rows(&out) {
        assert!((row[2] - 1.0).abs() < 1e-12 && (row[3] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn epsilon_domain_and_exit_codes() {
    assert_eq!(dynmap(&["rates", "--epsilon", "0.99", "--steps", "5"]).0, 0);
    let (code, _, err) = dynmap(&["rates", "--epsilon", "1.0"]);
    assert_eq!(code, 2);
    assert!(err.contains("epsilon"));
    assert_eq!(dynmap(&["capacity", "--channel", "replacer"]).0, 2);
    assert_eq!(dynmap(&["rates", "--steps", "banana"]).0, 2);
    assert_eq!(dynmap(&["semimarkov", "--family", "pauli-mixture"]).0, 2);
}

#[test]
fn nonmarkovian_exit_code() {
    let base = ["divisibility", "--steps", "200", "--tmax", "5", "--family"];
    let with = |fam: &str, flag: bool| {
        let mut a: Vec<&str> = base.to_vec();
        a.push(fam);
        if flag {
            a.push("--fail-on-nonmarkovian");
        }
        dynmap(&a).0
    };
    assert_eq!(with("lambda2", false), 0);
    assert_eq!(with("lambda2", true), 3);
    assert_eq!(with("semigroup", true), 0);
    assert_eq!(with("pauli-mixture", true), 3);
}

#[test]
fn divisibility_verdicts() {
    let (_, out, _) = dynmap(&["divisibility", "--family", "semigroup", "--steps", "100"]);
    let rep: DivisibilityOutput = serde_json::from_str(&out).unwrap();
    assert_eq!(rep.report.verdict, Verdict::Divisible);
    let (_, out, _) = dynmap(&["divisibility", "--family", "lambda2", "--steps", "1000"]);
    assert!(out.contains("\"verdict\": \"nondivisible\""));
    let rep: DivisibilityOutput = serde_json::from_str(&out).unwrap();
    // γ₂ < 0 on (t*, t* + π/2) for the default parameters.
    let ts = 4f64.ln();
    let (a, b) = rep.report.violation_intervals[0];
    assert!(a < ts + PI / 2.0 && b > ts);
}

#[test]
fn json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blp.json");
    let p = path.to_str().unwrap();
    let (code, out, _) = dynmap(&["blp", "--family", "lambda1", "--steps", "50", "--seed", "11", "--out", p]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let rep: BlpOutput = serde_json::from_str(&text).unwrap();
    assert_eq!(rep.seed, 11);
    assert_eq!(rep.config.seed, 11);
    assert_eq!(serde_json::to_string_pretty(&rep).unwrap() + "\n", text);

    let (_, out, _) = dynmap(&["rates", "--steps", "10", "--output", "json"]);
    let table: TableReport = serde_json::from_str(&out).unwrap();
    assert_eq!(table.columns, ["t", "gamma_semigroup", "gamma1", "gamma2"]);
    assert_eq!(table.rows.len(), 11);
    assert_eq!(table.config.steps, 10);
}

#[test]
fn deterministic_output() {
    for args in [&["rates"][..], &["capacity"], &["blp", "--steps", "40", "--seed", "5", "--output", "csv"]] {
        assert_eq!(dynmap(args).1, dynmap(args).1);
    }
    let (_, a, _) = dynmap(&["blp", "--steps", "3", "--seed", "5", "--output", "csv"]);
    assert!(a.starts_with("# seed=5\n"));
}

#[test]
fn volterra_backend_meets_residual_bound() {
    let (code, out, _) = dynmap(&["solve", "--backend", "volterra", "--tmax", "6.283185307179586", "--steps", "500"]);
    assert_eq!(code, 0);
    let rep: SolveOutput = serde_json::from_str(&out).unwrap();
    assert!(rep.max_residual.unwrap() <= 1e-5);
}

#[test]
fn ode_backend_tracks_closed_form() {
    for fam in ["lambda1", "lambda2", "semigroup", "pauli-mixture"] {
        let (code, out, _) = dynmap(&["solve", "--backend", "ode", "--family", fam, "--steps", "100"]);
        assert_eq!(code, 0, "{fam}");
        let rep: SolveOutput = serde_json::from_str(&out).unwrap();
        assert!(rep.max_residual.unwrap() < 1e-7, "{fam}: {:?}", rep.max_residual);
    }
}
