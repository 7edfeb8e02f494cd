use std::fs;
use std::process::{Command, Output};

use eeopt::config::RunConfig;
use eeopt::CaseSelector;

fn eeopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eeopt"))
        .args(args)
        .output()
        .expect("spawn eeopt")
}

fn records(csv_text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn optimize_round_trips_every_digit() {
    let out = eeopt(&["optimize", "-q"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("case,c_star,ee_star,iterations,final_bracket_width\n"));
    let rows = records(&text);
    assert_eq!(rows.len(), 3);
    let cfg = RunConfig::default();
    for (row, case) in rows.iter().zip(CaseSelector::ALL) {
        assert_eq!(row[0], case.label());
        let r = cfg
            .link_params(case)
            .unwrap()
            .link()
            .unwrap()
            .optimize(cfg.delta)
            .unwrap();
        assert_eq!(row[1].parse::<f64>().unwrap().to_bits(), r.c_star.to_bits());
        assert_eq!(row[2].parse::<f64>().unwrap().to_bits(), r.ee_star.to_bits());
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = [
        "sweep", "-q", "--param", "kappa", "--start", "7e-8", "--stop", "1e-7", "--points", "7", "--log",
    ];
    let a = eeopt(&args);
    let b = eeopt(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn tradeoff_writes_infinity_at_zero() {
    let out = eeopt(&[
        "tradeoff",
        "-q",
        "--cases",
        "fading_csit",
        "--c-min",
        "0",
        "--c-max",
        "4",
        "--points",
        "5",
    ]);
    assert!(out.status.success());
    let rows = records(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][3], "inf");
    assert_eq!(rows[4][1].parse::<f64>().unwrap(), 4.0);
}

#[test]
fn config_file_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    let csv_path = dir.path().join("out.csv");
    fs::write(
        &cfg_path,
        format!(
            "kappa = 8e-8\ncases = [\"static_csit\"]\noutput = \"{}\"\n\n[channel]\ndistance_m = 150.0\n",
            csv_path.display()
        ),
    )
    .unwrap();
    let out = eeopt(&["optimize", "-q", "--config", cfg_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let rows = records(&fs::read_to_string(&csv_path).unwrap());
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "static_csit");
    let c: f64 = rows[0][1].parse().unwrap();
    assert!((c - 0.732_228_685).abs() < 1e-6, "{c}");
}

#[test]
fn summary_goes_to_stderr() {
    let out = eeopt(&["optimize", "--cases", "static_csit"]);
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("static_csit: C* = 8.853987"), "{err}");
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "kappa = -1.0\n").unwrap();
    let unknown = dir.path().join("unknown.toml");
    fs::write(&unknown, "kapa = 1e-7\n").unwrap();
    for args in [
        vec!["optimize", "--config", bad.to_str().unwrap()],
        vec!["optimize", "--config", unknown.to_str().unwrap()],
        vec!["optimize", "--config", "/nonexistent/run.toml"],
        vec!["optimize", "--pa-efficiency", "1.5"],
        vec!["optimize", "--cases", "static_csit,static_csit"],
        vec![
            "sweep",
            "--param",
            "bandwidth",
            "--start",
            "1",
            "--stop",
            "2",
            "--points",
            "2",
        ],
        vec![
            "sweep", "--param", "kappa", "--start", "-1", "--stop", "1e-7", "--points", "3", "--log",
        ],
        vec!["tradeoff", "--c-min", "3", "--c-max", "1", "--points", "4"],
        vec!["optimize", "--no-such-flag"],
    ] {
        let out = eeopt(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn solver_errors_exit_with_three() {
    // the doubling cap stops the bracket before the root near C = 8.85
    let out = eeopt(&["optimize", "--cases", "static_csit", "--doubling-cap", "4"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stderr).unwrap().contains("static_csit"));
}
