use std::io::Write;
use std::process::{Command, Output};

use corrlab::experiments::{parse_report, ReportFormat};
use tempfile::NamedTempFile;

fn corrlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrlab"))
        .args(args)
        .env_remove("CORRLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn file_with(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn measure_alternating_order_three() {
    let f = file_with("+-+-+-+-+\n");
    let out = corrlab(&["measure", "--file", f.path().to_str().unwrap(), "--order", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["value"], 1);
    assert_eq!(v["exact"], true);
    assert_eq!(v["n"], 9);
}

#[test]
fn measure_one_result_per_line() {
    let f = file_with("++++\n+-+-\n\n+--+\n");
    let out = corrlab(&["measure", "--file", f.path().to_str().unwrap(), "--order", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let values: Vec<u64> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["value"].as_u64().unwrap())
        .collect();
    assert_eq!(values, vec![3, 3, 2]);
}

#[test]
fn bad_inputs_exit_two() {
    assert_eq!(corrlab(&["measure", "--file", "-", "--order", "1"]).status.code(), Some(2));
    assert_eq!(corrlab(&["measure", "--bogus"]).status.code(), Some(2));
    let f = file_with("+-x\n");
    let out = corrlab(&["measure", "--file", f.path().to_str().unwrap(), "--order", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.lines().any(|l| l.starts_with("error:")), "{err}");
    let missing = corrlab(&["measure", "--file", "/nonexistent/seq.txt", "--order", "2"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn exhaustive_certificate_exits_zero() {
    let out = corrlab(&["bounds", "--check", "theoremC", "--n", "14", "--r", "1", "--exhaustive"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["sequences"], 16384);
    assert_eq!(v["violations"], 0);
}

#[test]
fn failed_verdict_exits_one() {
    // One sample has zero standard error, so any deviation from the exact
    // mean is infinitely many standard errors.
    let out = corrlab(&["trend", "--experiment", "ratio", "--n", "12", "--samples", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("deviation_in_se"));
}

#[test]
fn oracle_tail_is_exact() {
    let out = corrlab(&["oracle", "--check", "tail", "--n", "12", "--u", "2", "--lambda", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["probability"]["exact"], "11/32");
}

#[test]
fn repeated_runs_and_thread_counts_agree() {
    let base = ["trend", "--experiment", "concentration", "--n", "256", "--samples", "40", "--seed", "7"];
    let first = corrlab(&base);
    let again = corrlab(&base);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, again.stdout);
    for threads in ["1", "3"] {
        let mut args = base.to_vec();
        args.extend(["--threads", threads]);
        assert_eq!(corrlab(&args).stdout, first.stdout, "threads = {threads}");
    }
}

#[test]
fn seed_from_environment() {
    let via_env = Command::new(env!("CARGO_BIN_EXE_corrlab"))
        .args(["expect", "--n", "64", "--samples", "5", "--format", "json"])
        .env("CORRLAB_SEED", "42")
        .output()
        .unwrap();
    let via_flag = corrlab(&["expect", "--n", "64", "--samples", "5", "--format", "json", "--seed", "42"]);
    assert_eq!(via_env.stdout, via_flag.stdout);
    let report = parse_report(&stdout(&via_flag), ReportFormat::Json).unwrap();
    assert_eq!(report.config.master_seed, 42);
    assert!(report.rows.iter().all(|row| row.seed == 42));
}

#[test]
fn report_rerenders_between_formats() {
    let args = ["tail", "--n", "1024", "--samples", "50", "--seed", "3"];
    let json = corrlab(&[&args[..], &["--format", "json"]].concat());
    let csv = corrlab(&[&args[..], &["--format", "csv"]].concat());
    assert_eq!(json.status.code(), Some(0));
    let saved = file_with(&stdout(&json));
    let path = saved.path().to_str().unwrap();
    let rendered = corrlab(&["report", "--input", path, "--format", "csv"]);
    assert_eq!(rendered.status.code(), Some(0));
    assert_eq!(stdout(&rendered), stdout(&csv));
    let back = corrlab(&["report", "--input", path, "--format", "json"]);
    assert_eq!(stdout(&back), stdout(&json));
}

#[test]
fn report_rejects_schema_violations() {
    let f = file_with(r#"{"experiment": "ratio"}"#);
    let out = corrlab(&["report", "--input", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_writes_csv() {
    let f = file_with("+-+-+-+-+\n");
    let out = corrlab(&["scan", "--file", f.path().to_str().unwrap(), "--orders", "2..=3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "line,n,r,value,normalized");
    assert!(lines[1].starts_with("1,9,2,8,"));
    assert!(lines[2].starts_with("1,9,3,1,"));
}

#[test]
fn every_subcommand_has_help() {
    for sub in ["measure", "scan", "expect", "trend", "tail", "bounds", "oracle", "report"] {
        let out = corrlab(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        let text = stdout(&out);
        assert!(text.contains("--seed") && text.contains("--threads"), "{sub}: {text}");
    }
    let help = stdout(&corrlab(&["expect", "--help"]));
    assert!(help.contains("[default: 200]"));
}
