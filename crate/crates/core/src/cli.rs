//! The `corrlab` command line.
//!
//! Data goes to stdout, parameter echoes and errors to stderr. Exit codes:
//! 0 on success, 1 when any verdict or certificate fails, 2 on usage or
//! input errors.

use std::ffi::OsString;
use std::io::{self, Read, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};

fn flag_name(v: impl ValueEnum) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}
use num_traits::ToPrimitive;
use serde_json::json;

use crate::bounds::{
    certify_theorem_c, certify_theorem_c_exhaustive, certify_theorem_max,
    certify_theorem_max_exhaustive, max_offdiag_scalar, theorem_c_construction, welch_bound,
};
use crate::experiments::{
    emit_report, parse_report, run_experiment, validate_report_json, with_threads,
    ExperimentConfig, ExperimentReport, ReportFormat,
};
use crate::measures::{
    correlation_measure_exact_with, correlation_measure_sampled, ExactOptions, Normalization,
    DEFAULT_WORK_BUDGET,
};
use crate::oracles::{
    count_constrained_even, count_even_tuples, exact_expected_measure, exact_moment, exact_tail,
    naive_correlation_measure, EvenTuple,
};
use crate::seqcore::{read_sequence_file, BinarySequence, SeedSpec};
use crate::{Error, Result, ShiftTuple};

#[derive(Debug, Parser)]
#[command(
    name = "corrlab",
    version,
    about = "Correlation measures of binary sequences: exact and sampled values, lower-bound certificates, oracles and Monte Carlo checks"
)]
struct Cli {
    /// Master seed for every random draw
    #[arg(long, global = true, env = "CORRLAB_SEED", default_value_t = 0)]
    seed: u64,

    /// Worker threads, 0 for one per core; output does not depend on it
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// C_r of every sequence in a file, one JSON result per line
    Measure(MeasureArgs),
    /// CSV of C_r over a range of orders for every sequence in a file
    Scan(ScanArgs),
    /// Monte Carlo estimate of E[C_r] / sqrt(2 n ln C(n, r-1))
    Expect(ExperimentArgs),
    /// Run one Monte Carlo experiment over a grid of lengths
    Trend(TrendArgs),
    /// Certify minimum-value lower bounds or evaluate the Welch bound
    Bounds(BoundsArgs),
    /// Brute-force oracles, printed as JSON
    Oracle(OracleArgs),
    /// Monte Carlo check of the walk-range tail bounds
    Tail(ExperimentArgs),
    /// Re-render a stored JSON report
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct MeasureArgs {
    /// Sequence file, one sequence per line ('-' for stdin)
    #[arg(long)]
    file: String,

    /// Order r >= 2
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    order: u64,

    /// Sampled lower bound instead of the exact value
    #[arg(long)]
    sampled: bool,

    /// Tuples drawn per sequence with --sampled
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,

    /// Cap on C(n-1, r-1) * n for exact evaluation
    #[arg(long, default_value_t = DEFAULT_WORK_BUDGET)]
    work_budget: u64,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Sequence file, one sequence per line ('-' for stdin)
    #[arg(long)]
    file: String,

    /// Inclusive order range such as 2..5
    #[arg(long, value_parser = parse_orders, default_value = "2..4")]
    orders: (usize, usize),

    /// Cap on C(n-1, r-1) * n for exact evaluation
    #[arg(long, default_value_t = DEFAULT_WORK_BUDGET)]
    work_budget: u64,
}

fn parse_orders(s: &str) -> std::result::Result<(usize, usize), String> {
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let lo: usize = lo.trim().parse().map_err(|_| format!("bad order range '{s}'"))?;
    let hi: usize = hi.trim().parse().map_err(|_| format!("bad order range '{s}'"))?;
    if lo < 2 || hi < lo {
        return Err(format!("order range '{s}' must satisfy 2 <= lo <= hi"));
    }
    Ok((lo, hi))
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Comma-separated sequence lengths
    #[arg(long = "n", value_delimiter = ',', default_values_t = vec![256usize])]
    n_grid: Vec<usize>,

    /// Order r, or the largest order for the uniform and band checks
    #[arg(long, default_value_t = 2)]
    r: usize,

    /// Samples per cell
    #[arg(long, default_value_t = 200)]
    samples: usize,

    /// Epsilon of the uniform upper bound
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,

    /// Delta of the range tail bound
    #[arg(long, default_value_t = 1.0)]
    delta: f64,

    /// Concentration deviations, as multiples of sqrt(2 r^2 n)
    #[arg(long = "theta", value_delimiter = ',', default_values_t = vec![1.5, 2.0, 2.5])]
    theta_grid: Vec<f64>,

    /// Range thresholds, as multiples of sqrt(n); each must exceed 2
    #[arg(long = "lambda", value_delimiter = ',', default_values_t = vec![2.1, 2.5, 3.0])]
    lambda_grid: Vec<f64>,

    /// p of the dyadic tail bound
    #[arg(long, default_value_t = 0)]
    dyadic_p: u32,

    /// Additive slack on frequency verdicts
    #[arg(long, default_value_t = 0.02)]
    slack: f64,

    /// Target frequency for high-probability events
    #[arg(long, default_value_t = 0.95)]
    min_frequency: f64,

    /// Cap on C(n-1, r-1) * n per exact evaluation
    #[arg(long, default_value_t = DEFAULT_WORK_BUDGET)]
    work_budget: u64,

    /// Record wall time in the report (breaks byte-identical reruns)
    #[arg(long)]
    timings: bool,

    /// Output format
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

impl ExperimentArgs {
    fn config(&self, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            n_grid: self.n_grid.clone(),
            r: self.r,
            samples: self.samples,
            master_seed: seed,
            epsilon: self.epsilon,
            delta: self.delta,
            theta_grid: self.theta_grid.clone(),
            lambda_grid: self.lambda_grid.clone(),
            dyadic_p: self.dyadic_p,
            slack: self.slack,
            min_frequency: self.min_frequency,
            work_budget: self.work_budget,
            record_timings: self.timings,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExperimentName {
    Ratio,
    Uniform,
    Band,
    Concentration,
    Extension,
    Tail,
}

impl ExperimentName {
    fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Ratio => "ratio",
            ExperimentName::Uniform => "uniform",
            ExperimentName::Band => "band",
            ExperimentName::Concentration => "concentration",
            ExperimentName::Extension => "extension",
            ExperimentName::Tail => "tail",
        }
    }
}

#[derive(Debug, Args)]
struct TrendArgs {
    /// Experiment to run
    #[arg(long, value_enum, default_value_t = ExperimentName::Ratio)]
    experiment: ExperimentName,

    #[command(flatten)]
    common: ExperimentArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoundsCheck {
    #[value(name = "theoremC")]
    TheoremC,
    Max,
    Welch,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Which bound
    #[arg(long, value_enum)]
    check: BoundsCheck,

    /// Sequence file, one sequence per line ('-' for stdin)
    #[arg(long)]
    file: Option<String>,

    /// Length for --exhaustive
    #[arg(long)]
    n: Option<usize>,

    /// Certify every sequence of length --n
    #[arg(long)]
    exhaustive: bool,

    /// r of the C_2r bound and of the Welch construction
    #[arg(long, default_value_t = 1)]
    r: usize,

    /// s of the max{C_2, ..., C_2s} bound
    #[arg(long, default_value_t = 1)]
    s: usize,

    /// Vector length for a bare Welch evaluation
    #[arg(long)]
    ell: Option<u64>,

    /// Number of vectors for a bare Welch evaluation
    #[arg(long)]
    m: Option<u64>,

    /// Welch parameter k
    #[arg(long, default_value_t = 1)]
    k: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OracleCheck {
    Naive,
    Even,
    Constrained,
    Moment,
    Tail,
    Expect,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Which oracle
    #[arg(long, value_enum)]
    check: OracleCheck,

    /// Sequence file for the naive oracle ('-' for stdin)
    #[arg(long)]
    file: Option<String>,

    /// Order r (naive, expect)
    #[arg(long)]
    order: Option<usize>,

    /// Sequence length (constrained, moment, tail, expect)
    #[arg(long)]
    n: Option<usize>,

    /// Comma-separated tuple whose evenness degree is printed (even)
    #[arg(long, value_delimiter = ',')]
    tuple: Option<Vec<u64>>,

    /// Value range {1..m} (even)
    #[arg(long)]
    m: Option<u64>,

    /// Half tuple length q (even, constrained)
    #[arg(long)]
    q: Option<u64>,

    /// t with 0 <= t < q (constrained)
    #[arg(long, default_value_t = 0)]
    t: u64,

    /// First shift tuple, comma-separated offsets (constrained, moment, tail)
    #[arg(long, value_delimiter = ',')]
    u: Option<Vec<usize>>,

    /// Second shift tuple (constrained, moment)
    #[arg(long, value_delimiter = ',')]
    v: Option<Vec<usize>>,

    /// Moment parameter p (moment)
    #[arg(long)]
    p: Option<u32>,

    /// Moment parameter h < p (moment)
    #[arg(long, default_value_t = 0)]
    h: u32,

    /// Deviation threshold (tail)
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Stored JSON report ('-' for stdin)
    #[arg(long)]
    input: String,

    /// Output format
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

/// What a subcommand produced: stdout text and whether a check failed.
struct Outcome {
    stdout: String,
    failed: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, failed: false }
    }
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::Format(format!("cannot read stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Error::Format(format!("cannot read '{path}': {e}")))
}

fn read_sequences(path: &str) -> Result<Vec<BinarySequence>> {
    let seqs = read_sequence_file(&read_input(path)?)
        .map_err(|e| Error::Format(format!("'{path}': {e}")))?;
    if seqs.is_empty() {
        return Err(Error::Format(format!("'{path}' contains no sequences")));
    }
    Ok(seqs)
}

fn missing(flag: &str, check: &str) -> Error {
    Error::config(format!("--check {check} needs {flag}"))
}

fn tuple_arg(v: &Option<Vec<usize>>, flag: &str, check: &str) -> Result<ShiftTuple> {
    ShiftTuple::new(v.clone().ok_or_else(|| missing(flag, check))?)
}

fn line(v: serde_json::Value) -> String {
    let mut s = v.to_string();
    s.push('\n');
    s
}

fn measure(a: &MeasureArgs, seed: u64, threads: usize, log: &mut dyn Write) -> Result<Outcome> {
    let r = a.order as usize;
    let _ = writeln!(
        log,
        "# measure file={} order={r} sampled={} budget={} work_budget={} seed={seed}",
        a.file, a.sampled, a.budget, a.work_budget
    );
    let seqs = read_sequences(&a.file)?;
    let mut out = String::new();
    for (i, seq) in seqs.iter().enumerate() {
        let res = if a.sampled {
            correlation_measure_sampled(seq, r, a.budget, SeedSpec::new(seed, i as u64))
        } else {
            let opts = ExactOptions {
                work_budget: a.work_budget,
                parallel: threads != 1,
            };
            correlation_measure_exact_with(seq, r, opts)
        }
        .map_err(|e| match e {
            Error::Resource(m) => Error::Resource(format!("line {}: {m}; try --sampled --budget B", i + 1)),
            other => other,
        })?;
        out.push_str(&crate::experiments::format_json_compact(&res));
        out.push('\n');
    }
    Ok(Outcome::ok(out))
}

fn scan(a: &ScanArgs) -> Result<Outcome> {
    let (lo, hi) = a.orders;
    let seqs = read_sequences(&a.file)?;
    let mut out = format!(
        "# scan file={} orders={lo}..{hi} work_budget={}\n",
        a.file, a.work_budget
    );
    out.push_str("line,n,r,value,normalized\n");
    let opts = ExactOptions {
        work_budget: a.work_budget,
        parallel: false,
    };
    for (i, seq) in seqs.iter().enumerate() {
        for r in lo..=hi.min(seq.len()) {
            let c = correlation_measure_exact_with(seq, r, opts)
                .map_err(|e| Error::Resource(format!("line {} order {r}: {e}", i + 1)))?;
            let norm = Normalization::new(seq.len(), r)
                .map(|z| crate::experiments::format_f64(c.value as f64 / z.value))
                .unwrap_or_default();
            out.push_str(&format!("{},{},{r},{},{norm}\n", i + 1, seq.len(), c.value));
        }
    }
    Ok(Outcome::ok(out))
}

fn experiment(name: &str, a: &ExperimentArgs, seed: u64) -> Result<Outcome> {
    let cfg = a.config(seed);
    let report: ExperimentReport = run_experiment(name, &cfg)?;
    Ok(Outcome {
        stdout: emit_report(&report, a.format.into()),
        failed: !report.passed(),
    })
}

fn bounds(a: &BoundsArgs, log: &mut dyn Write) -> Result<Outcome> {
    let _ = writeln!(
        log,
        "# bounds check={} r={} s={} k={} exhaustive={}",
        flag_name(a.check), a.r, a.s, a.k, a.exhaustive
    );
    let mut out = String::new();
    let mut failed = false;
    match a.check {
        BoundsCheck::TheoremC | BoundsCheck::Max => {
            let c_check = matches!(a.check, BoundsCheck::TheoremC);
            if a.exhaustive {
                let n = a.n.ok_or_else(|| Error::config("--exhaustive needs --n"))?;
                let sum = if c_check {
                    certify_theorem_c_exhaustive(n, a.r)?
                } else {
                    certify_theorem_max_exhaustive(n, a.s)?
                };
                failed = !sum.satisfied();
                out.push_str(&crate::experiments::format_json_compact(&sum));
                out.push('\n');
            } else {
                let file = a.file.as_deref().ok_or_else(|| {
                    Error::config("give --file F, or --n N --exhaustive")
                })?;
                for seq in read_sequences(file)? {
                    let rep = if c_check {
                        certify_theorem_c(&seq, a.r)?
                    } else {
                        certify_theorem_max(&seq, a.s)?
                    };
                    failed |= !rep.satisfied;
                    out.push_str(&crate::experiments::format_json_compact(&rep));
                    out.push('\n');
                }
            }
        }
        BoundsCheck::Welch => {
            if let Some(file) = a.file.as_deref() {
                for seq in read_sequences(file)? {
                    let fam = theorem_c_construction(&seq, a.r)?;
                    let w = welch_bound(fam.ell() as u64, fam.m() as u64, a.k)?;
                    let off = max_offdiag_scalar(&fam);
                    let ok = w.vacuous || off as f64 >= w.value;
                    failed |= !ok;
                    out.push_str(&line(json!({
                        "check": "welch",
                        "n": seq.len(),
                        "r": a.r,
                        "ell": fam.ell(),
                        "m": fam.m(),
                        "k": a.k,
                        "max_offdiag": off,
                        "welch_bound": w.value,
                        "vacuous": w.vacuous,
                        "satisfied": ok,
                    })));
                }
            } else {
                let ell = a.ell.ok_or_else(|| Error::config("--check welch needs --file or --ell and --m"))?;
                let m = a.m.ok_or_else(|| Error::config("--check welch needs --m"))?;
                let w = welch_bound(ell, m, a.k)?;
                out.push_str(&line(json!({
                    "check": "welch",
                    "ell": ell,
                    "m": m,
                    "k": a.k,
                    "welch_bound": w.value,
                    "vacuous": w.vacuous,
                })));
            }
        }
    }
    Ok(Outcome { stdout: out, failed })
}

fn ratio_json(x: &num_rational::BigRational) -> serde_json::Value {
    json!({ "exact": x.to_string(), "value": x.to_f64() })
}

fn oracle(a: &OracleArgs, log: &mut dyn Write) -> Result<Outcome> {
    let _ = writeln!(log, "# oracle check={}", flag_name(a.check));
    let mut out = String::new();
    let mut failed = false;
    match a.check {
        OracleCheck::Naive => {
            let file = a.file.as_deref().ok_or_else(|| missing("--file", "naive"))?;
            let r = a.order.ok_or_else(|| missing("--order", "naive"))?;
            for (i, seq) in read_sequences(file)?.iter().enumerate() {
                let v = naive_correlation_measure(seq, r)?;
                out.push_str(&line(json!({ "line": i + 1, "n": seq.len(), "r": r, "value": v })));
            }
        }
        OracleCheck::Even => {
            if let Some(t) = &a.tuple {
                out.push_str(&line(serde_json::to_value(EvenTuple::new(t.clone())?).expect("serializable")));
            } else {
                let m = a.m.ok_or_else(|| missing("--tuple or --m", "even"))?;
                let q = a.q.ok_or_else(|| missing("--q", "even"))?;
                let c = count_even_tuples(m, q)?;
                failed = !c.satisfied;
                out.push_str(&line(json!({
                    "m": m, "q": q, "count": c.count, "bound": c.bound, "satisfied": c.satisfied
                })));
            }
        }
        OracleCheck::Constrained => {
            let n = a.n.ok_or_else(|| missing("--n", "constrained"))?;
            let q = a.q.ok_or_else(|| missing("--q", "constrained"))?;
            let u = tuple_arg(&a.u, "--u", "constrained")?;
            let v = tuple_arg(&a.v, "--v", "constrained")?;
            let c = count_constrained_even(n as u64, q, a.t, &u, &v)?;
            failed = !c.satisfied;
            out.push_str(&line(json!({
                "n": n, "q": q, "t": a.t, "u": u, "v": v,
                "count": c.count, "bound": c.bound, "satisfied": c.satisfied
            })));
        }
        OracleCheck::Moment => {
            let n = a.n.ok_or_else(|| missing("--n", "moment"))?;
            let p = a.p.ok_or_else(|| missing("--p", "moment"))?;
            let u = tuple_arg(&a.u, "--u", "moment")?;
            let v = tuple_arg(&a.v, "--v", "moment")?;
            let m = exact_moment(n, &u, &v, p, a.h)?;
            failed = !m.satisfied;
            out.push_str(&line(serde_json::to_value(&m).expect("serializable")));
        }
        OracleCheck::Tail => {
            let n = a.n.ok_or_else(|| missing("--n", "tail"))?;
            let lambda = a.lambda.ok_or_else(|| missing("--lambda", "tail"))?;
            let u = tuple_arg(&a.u, "--u", "tail")?;
            let p = exact_tail(n, &u, lambda)?;
            out.push_str(&line(json!({
                "n": n, "u": u, "lambda": lambda, "probability": ratio_json(&p)
            })));
        }
        OracleCheck::Expect => {
            let n = a.n.ok_or_else(|| missing("--n", "expect"))?;
            let r = a.order.ok_or_else(|| missing("--order", "expect"))?;
            let e = exact_expected_measure(n, r)?;
            let normalized = Normalization::new(n, r)
                .ok()
                .and_then(|z| e.to_f64().map(|x| x / z.value));
            out.push_str(&line(json!({
                "n": n, "r": r, "expected_measure": ratio_json(&e), "normalized": normalized
            })));
        }
    }
    Ok(Outcome { stdout: out, failed })
}

fn report(a: &ReportArgs) -> Result<Outcome> {
    let text = read_input(&a.input)?;
    validate_report_json(&text)?;
    let rep = parse_report(&text, ReportFormat::Json)?;
    Ok(Outcome::ok(emit_report(&rep, a.format.into())))
}

fn dispatch(cli: &Cli, log: &mut dyn Write) -> Result<Outcome> {
    match &cli.command {
        Command::Measure(a) => measure(a, cli.seed, cli.threads, log),
        Command::Scan(a) => scan(a),
        Command::Expect(a) => experiment("ratio", a, cli.seed),
        Command::Trend(a) => experiment(a.experiment.as_str(), &a.common, cli.seed),
        Command::Bounds(a) => bounds(a, log),
        Command::Oracle(a) => oracle(a, log),
        Command::Tail(a) => experiment("tail", a, cli.seed),
        Command::Report(a) => report(a),
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let threads = cli.threads;
    let result = with_threads(threads, || {
        let mut buf = Vec::new();
        let r = dispatch(&cli, &mut buf);
        (r, buf)
    });
    let (result, logged) = match result {
        Ok(pair) => pair,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let _ = err.write_all(&logged);
    match result {
        Ok(outcome) => {
            let _ = out.write_all(outcome.stdout.as_bytes());
            i32::from(outcome.failed)
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

/// [`run_with`] on the process streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = run_with(argv, &mut stdout.lock(), &mut stderr.lock());
    let _ = io::stdout().flush();
    code
}
