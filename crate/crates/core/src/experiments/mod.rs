//! Seeded Monte Carlo experiments on random sequences.
//!
//! Sample `i` of every experiment uses the sequence drawn from stream `i` of
//! the master seed, so a cell of length `n` sees the length-`n` prefixes of
//! the same underlying infinite sequences as every other cell. Samples run
//! on the current rayon pool and are collected in index order; all
//! reductions run sequentially over that order, so reports do not depend
//! on the worker count. Use [`with_threads`] to pin the pool size.
//!
//! Every verdict is `pass` iff `value <= bound` for the stored row.
//! Frequency targets such as "at least 95%" are therefore stored as miss
//! frequencies against `1 - 0.95`.

mod report;
mod stats;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::log_binomial;
use crate::measures::{
    correlation_measure_exact_with, exact_feasible, range_of_walk, ExactOptions, Normalization,
    DEFAULT_WORK_BUDGET,
};
use crate::oracles::{exact_expected_measure, AVERAGE_MAX_LEN};
use crate::seqcore::{random_sequence, BinarySequence, SeedSpec};
use crate::{Error, Result};

pub use report::{
    emit_report, format_f64, format_json_compact, parse_csv_rows, parse_report, validate_against,
    validate_report_json, ExperimentReport, ReportFormat, ReportRow, SkippedCell, Verdict,
    REPORT_SCHEMA,
};
pub use stats::{compensated_sum, frequency, summarize, Summary};

/// Parameters shared by all experiments; each experiment reads the
/// fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub n_grid: Vec<usize>,
    /// Order `r`, or the largest order for the uniform and band checks.
    pub r: usize,
    pub samples: usize,
    pub master_seed: u64,
    pub epsilon: f64,
    pub delta: f64,
    /// Concentration deviations as multiples of `sqrt(2 r^2 n)`.
    pub theta_grid: Vec<f64>,
    /// Range thresholds as multiples of `sqrt(n)`; each must exceed 2.
    pub lambda_grid: Vec<f64>,
    /// `p` of the dyadic tail bound.
    pub dyadic_p: u32,
    /// Additive slack on frequency comparisons.
    pub slack: f64,
    /// Target frequency for events that should hold with high probability.
    pub min_frequency: f64,
    /// Cap on `C(n-1, r-1) * n` per exact evaluation.
    pub work_budget: u64,
    pub record_timings: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_grid: vec![256],
            r: 2,
            samples: 200,
            master_seed: 0,
            epsilon: 0.5,
            delta: 1.0,
            theta_grid: vec![1.5, 2.0, 2.5],
            lambda_grid: vec![2.1, 2.5, 3.0],
            dyadic_p: 0,
            slack: 0.02,
            min_frequency: 0.95,
            work_budget: DEFAULT_WORK_BUDGET,
            record_timings: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::config("samples must be at least 1"));
        }
        if self.n_grid.is_empty() {
            return Err(Error::config("n_grid must not be empty"));
        }
        if self.n_grid.contains(&0) {
            return Err(Error::config("sequence lengths must be positive"));
        }
        if self.r < 2 {
            return Err(Error::config(format!("order r = {} must be at least 2", self.r)));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::config(format!("epsilon = {} must be >= 0", self.epsilon)));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::config(format!("delta = {} must be > 0", self.delta)));
        }
        if !(self.slack.is_finite() && self.slack >= 0.0) {
            return Err(Error::config(format!("slack = {} must be >= 0", self.slack)));
        }
        if !(0.0..=1.0).contains(&self.min_frequency) {
            return Err(Error::config(format!(
                "min_frequency = {} must lie in [0, 1]",
                self.min_frequency
            )));
        }
        Ok(())
    }
}

/// Runs `f` on a dedicated pool of `threads` workers (0 picks the rayon
/// default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(f))
}

fn sample_sequence(cfg: &ExperimentConfig, n: usize, i: usize) -> Result<BinarySequence> {
    random_sequence(n, SeedSpec::new(cfg.master_seed, i as u64))
}

/// Runs `f(i)` for every sample index, in parallel, keeping index order.
fn per_sample<T: Send>(cfg: &ExperimentConfig, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..cfg.samples).into_par_iter().map(f).collect()
}

fn exact_value(cfg: &ExperimentConfig, seq: &BinarySequence, r: usize) -> Result<u64> {
    let opts = ExactOptions {
        work_budget: cfg.work_budget,
        parallel: false,
    };
    Ok(correlation_measure_exact_with(seq, r, opts)?.value)
}

/// Why an `(n, r)` cell cannot be evaluated exactly, if it cannot.
fn infeasible(cfg: &ExperimentConfig, n: usize, r: usize) -> Option<String> {
    if n <= r {
        return Some(format!("n = {n} must exceed the order r = {r}"));
    }
    if !exact_feasible(n, r, cfg.work_budget) {
        return Some(format!(
            "exact C_{r} at n = {n} exceeds the work budget of {}",
            cfg.work_budget
        ));
    }
    None
}

struct Builder<'a> {
    cfg: &'a ExperimentConfig,
    report: ExperimentReport,
    start: Instant,
}

impl<'a> Builder<'a> {
    fn new(cfg: &'a ExperimentConfig, experiment: &str) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            report: ExperimentReport {
                experiment: experiment.into(),
                config: cfg.clone(),
                rows: Vec::new(),
                skipped: Vec::new(),
                notes: Vec::new(),
                wall_time_secs: None,
            },
            start: Instant::now(),
        })
    }

    fn row(&mut self, n: usize, r: usize, statistic: impl Into<String>, value: f64, bound: Option<f64>, judged: bool) {
        let verdict = match bound {
            Some(b) if judged => Some(Verdict::judge(value, b)),
            _ => None,
        };
        self.report.rows.push(ReportRow {
            n,
            r,
            samples: self.cfg.samples,
            seed: self.cfg.master_seed,
            statistic: statistic.into(),
            value,
            bound,
            verdict,
        });
    }

    fn stat(&mut self, n: usize, r: usize, statistic: impl Into<String>, value: f64) {
        self.row(n, r, statistic, value, None, false);
    }

    fn check(&mut self, n: usize, r: usize, statistic: impl Into<String>, value: f64, bound: f64) {
        self.row(n, r, statistic, value, Some(bound), true);
    }

    fn skip(&mut self, n: usize, r: usize, reason: String) {
        self.report.skipped.push(SkippedCell { n, r, reason });
    }

    fn note(&mut self, note: impl Into<String>) {
        self.report.notes.push(note.into());
    }

    fn finish(mut self) -> ExperimentReport {
        if self.cfg.record_timings {
            self.report.wall_time_secs = Some(self.start.elapsed().as_secs_f64());
        }
        self.report
    }
}

/// Mean, spread and standard error of `C_r(A_n) / sqrt(2 n ln C(n, r-1))`
/// per grid length. For `n <= 16` the exact expectation is added together
/// with the deviation of the sample mean from it in standard errors.
pub fn estimate_expected_ratio(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut b = Builder::new(cfg, "ratio")?;
    let r = cfg.r;
    for &n in &cfg.n_grid {
        if let Some(reason) = infeasible(cfg, n, r) {
            b.skip(n, r, reason);
            continue;
        }
        let norm = Normalization::new(n, r)?.value;
        let values = per_sample(cfg, |i| exact_value(cfg, &sample_sequence(cfg, n, i)?, r))?;
        let measures: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        let ratios: Vec<f64> = measures.iter().map(|v| v / norm).collect();
        let m = summarize(&measures);
        let q = summarize(&ratios);
        b.stat(n, r, "normalization", norm);
        b.stat(n, r, "mean_measure", m.mean);
        b.stat(n, r, "sd_measure", m.sd);
        b.stat(n, r, "mean_ratio", q.mean);
        b.stat(n, r, "sd_ratio", q.sd);
        b.stat(n, r, "se_ratio", q.se);
        if n <= AVERAGE_MAX_LEN && r <= 4 {
            let exact = exact_expected_measure(n, r)?;
            let exact = num_traits::ToPrimitive::to_f64(&exact).expect("finite") / norm;
            let dev = (q.mean - exact).abs();
            let in_se = if q.se > 0.0 {
                dev / q.se
            } else if dev == 0.0 {
                0.0
            } else {
                f64::MAX
            };
            b.stat(n, r, "exact_mean_ratio", exact);
            b.check(n, r, "deviation_in_se", in_se, 3.0);
        }
    }
    Ok(b.finish())
}

/// Frequency of `C_r <= (1 + epsilon) sqrt(2 n ln C(n, r-1))` holding for
/// every order `2 <= r <= cfg.r` at once. Orders above `cfg.r` are not
/// evaluated. With `epsilon = 0` the event frequency is reported without a
/// verdict.
pub fn check_uniform_upper(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut b = Builder::new(cfg, "uniform")?;
    b.note(format!(
        "orders truncated to 2 <= r <= {}; higher orders are not evaluated",
        cfg.r
    ));
    if cfg.epsilon == 0.0 {
        b.note("epsilon = 0: event frequency reported without a verdict");
    }
    let factor = 1.0 + cfg.epsilon;
    for &n in &cfg.n_grid {
        let mut orders = Vec::new();
        for r in 2..=cfg.r {
            match infeasible(cfg, n, r) {
                Some(reason) => b.skip(n, r, reason),
                None => orders.push(r),
            }
        }
        let Some(&top) = orders.last() else { continue };
        let norms: Vec<f64> = orders
            .iter()
            .map(|&r| Normalization::new(n, r).map(|z| z.value))
            .collect::<Result<_>>()?;
        let ratios: Vec<Vec<f64>> = per_sample(cfg, |i| {
            let seq = sample_sequence(cfg, n, i)?;
            orders
                .iter()
                .zip(&norms)
                .map(|(&r, &z)| exact_value(cfg, &seq, r).map(|v| v as f64 / z))
                .collect()
        })?;
        for (k, &r) in orders.iter().enumerate() {
            let worst = ratios.iter().map(|s| s[k]).fold(0.0, f64::max);
            let over = ratios.iter().filter(|s| s[k] > factor).count();
            b.row(n, r, "max_ratio", worst, Some(factor), false);
            b.stat(n, r, "exceed_frequency", frequency(over, cfg.samples));
        }
        let misses = ratios.iter().filter(|s| s.iter().any(|&x| x > factor)).count();
        b.stat(n, top, "event_frequency", 1.0 - frequency(misses, cfg.samples));
        b.row(
            n,
            top,
            "event_miss_frequency",
            frequency(misses, cfg.samples),
            Some(1.0 - cfg.min_frequency),
            cfg.epsilon > 0.0,
        );
    }
    Ok(b.finish())
}

/// `(2/5) sqrt(n ln C(n, r))` and
/// `sqrt((2 + ln ln n / ln n) n ln(n C(n, r)))`.
pub fn band_edges(n: usize, r: usize) -> Result<(f64, f64)> {
    let nf = n as f64;
    let lb = log_binomial(n as u64, r as u64)?;
    let lower = 0.4 * (nf * lb).sqrt();
    let upper = ((2.0 + nf.ln().ln() / nf.ln()) * nf * (nf.ln() + lb)).sqrt();
    Ok((lower, upper))
}

/// Per-order frequency of `lower < C_r < upper` for the band above, over
/// `2 <= r <= min(cfg.r, n/4)`.
pub fn check_theorem_a_band(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let e_e = std::f64::consts::E.powf(std::f64::consts::E);
    if let Some(&bad) = cfg.n_grid.iter().find(|&&n| (n as f64) < e_e) {
        return Err(Error::config(format!(
            "n = {bad} is below e^e = {e_e:.3}, outside the range where the band is stated"
        )));
    }
    let mut b = Builder::new(cfg, "band")?;
    b.note(format!(
        "orders truncated to 2 <= r <= min({}, n/4)",
        cfg.r
    ));
    for &n in &cfg.n_grid {
        for r in 2..=cfg.r {
            if 4 * r > n {
                b.skip(n, r, format!("r = {r} exceeds n/4 = {}", n as f64 / 4.0));
                continue;
            }
            if let Some(reason) = infeasible(cfg, n, r) {
                b.skip(n, r, reason);
                continue;
            }
            let (lower, upper) = band_edges(n, r)?;
            let values = per_sample(cfg, |i| exact_value(cfg, &sample_sequence(cfg, n, i)?, r))?;
            let below = values.iter().filter(|&&v| v as f64 <= lower).count();
            let above = values.iter().filter(|&&v| v as f64 >= upper).count();
            b.stat(n, r, "lower_edge", lower);
            b.stat(n, r, "upper_edge", upper);
            b.stat(n, r, "lower_miss_frequency", frequency(below, cfg.samples));
            b.stat(n, r, "upper_miss_frequency", frequency(above, cfg.samples));
            b.stat(n, r, "band_frequency", 1.0 - frequency(below + above, cfg.samples));
            b.check(
                n,
                r,
                "band_miss_frequency",
                frequency(below + above, cfg.samples),
                1.0 - cfg.min_frequency,
            );
        }
    }
    Ok(b.finish())
}

/// Empirical `Pr[|C_r - mean| >= theta]` against `2 exp(-theta^2 / (2 r^2 n))`
/// for `theta = c sqrt(2 r^2 n)`, `c` in `theta_grid`. The sample mean
/// stands in for `E[C_r]`; verdicts allow `slack` on top of the bound.
pub fn check_concentration(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut b = Builder::new(cfg, "concentration")?;
    if cfg.theta_grid.is_empty() {
        return Err(Error::config("theta_grid must not be empty"));
    }
    if let Some(c) = cfg.theta_grid.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(Error::config(format!("theta multiple {c} must be finite and >= 0")));
    }
    b.note("the sample mean replaces the true mean; verdicts compare against bound + slack");
    let r = cfg.r;
    for &n in &cfg.n_grid {
        if let Some(reason) = infeasible(cfg, n, r) {
            b.skip(n, r, reason);
            continue;
        }
        let values = per_sample(cfg, |i| exact_value(cfg, &sample_sequence(cfg, n, i)?, r))?;
        let measures: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        let s = summarize(&measures);
        b.stat(n, r, "mean_measure", s.mean);
        b.stat(n, r, "sd_measure", s.sd);
        let scale = (2.0 * (r * r) as f64 * n as f64).sqrt();
        for &c in &cfg.theta_grid {
            let theta = c * scale;
            let hits = measures.iter().filter(|&&x| (x - s.mean).abs() >= theta).count();
            let tail = 2.0 * (-c * c).exp();
            b.stat(n, r, format!("tail_bound(theta={c})"), tail);
            b.check(
                n,
                r,
                format!("exceedance_frequency(theta={c})"),
                frequency(hits, cfg.samples),
                tail + cfg.slack,
            );
        }
    }
    Ok(b.finish())
}

/// `(j, m)` with `n = j 2^m`, `2^p < j <= 2^{p+1}` and `m >= 1`, if any.
pub fn dyadic_form(n: usize, p: u32) -> Option<(usize, u32)> {
    let lo = 1usize.checked_shl(p)?;
    let hi = 1usize.checked_shl(p + 1)?;
    (1..usize::BITS).find_map(|m| {
        let step = 1usize << m;
        if !n.is_multiple_of(step) {
            return None;
        }
        let j = n / step;
        (lo < j && j <= hi).then_some((j, m))
    })
}

/// Empirical `Pr[R_n > lambda (1 + delta)]` for the walk range `R_n`
/// against `(ln n) exp(-lambda^2 / 2n)`, and, when `n` has the dyadic form
/// for `p = dyadic_p`, `Pr[R_n > lambda (1 + 12 * 2^{-p/2})]` against
/// `2^{2p+4} exp(-lambda^2 / 2n)`. `lambda = c sqrt(n)` for `c` in
/// `lambda_grid`. Rows carry `r = 1`: the range is that of the sequence
/// itself.
pub fn check_range_tail(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut b = Builder::new(cfg, "tail")?;
    if cfg.lambda_grid.is_empty() {
        return Err(Error::config("lambda_grid must not be empty"));
    }
    if let Some(c) = cfg.lambda_grid.iter().find(|c| !(c.is_finite() && **c > 2.0)) {
        return Err(Error::config(format!(
            "lambda multiple {c} must exceed 2 (lambda > 2 sqrt(n))"
        )));
    }
    let p = cfg.dyadic_p;
    for &n in &cfg.n_grid {
        let ranges: Vec<f64> = per_sample(cfg, |i| Ok(range_of_walk(&sample_sequence(cfg, n, i)?) as f64))?;
        let s = summarize(&ranges);
        b.stat(n, 1, "mean_range", s.mean);
        b.stat(n, 1, "sd_range", s.sd);
        let nf = n as f64;
        let dyadic = dyadic_form(n, p);
        if dyadic.is_none() {
            b.note(format!(
                "n = {n} is not of the form j*2^m with 2^{p} < j <= 2^{}, m >= 1: dyadic comparison skipped",
                p + 1
            ));
        }
        for &c in &cfg.lambda_grid {
            let lambda = c * nf.sqrt();
            let decay = (-c * c / 2.0).exp();
            let general = nf.ln() * decay;
            let hits = ranges.iter().filter(|&&x| x > lambda * (1.0 + cfg.delta)).count();
            b.stat(n, 1, format!("tail_bound(lambda={c})"), general);
            b.check(
                n,
                1,
                format!("range_exceedance(lambda={c})"),
                frequency(hits, cfg.samples),
                general + cfg.slack,
            );
            if dyadic.is_some() {
                let widen = 1.0 + 12.0 * 2f64.powf(-(p as f64) / 2.0);
                let bound = 2f64.powi(2 * p as i32 + 4) * decay;
                let hits = ranges.iter().filter(|&&x| x > lambda * widen).count();
                b.stat(n, 1, format!("dyadic_tail_bound(lambda={c})"), bound);
                b.check(
                    n,
                    1,
                    format!("dyadic_range_exceedance(lambda={c})"),
                    frequency(hits, cfg.samples),
                    bound + cfg.slack,
                );
            }
        }
    }
    Ok(b.finish())
}

/// `C_r` along nested prefixes `n_1 <= n_2 <= ...` of each sampled
/// sequence: frequency of `C_r(A_{n_{k+1}}) - C_r(A_{n_k})` exceeding
/// `sqrt(10 (n_{k+1} - n_k) ln C(n_{k+1}, r-1))` (verdict against `slack`)
/// and of the measure decreasing (verdict against 0). Pair rows carry the
/// larger length.
pub fn check_extension_difference(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut b = Builder::new(cfg, "extension")?;
    let grid = &cfg.n_grid;
    if grid.len() < 2 {
        return Err(Error::config("the extension check needs at least two grid lengths"));
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::config(format!(
            "n_grid must be non-decreasing, found {} after {}",
            w[1], w[0]
        )));
    }
    let r = cfg.r;
    if let Some(reason) = grid.iter().find_map(|&n| {
        if n < r {
            Some(format!("n = {n} is below the order r = {r}"))
        } else if !exact_feasible(n, r, cfg.work_budget) {
            Some(format!("exact C_{r} at n = {n} exceeds the work budget"))
        } else {
            None
        }
    }) {
        return Err(Error::Resource(reason));
    }
    let top = *grid.last().expect("non-empty");
    let values: Vec<Vec<u64>> = per_sample(cfg, |i| {
        let full = sample_sequence(cfg, top, i)?;
        let mut out: Vec<u64> = Vec::with_capacity(grid.len());
        for (k, &n) in grid.iter().enumerate() {
            if k > 0 && grid[k - 1] == n {
                out.push(out[k - 1]);
            } else {
                out.push(exact_value(cfg, &full.prefix(n)?, r)?);
            }
        }
        Ok(out)
    })?;
    for (k, &n) in grid.iter().enumerate() {
        let col: Vec<f64> = values.iter().map(|v| v[k] as f64).collect();
        b.stat(n, r, "mean_measure", summarize(&col).mean);
    }
    for k in 0..grid.len() - 1 {
        let (lo, hi) = (grid[k], grid[k + 1]);
        let bound = (10.0 * (hi - lo) as f64 * log_binomial(hi as u64, r as u64 - 1)?).sqrt();
        let diffs: Vec<i64> = values.iter().map(|v| v[k + 1] as i64 - v[k] as i64).collect();
        let over = diffs.iter().filter(|&&d| d as f64 > bound).count();
        let down = diffs.iter().filter(|&&d| d < 0).count();
        b.stat(hi, r, "difference_bound", bound);
        b.stat(hi, r, "max_difference", *diffs.iter().max().expect("samples >= 1") as f64);
        b.check(hi, r, "difference_violation_frequency", frequency(over, cfg.samples), cfg.slack);
        b.check(hi, r, "decrease_frequency", frequency(down, cfg.samples), 0.0);
    }
    Ok(b.finish())
}

/// Experiment names accepted by [`run_experiment`].
pub const EXPERIMENTS: [&str; 6] = ["ratio", "uniform", "band", "concentration", "tail", "extension"];

pub fn run_experiment(name: &str, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match name {
        "ratio" => estimate_expected_ratio(cfg),
        "uniform" => check_uniform_upper(cfg),
        "band" => check_theorem_a_band(cfg),
        "concentration" => check_concentration(cfg),
        "tail" => check_range_tail(cfg),
        "extension" => check_extension_difference(cfg),
        other => Err(Error::config(format!(
            "unknown experiment '{other}', expected one of {}",
            EXPERIMENTS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_grid: Vec<usize>, samples: usize) -> ExperimentConfig {
        ExperimentConfig {
            n_grid,
            samples,
            master_seed: 42,
            ..ExperimentConfig::default()
        }
    }

    fn row<'a>(rep: &'a ExperimentReport, n: usize, stat: &str) -> &'a ReportRow {
        rep.rows
            .iter()
            .find(|r| r.n == n && r.statistic == stat)
            .unwrap_or_else(|| panic!("no row {stat} at n = {n}"))
    }

    fn all_consistent(rep: &ExperimentReport) {
        for r in &rep.rows {
            assert!(r.verdict_consistent(), "{r:?}");
            if r.statistic.contains("frequency") || r.statistic.contains("exceedance") {
                assert!((0.0..=1.0).contains(&r.value), "{r:?}");
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(vec![], 1).validate().is_err());
        assert!(cfg(vec![8], 0).validate().is_err());
        let mut c = cfg(vec![8], 1);
        c.r = 1;
        assert!(c.validate().is_err());
        let mut c = cfg(vec![8], 1);
        c.min_frequency = 1.5;
        assert!(c.validate().is_err());
        cfg(vec![8], 1).validate().unwrap();
    }

    #[test]
    fn ratio_small_cells_against_exact_mean() {
        let c = cfg(vec![12, 16], 400);
        let rep = estimate_expected_ratio(&c).unwrap();
        all_consistent(&rep);
        for n in [12, 16] {
            let dev = row(&rep, n, "deviation_in_se");
            assert_eq!(dev.verdict, Some(Verdict::Pass), "{dev:?}");
        }
        let norm = Normalization::new(12, 2).unwrap().value;
        let mean = row(&rep, 12, "mean_measure").value;
        assert!((row(&rep, 12, "mean_ratio").value - mean / norm).abs() < 1e-12);
    }

    #[test]
    fn ratio_skips_infeasible_cells() {
        let mut c = cfg(vec![2, 64, 100_000], 3);
        c.r = 3;
        let rep = estimate_expected_ratio(&c).unwrap();
        assert_eq!(rep.skipped.len(), 2);
        assert!(rep.rows.iter().all(|r| r.n == 64));
    }

    #[test]
    fn thread_count_does_not_matter() {
        let mut c = cfg(vec![40, 80], 30);
        c.r = 3;
        let one = with_threads(1, || check_uniform_upper(&c)).unwrap().unwrap();
        let four = with_threads(4, || check_uniform_upper(&c)).unwrap().unwrap();
        assert_eq!(
            emit_report(&one, ReportFormat::Json),
            emit_report(&four, ReportFormat::Json)
        );
    }

    #[test]
    fn uniform_edges() {
        let mut c = cfg(vec![64], 50);
        c.epsilon = 10.0;
        let rep = check_uniform_upper(&c).unwrap();
        assert_eq!(row(&rep, 64, "event_frequency").value, 1.0);
        assert_eq!(row(&rep, 64, "event_miss_frequency").verdict, Some(Verdict::Pass));
        c.epsilon = 0.0;
        let rep = check_uniform_upper(&c).unwrap();
        assert!(row(&rep, 64, "event_frequency").value < 1.0);
        assert_eq!(row(&rep, 64, "event_miss_frequency").verdict, None);
        assert!(rep.notes.iter().any(|n| n.contains("truncated")));
    }

    #[test]
    fn band_guards() {
        assert!(check_theorem_a_band(&cfg(vec![15], 5)).is_err());
        let mut c = cfg(vec![16, 64], 20);
        c.r = 5;
        let rep = check_theorem_a_band(&c).unwrap();
        all_consistent(&rep);
        assert!(rep.skipped.iter().any(|s| s.n == 16 && s.r == 5));
        assert!(rep.rows.iter().any(|r| r.n == 16 && r.r == 4));
    }

    #[test]
    fn band_edges_values() {
        let (lo, hi) = band_edges(512, 2).unwrap();
        let lb = (512.0f64 * 511.0 / 2.0).ln();
        assert!((lo - 0.4 * (512.0 * lb).sqrt()).abs() < 1e-9);
        let ln = 512f64.ln();
        assert!((hi - ((2.0 + ln.ln() / ln) * 512.0 * (ln + lb)).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn concentration_edges() {
        let mut c = cfg(vec![64], 100);
        c.theta_grid = vec![0.0, 100.0];
        let rep = check_concentration(&c).unwrap();
        all_consistent(&rep);
        let zero = row(&rep, 64, "exceedance_frequency(theta=0)");
        assert_eq!((zero.value, zero.verdict), (1.0, Some(Verdict::Pass)));
        assert_eq!(row(&rep, 64, "tail_bound(theta=0)").value, 2.0);
        assert_eq!(row(&rep, 64, "exceedance_frequency(theta=100)").value, 0.0);
        c.theta_grid = vec![-1.0];
        assert!(check_concentration(&c).is_err());
    }

    #[test]
    fn dyadic_forms() {
        assert_eq!(dyadic_form(4096, 0), Some((2, 11)));
        assert_eq!(dyadic_form(4096, 1), Some((4, 10)));
        assert_eq!(dyadic_form(4096, 2), Some((8, 9)));
        assert_eq!(dyadic_form(96, 0), None);
        assert_eq!(dyadic_form(12, 1), Some((3, 2)));
        assert_eq!(dyadic_form(6, 1), Some((3, 1)));
        assert_eq!(dyadic_form(3, 1), None);
        assert_eq!(dyadic_form(2, 0), None);
        assert_eq!(dyadic_form(4, 0), Some((2, 1)));
    }

    #[test]
    fn range_tail_guards_and_rows() {
        let mut c = cfg(vec![4096], 200);
        c.lambda_grid = vec![2.0];
        assert!(check_range_tail(&c).is_err());
        c.lambda_grid = vec![2.5];
        let rep = check_range_tail(&c).unwrap();
        all_consistent(&rep);
        assert!(rep.rows.iter().any(|r| r.statistic.starts_with("dyadic_range_exceedance")));
        c.n_grid = vec![4095];
        let rep = check_range_tail(&c).unwrap();
        assert!(!rep.rows.iter().any(|r| r.statistic.starts_with("dyadic")));
        assert!(rep.notes.iter().any(|n| n.contains("skipped")));
    }

    #[test]
    fn extension_grid_rules() {
        let mut c = cfg(vec![32, 32, 48], 20);
        let rep = check_extension_difference(&c).unwrap();
        all_consistent(&rep);
        let eq = rep
            .rows
            .iter()
            .find(|r| r.n == 32 && r.statistic == "difference_violation_frequency")
            .unwrap();
        assert_eq!(eq.value, 0.0);
        for r in rep.rows_named("decrease_frequency") {
            assert_eq!(r.value, 0.0);
        }
        c.n_grid = vec![48, 32];
        assert!(check_extension_difference(&c).is_err());
        c.n_grid = vec![48];
        assert!(check_extension_difference(&c).is_err());
    }

    #[test]
    fn unknown_experiment() {
        assert!(run_experiment("nope", &cfg(vec![8], 1)).is_err());
    }

    #[test]
    fn timings_only_on_request() {
        let mut c = cfg(vec![32], 4);
        assert!(estimate_expected_ratio(&c).unwrap().wall_time_secs.is_none());
        c.record_timings = true;
        assert!(estimate_expected_ratio(&c).unwrap().wall_time_secs.is_some());
    }
}
