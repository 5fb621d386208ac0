//! Certificates for the two minimum-value lower bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binomial;
use super::welch::to_u64;
use crate::measures::correlation_measure_exact;
use crate::seqcore::{enumerate_all, BinarySequence};
use crate::{Error, Result};

/// Explicit floor used for the constant in the `max{C_2, ..., C_{2s}}`
/// lower bound `c sqrt(s n)`.
pub const MAX_THEOREM_CONSTANT: f64 = 1.0 / 9.0;

/// Limit of the optimal constant, `1 / sqrt(6e)`; reported, never used as a bound.
pub const LIMIT_CONSTANT_MAX: f64 = 0.247_615_104_941_601_63;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub ell: u64,
    /// Number of vectors; `None` when it does not fit in 64 bits.
    pub m: Option<u64>,
    pub layout: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub check: String,
    pub n: usize,
    /// `r` for the `C_{2r}` bound, `s` for the max bound.
    pub parameter: usize,
    pub bound_value: f64,
    pub achieved_value: f64,
    pub satisfied: bool,
    pub construction: Construction,
}

/// `C_{2r}(A) > sqrt(floor(n / (2r + 1)) / 2)`, checked against the exact
/// measure.
pub fn certify_theorem_c(seq: &BinarySequence, r: usize) -> Result<BoundReport> {
    let n = seq.len();
    if r == 0 || 2 * r > n {
        return Err(Error::domain(format!(
            "the C_2r bound needs 1 <= r <= n/2, got r = {r}, n = {n}"
        )));
    }
    let ell = n / (2 * r + 1);
    let bound_value = (0.5 * ell as f64).sqrt();
    let achieved = correlation_measure_exact(seq, 2 * r)?.value as f64;
    let construction = if ell == 0 {
        Construction {
            ell: 0,
            m: Some(0),
            layout: "none: ell = 0, bound is trivial".into(),
        }
    } else {
        Construction {
            ell: ell as u64,
            m: Some(((n - ell + 1) / r) as u64),
            layout: format!("consecutive blocks {{(i-1)*{r}, ..., i*{r}-1}} of {{0, ..., {}}}", n - ell),
        }
    };
    Ok(BoundReport {
        check: "theoremC".into(),
        n,
        parameter: r,
        bound_value,
        achieved_value: achieved,
        satisfied: achieved > bound_value,
        construction,
    })
}

/// `max{C_2, C_4, ..., C_{2s}}(A) > sqrt(s n) / 9`, checked against exact
/// measures. The `C(n - ell + 1, s)` vectors of the construction are not
/// materialized here.
pub fn certify_theorem_max(seq: &BinarySequence, s: usize) -> Result<BoundReport> {
    let n = seq.len();
    if n < 3 || s == 0 || 3 * s > n {
        return Err(Error::domain(format!(
            "the max bound needs n >= 3 and 1 <= s <= n/3, got s = {s}, n = {n}"
        )));
    }
    let bound_value = MAX_THEOREM_CONSTANT * ((s * n) as f64).sqrt();
    let mut achieved = 0u64;
    for k in 1..=s {
        achieved = achieved.max(correlation_measure_exact(seq, 2 * k)?.value);
    }
    let ell = n / 3;
    let m = binomial((n - ell + 1) as u64, s as u64)?;
    Ok(BoundReport {
        check: "max".into(),
        n,
        parameter: s,
        bound_value,
        achieved_value: achieved as f64,
        satisfied: achieved as f64 > bound_value,
        construction: Construction {
            ell: ell as u64,
            m: to_u64(&m),
            layout: format!("all {s}-subsets of {{0, ..., {}}} (not materialized)", n - ell),
        },
    })
}

/// Outcome of certifying a bound over all `2^n` sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveSummary {
    pub check: String,
    pub n: usize,
    pub parameter: usize,
    pub sequences: u64,
    pub violations: u64,
    pub bound_value: f64,
    pub min_achieved: f64,
}

impl ExhaustiveSummary {
    pub fn satisfied(&self) -> bool {
        self.violations == 0
    }
}

fn exhaustive<F>(n: usize, parameter: usize, check: &str, certify: F) -> Result<ExhaustiveSummary>
where
    F: Fn(&BinarySequence) -> Result<BoundReport> + Sync,
{
    let seqs: Vec<BinarySequence> = enumerate_all(n)?.collect();
    let reports: Vec<BoundReport> = seqs.par_iter().map(&certify).collect::<Result<_>>()?;
    let violations = reports.iter().filter(|r| !r.satisfied).count() as u64;
    let min_achieved = reports
        .iter()
        .map(|r| r.achieved_value)
        .fold(f64::INFINITY, f64::min);
    Ok(ExhaustiveSummary {
        check: check.into(),
        n,
        parameter,
        sequences: reports.len() as u64,
        violations,
        bound_value: reports[0].bound_value,
        min_achieved,
    })
}

pub fn certify_theorem_c_exhaustive(n: usize, r: usize) -> Result<ExhaustiveSummary> {
    exhaustive(n, r, "theoremC", |a| certify_theorem_c(a, r))
}

pub fn certify_theorem_max_exhaustive(n: usize, s: usize) -> Result<ExhaustiveSummary> {
    exhaustive(n, s, "max", |a| certify_theorem_max(a, s))
}
