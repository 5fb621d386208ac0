//! Correlation sums, walk ranges and the correlation measure `C_r`.
//!
//! `C_r(A)` is computed through the shift-tuple form: for every tuple
//! `0 < u_2 < ... < u_r < n` the product sequence
//! `b_j = a_j a_{j+u_2} ... a_{j+u_r}` is formed by XOR of shifted copies of
//! the packed payload, and the largest window sum of `b` equals the range
//! (max minus min) of its prefix-sum path. `C_r` is the maximum range over
//! all tuples, so one exact evaluation costs `O(C(n-1, r-1) * n / 8)` table
//! lookups.

mod kernel;
mod tuple;

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::log_binomial;
use crate::seqcore::{BinarySequence, SeedSpec};
use crate::{Error, Result};

pub(crate) use tuple::binomial_u128;
pub use tuple::{colex_rank, colex_unrank, tuple_count, ColexTuples, ShiftTuple};

/// Default cap on `C(n-1, r-1) * n` for exact evaluation.
pub const DEFAULT_WORK_BUDGET: u64 = 1_000_000_000;

/// Value of `C_r` with an auditable witness.
///
/// `witness_window = (m1, m2)` is 1-based and inclusive over the product
/// sequence of `witness_tuple`, so
/// `|sum_{j=m1}^{m2} a_j a_{j+u_2} ... a_{j+u_r}| = value`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub n: usize,
    pub order: usize,
    pub value: u64,
    pub witness_tuple: ShiftTuple,
    pub witness_window: (usize, usize),
    /// True for exhaustive enumeration, false for a sampled lower bound.
    pub exact: bool,
}

impl CorrelationResult {
    /// Recomputes `|window sum|` of the witness on `seq`.
    pub fn replay(&self, seq: &BinarySequence) -> Result<u64> {
        let b = product_sequence(seq, &self.witness_tuple)?;
        let (m1, m2) = self.witness_window;
        if m1 == 0 || m1 > m2 || m2 > b.len() {
            return Err(Error::domain(format!(
                "window ({m1}, {m2}) outside product sequence of length {}",
                b.len()
            )));
        }
        Ok(kernel::window_sum(b.words(), m1 - 1, m2).unsigned_abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    pub work_budget: u64,
    /// Partition the enumeration by largest offset across the rayon pool.
    pub parallel: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            work_budget: DEFAULT_WORK_BUDGET,
            parallel: false,
        }
    }
}

/// `b_j = a_j a_{j+u_2} ... a_{j+u_r}` for `j = 1..n-u_r`.
pub fn product_sequence(seq: &BinarySequence, t: &ShiftTuple) -> Result<BinarySequence> {
    t.check_fits(seq.len())?;
    let len = seq.len() - t.last();
    let mut words = Vec::new();
    kernel::product_into(seq.words(), &with_zero(t.offsets()), len, &mut words);
    BinarySequence::from_words(len, words)
}

/// Full-length correlation sum `S_{u_2..u_r}(A)`.
pub fn correlation_sum(seq: &BinarySequence, t: &ShiftTuple) -> Result<i64> {
    t.check_fits(seq.len())?;
    let len = seq.len() - t.last();
    let mut words = Vec::new();
    kernel::product_into(seq.words(), &with_zero(t.offsets()), len, &mut words);
    Ok(kernel::total_sum(&words, len))
}

/// Largest absolute window sum of the walk with the given steps, computed
/// as max minus min over the prefix sums `P_0 = 0, ..., P_n`.
pub fn range_of_walk(steps: &BinarySequence) -> u64 {
    kernel::walk_range(steps.words(), steps.len()) as u64
}

fn with_zero(offsets: &[usize]) -> Vec<usize> {
    let mut v = Vec::with_capacity(offsets.len() + 1);
    v.push(0);
    v.extend_from_slice(offsets);
    v
}

fn check_order(n: usize, r: usize) -> Result<()> {
    if r < 2 {
        return Err(Error::domain(format!("order r = {r} must be at least 2")));
    }
    if r > n {
        return Err(Error::domain(format!(
            "order r = {r} exceeds the sequence length {n}"
        )));
    }
    Ok(())
}

/// Cost estimate `C(n-1, r-1) * n` used to gate exact evaluation.
pub fn exact_work(n: usize, r: usize) -> Option<u128> {
    tuple_count(n, r)?.checked_mul(n as u128)
}

/// Whether [`correlation_measure_exact`] accepts `(n, r)` under `budget`.
pub fn exact_feasible(n: usize, r: usize, budget: u64) -> bool {
    r >= 2 && r <= n && exact_work(n, r).is_some_and(|w| w <= budget as u128)
}

/// Best tuple among those with largest offset `top`, skipping the group
/// when it cannot beat `floor`. Returns `(value, local index, offsets)`.
fn best_in_group(
    seq: &BinarySequence,
    r: usize,
    top: usize,
    floor: u32,
    scratch: &mut Vec<u64>,
) -> Option<(u32, usize, Vec<usize>)> {
    let n = seq.len();
    let len = n - top;
    if len as u32 <= floor {
        return None;
    }
    let mut best: Option<(u32, usize, Vec<usize>)> = None;
    let mut offsets = vec![0usize; r];
    for (idx, t) in ColexTuples::with_top(top, r).enumerate() {
        offsets[1..].copy_from_slice(&t);
        kernel::product_into(seq.words(), &offsets, len, scratch);
        let v = kernel::walk_range(scratch, len);
        let current = best.as_ref().map_or(floor, |b| b.0);
        if v > current {
            let full = v as usize == len;
            best = Some((v, idx, t));
            if full {
                break;
            }
        }
    }
    best
}

fn witness(seq: &BinarySequence, r: usize, value: u32, offsets: Vec<usize>, exact: bool) -> CorrelationResult {
    let t = ShiftTuple::new(offsets).expect("enumerated tuples are valid");
    let len = seq.len() - t.last();
    let mut words = Vec::new();
    kernel::product_into(seq.words(), &with_zero(t.offsets()), len, &mut words);
    let (range, arg_hi, arg_lo) = kernel::walk_range_with_positions(&words, len);
    debug_assert_eq!(range, value);
    let (a, b) = (arg_hi.min(arg_lo), arg_hi.max(arg_lo));
    CorrelationResult {
        n: seq.len(),
        order: r,
        value: value as u64,
        witness_tuple: t,
        witness_window: (a + 1, b),
        exact,
    }
}

/// Exact `C_r(A)` with the default work budget.
pub fn correlation_measure_exact(seq: &BinarySequence, r: usize) -> Result<CorrelationResult> {
    correlation_measure_exact_with(seq, r, ExactOptions::default())
}

/// Exact `C_r(A)`.
///
/// The witness is the first maximizing tuple in colexicographic order; the
/// parallel path reduces by (value, enumeration index) and therefore returns
/// the same result for any pool size.
pub fn correlation_measure_exact_with(
    seq: &BinarySequence,
    r: usize,
    opts: ExactOptions,
) -> Result<CorrelationResult> {
    let n = seq.len();
    check_order(n, r)?;
    match exact_work(n, r) {
        Some(w) if w <= opts.work_budget as u128 => {}
        _ => {
            return Err(Error::Resource(format!(
                "exact C_{r} at n = {n} needs C({}, {}) * {n} steps, above the budget of {}; \
                 use the sampled measure instead",
                n - 1,
                r - 1,
                opts.work_budget
            )))
        }
    }

    let best = if opts.parallel {
        use std::sync::atomic::{AtomicU32, Ordering};
        let floor = AtomicU32::new(0);
        (r - 1..n)
            .into_par_iter()
            .map_init(Vec::new, |scratch, top| {
                // ties with other groups must still be reported so the
                // smallest enumeration index wins the reduction
                let tie_floor = floor.load(Ordering::Relaxed).saturating_sub(1);
                let found = best_in_group(seq, r, top, tie_floor, scratch);
                if let Some((v, _, _)) = &found {
                    floor.fetch_max(*v, Ordering::Relaxed);
                }
                found.map(|(v, idx, t)| (v, top, idx, t))
            })
            .flatten()
            .reduce_with(|a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                    b
                } else {
                    a
                }
            })
            .map(|(v, _, _, t)| (v, t))
    } else {
        let mut scratch = Vec::new();
        let mut best: Option<(u32, Vec<usize>)> = None;
        for top in r - 1..n {
            let floor = best.as_ref().map_or(0, |b| b.0);
            if (n - top) as u32 <= floor {
                break;
            }
            if let Some((v, _, t)) = best_in_group(seq, r, top, floor, &mut scratch) {
                best = Some((v, t));
            }
        }
        best
    };
    let (value, offsets) = best.expect("every sequence has C_r >= 1");
    Ok(witness(seq, r, value, offsets, true))
}

/// Sampled lower bound on `C_r(A)` over `tuple_budget` random tuples.
///
/// Tuples are drawn by colexicographic unranking: without replacement when
/// the budget is at most half the tuple count, with replacement above that,
/// and exhaustively once the budget covers every tuple. The witness is the
/// first maximizer in draw order.
pub fn correlation_measure_sampled(
    seq: &BinarySequence,
    r: usize,
    tuple_budget: u64,
    seed: SeedSpec,
) -> Result<CorrelationResult> {
    let n = seq.len();
    check_order(n, r)?;
    if tuple_budget == 0 {
        return Err(Error::domain("tuple budget must be at least 1"));
    }
    let total = tuple_count(n, r);
    if let Some(total) = total {
        if tuple_budget as u128 >= total {
            let mut res = correlation_measure_exact_with(
                seq,
                r,
                ExactOptions {
                    work_budget: u64::MAX,
                    parallel: false,
                },
            )?;
            res.exact = false;
            return Ok(res);
        }
    }

    let mut rng = seed.rng();
    let tuples: Vec<Vec<usize>> = match total {
        Some(total) if tuple_budget as u128 <= total / 2 => {
            // Floyd's sampling of distinct ranks, kept in draw order
            let mut seen = HashSet::with_capacity(tuple_budget as usize);
            let mut ranks = Vec::with_capacity(tuple_budget as usize);
            for j in total - tuple_budget as u128..total {
                let t = rng.random_range(0..=j);
                let pick = if seen.contains(&t) { j } else { t };
                seen.insert(pick);
                ranks.push(pick);
            }
            ranks
                .into_iter()
                .map(|k| colex_unrank(k, r).expect("rank in range").into())
                .collect()
        }
        Some(total) => (0..tuple_budget)
            .map(|_| {
                let k = rng.random_range(0..total);
                colex_unrank(k, r).expect("rank in range").into()
            })
            .collect(),
        None => (0..tuple_budget)
            .map(|_| random_subset(&mut rng, n - 1, r - 1))
            .collect(),
    };

    let mut scratch = Vec::new();
    let mut offsets = vec![0usize; r];
    let mut best: Option<(u32, Vec<usize>)> = None;
    for t in tuples {
        let len = n - t[r - 2];
        offsets[1..].copy_from_slice(&t);
        kernel::product_into(seq.words(), &offsets, len, &mut scratch);
        let v = kernel::walk_range(&scratch, len);
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, t));
        }
    }
    let (value, offsets) = best.expect("budget >= 1");
    Ok(witness(seq, r, value, offsets, false))
}

/// Uniform `k`-subset of `{1, ..., max}`, sorted (Floyd's algorithm).
fn random_subset<R: Rng>(rng: &mut R, max: usize, k: usize) -> Vec<usize> {
    let mut chosen = HashSet::with_capacity(k);
    for j in max - k + 1..=max {
        let t = rng.random_range(1..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut v: Vec<usize> = chosen.into_iter().collect();
    v.sort_unstable();
    v
}

/// The scale `sqrt(2 n ln C(n, r-1))` under which `C_r` of a random
/// sequence tends to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub n: usize,
    pub r: usize,
    pub value: f64,
}

impl Normalization {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if r < 2 || n <= r {
            return Err(Error::domain(format!(
                "normalization needs n > r >= 2, got n = {n}, r = {r}"
            )));
        }
        let value = (2.0 * n as f64 * log_binomial(n as u64, r as u64 - 1)?).sqrt();
        Ok(Self { n, r, value })
    }
}

pub fn normalization(n: usize, r: usize) -> Result<Normalization> {
    Normalization::new(n, r)
}

/// `C_r(A) / sqrt(2 n ln C(n, r-1))`.
pub fn normalized_ratio(seq: &BinarySequence, r: usize) -> Result<f64> {
    let norm = Normalization::new(seq.len(), r)?;
    let c = correlation_measure_exact(seq, r)?;
    Ok(c.value as f64 / norm.value)
}
