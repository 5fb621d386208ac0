//! Welch bound on the largest off-diagonal scalar product, and the vector
//! families that turn correlation measures into such products.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{binomial, ln_biguint};
use crate::measures::{binomial_u128, ColexTuples};
use crate::seqcore::{random_sequence, BinarySequence, SeedSpec};
use crate::{Error, Result};

/// `m >= 2` vectors of common length `ell` with entries in `{-1, +1}`,
/// packed like [`BinarySequence`]. Every vector has squared norm `ell`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorFamily {
    ell: usize,
    vectors: Vec<BinarySequence>,
}

impl VectorFamily {
    pub fn new(vectors: Vec<BinarySequence>) -> Result<Self> {
        if vectors.len() < 2 {
            return Err(Error::domain(format!(
                "a vector family needs m >= 2 vectors, got {}",
                vectors.len()
            )));
        }
        let ell = vectors[0].len();
        if let Some(bad) = vectors.iter().position(|v| v.len() != ell) {
            return Err(Error::domain(format!(
                "vector {bad} has length {} but the family length is {ell}",
                vectors[bad].len()
            )));
        }
        Ok(Self { ell, vectors })
    }

    /// `m` independent uniform vectors of length `ell`, vector `i` drawn from
    /// stream `i` of `master_seed`.
    pub fn random(ell: usize, m: usize, master_seed: u64) -> Result<Self> {
        let vectors = (0..m as u64)
            .map(|i| random_sequence(ell, SeedSpec::new(master_seed, i)))
            .collect::<Result<_>>()?;
        Self::new(vectors)
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn m(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[BinarySequence] {
        &self.vectors
    }

    /// `<v_i, v_j> = ell - 2 * popcount(v_i XOR v_j)`.
    pub fn scalar(&self, i: usize, j: usize) -> i64 {
        let d: u32 = self.vectors[i]
            .words()
            .iter()
            .zip(self.vectors[j].words())
            .map(|(a, b)| (a ^ b).count_ones())
            .sum();
        self.ell as i64 - 2 * d as i64
    }

    pub fn squared_norm(&self, i: usize) -> i64 {
        self.scalar(i, i)
    }
}

/// `max_{i != j} |<v_i, v_j>|`.
pub fn max_offdiag_scalar(fam: &VectorFamily) -> u64 {
    let m = fam.m();
    let mut best = 0;
    for i in 0..m {
        for j in i + 1..m {
            best = best.max(fam.scalar(i, j).unsigned_abs());
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchBound {
    pub value: f64,
    /// The bracket `m / C(ell + k - 1, k) - 1` is not positive, so the
    /// bound says nothing and `value` is 0.
    pub vacuous: bool,
}

/// `[ell^{2k} / (m - 1) * (m / C(ell + k - 1, k) - 1)]^{1/(2k)}`.
pub fn welch_bound(ell: u64, m: u64, k: u64) -> Result<WelchBound> {
    if ell == 0 || m < 2 || k == 0 {
        return Err(Error::domain(format!(
            "Welch bound needs ell >= 1, m >= 2, k >= 1; got ell = {ell}, m = {m}, k = {k}"
        )));
    }
    let c = binomial(ell + k - 1, k)?;
    let m_big = BigUint::from(m);
    if m_big <= c {
        return Ok(WelchBound {
            value: 0.0,
            vacuous: true,
        });
    }
    let excess = &m_big - &c;
    let ln_inner = 2.0 * k as f64 * (ell as f64).ln() - ((m - 1) as f64).ln() + ln_biguint(&excess)
        - ln_biguint(&c);
    Ok(WelchBound {
        value: (ln_inner / (2 * k) as f64).exp(),
        vacuous: false,
    })
}

/// Vectors `v_{i,j} = prod_{x in S} a_{j+x}` for `j = 1..ell`, one per index
/// set `S`.
fn family_from_sets(seq: &BinarySequence, ell: usize, sets: &[Vec<usize>]) -> Result<VectorFamily> {
    let mut vectors = Vec::with_capacity(sets.len());
    for set in sets {
        let bits: Vec<bool> = (0..ell)
            .map(|j| set.iter().fold(false, |acc, &x| acc ^ seq.bit(j + x)))
            .collect();
        vectors.push(BinarySequence::from_bits(&bits)?);
    }
    VectorFamily::new(vectors)
}

/// Family for the `C_{2r}` lower bound: `ell = floor(n / (2r + 1))` and
/// `m = floor((n - ell + 1) / r)` disjoint `r`-element index sets, laid out
/// as consecutive blocks `S_i = {(i-1) r, ..., i r - 1}` inside
/// `{0, ..., n - ell}`.
pub fn theorem_c_construction(seq: &BinarySequence, r: usize) -> Result<VectorFamily> {
    if r == 0 {
        return Err(Error::domain("block size r must be at least 1"));
    }
    let n = seq.len();
    let ell = n / (2 * r + 1);
    if ell == 0 {
        return Err(Error::EmptyConstruction(format!(
            "n = {n} < 2r + 1 = {} gives ell = 0",
            2 * r + 1
        )));
    }
    let m = (n - ell + 1) / r;
    let sets: Vec<Vec<usize>> = (0..m).map(|i| (i * r..(i + 1) * r).collect()).collect();
    family_from_sets(seq, ell, &sets)
}

/// Largest family [`theorem_max_construction`] will materialize.
pub const MAX_MATERIALIZED_VECTORS: u128 = 100_000;

/// Family for the `max{C_2, ..., C_{2s}}` bound: `ell = floor(n / 3)` and
/// all `C(n - ell + 1, s)` subsets of `{0, ..., n - ell}` of size `s`.
pub fn theorem_max_construction(seq: &BinarySequence, s: usize) -> Result<VectorFamily> {
    let n = seq.len();
    if n < 3 || s == 0 || 3 * s > n {
        return Err(Error::domain(format!(
            "need n >= 3 and 1 <= s <= n/3, got n = {n}, s = {s}"
        )));
    }
    let ell = n / 3;
    let pool = n - ell + 1;
    let m = binomial_u128(pool as u64, s as u64)
        .filter(|&m| m <= MAX_MATERIALIZED_VECTORS)
        .ok_or_else(|| {
            Error::Resource(format!(
                "C({pool}, {s}) vectors exceed the materialization cap of {MAX_MATERIALIZED_VECTORS}"
            ))
        })?;
    // s-subsets of {0..pool-1}: shift colex tuples of order s+1 over a
    // sequence of length pool+1 down by one
    let sets: Vec<Vec<usize>> = ColexTuples::new(pool + 1, s + 1)
        .map(|t| t.offsets().iter().map(|&u| u - 1).collect())
        .collect();
    debug_assert_eq!(sets.len() as u128, m);
    family_from_sets(seq, ell, &sets)
}

/// Lossy helper for reporting; `None` past `u64`.
pub(crate) fn to_u64(x: &BigUint) -> Option<u64> {
    x.to_u64()
}
