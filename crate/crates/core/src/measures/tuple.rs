//! Shift tuples and their colexicographic enumeration.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Strictly increasing positive offsets `(u_2, ..., u_r)`; `u_1 = 0` is implicit.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ShiftTuple(Vec<usize>);

impl ShiftTuple {
    pub fn new(offsets: Vec<usize>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::InvalidTuple("at least one offset is required (r >= 2)".into()));
        }
        if offsets[0] == 0 {
            return Err(Error::InvalidTuple("offsets must be positive".into()));
        }
        if offsets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTuple(format!(
                "offsets {offsets:?} are not strictly increasing"
            )));
        }
        Ok(Self(offsets))
    }

    /// The order `r`, one more than the number of offsets.
    #[inline]
    pub fn order(&self) -> usize {
        self.0.len() + 1
    }

    #[inline]
    pub fn offsets(&self) -> &[usize] {
        &self.0
    }

    /// `u_r`, the largest offset.
    #[inline]
    pub fn last(&self) -> usize {
        *self.0.last().expect("non-empty")
    }

    pub(crate) fn check_fits(&self, n: usize) -> Result<()> {
        if self.last() >= n {
            return Err(Error::InvalidTuple(format!(
                "largest offset {} must be below the sequence length {n}",
                self.last()
            )));
        }
        Ok(())
    }

    /// Tuple seen from the far end: `(u_r - u_{r-1}, ..., u_r - u_1)`.
    pub fn mirrored(&self) -> Self {
        let last = self.last();
        let mut full = vec![0];
        full.extend_from_slice(&self.0);
        let offsets = full.iter().rev().skip(1).map(|&u| last - u).collect();
        Self(offsets)
    }
}

impl TryFrom<Vec<usize>> for ShiftTuple {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ShiftTuple> for Vec<usize> {
    fn from(t: ShiftTuple) -> Self {
        t.0
    }
}

impl fmt::Debug for ShiftTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ShiftTuple{:?}", self.0)
    }
}

/// `C(n, k)` in `u128`, or `None` on overflow.
pub(crate) fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (n - k + i) is divisible by i after the multiplication
        let num = n as u128 - k as u128 + i;
        let g = num_integer::gcd(acc, i);
        acc = (acc / g).checked_mul(num / (i / g))?;
    }
    Some(acc)
}

/// Number of tuples of order `r` that fit a sequence of length `n`, i.e.
/// `C(n-1, r-1)`.
pub fn tuple_count(n: usize, r: usize) -> Option<u128> {
    if r < 2 || r > n {
        return Some(0);
    }
    binomial_u128(n as u64 - 1, r as u64 - 1)
}

/// Colexicographic successor of a `k`-subset of `{1, ..., max}` stored
/// increasing in `c`. Returns false after the last subset.
#[inline]
pub(crate) fn colex_next(c: &mut [usize], max: usize) -> bool {
    let k = c.len();
    for i in 0..k {
        let limit = if i + 1 < k { c[i + 1] } else { max + 1 };
        if c[i] + 1 < limit {
            c[i] += 1;
            for (j, slot) in c.iter_mut().take(i).enumerate() {
                *slot = j + 1;
            }
            return true;
        }
    }
    false
}

/// Iterates all tuples of order `r` with `u_r < n` in colexicographic order
/// (ordered by `u_r`, then `u_{r-1}`, and so on).
pub struct ColexTuples {
    current: Vec<usize>,
    max: usize,
    started: bool,
    done: bool,
}

impl ColexTuples {
    pub fn new(n: usize, r: usize) -> Self {
        let k = r.saturating_sub(1);
        let done = r < 2 || r > n;
        Self {
            current: (1..=k).collect(),
            max: n.saturating_sub(1),
            started: false,
            done,
        }
    }

    /// Tuples whose largest offset is exactly `top`, in colex order.
    pub(crate) fn with_top(top: usize, r: usize) -> impl Iterator<Item = Vec<usize>> {
        let k = r - 2;
        let mut c: Vec<usize> = (1..=k).collect();
        let mut first = true;
        let empty = top < r - 1;
        std::iter::from_fn(move || {
            if empty {
                return None;
            }
            if !first && !colex_next(&mut c, top - 1) {
                return None;
            }
            first = false;
            let mut t = c.clone();
            t.push(top);
            Some(t)
        })
    }
}

impl Iterator for ColexTuples {
    type Item = ShiftTuple;

    fn next(&mut self) -> Option<ShiftTuple> {
        if self.done {
            return None;
        }
        if self.started && !colex_next(&mut self.current, self.max) {
            self.done = true;
            return None;
        }
        self.started = true;
        Some(ShiftTuple(self.current.clone()))
    }
}

/// Colexicographic rank of a tuple among all tuples of the same order.
pub fn colex_rank(t: &ShiftTuple) -> Option<u128> {
    let mut rank: u128 = 0;
    for (i, &u) in t.offsets().iter().enumerate() {
        rank = rank.checked_add(binomial_u128(u as u64 - 1, i as u64 + 1)?)?;
    }
    Some(rank)
}

/// Inverse of [`colex_rank`] for tuples of order `r`.
pub fn colex_unrank(mut rank: u128, r: usize) -> Option<ShiftTuple> {
    let k = r.checked_sub(1).filter(|&k| k >= 1)?;
    let mut out = vec![0usize; k];
    for i in (1..=k).rev() {
        // largest c with C(c, i) <= rank
        let mut lo = i as u64 - 1;
        let mut hi = lo + 1;
        let fits = |c: u64| binomial_u128(c, i as u64).is_some_and(|b| b <= rank);
        while fits(hi) {
            lo = hi;
            hi = hi.checked_mul(2)?;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        rank -= binomial_u128(lo, i as u64)?;
        out[i - 1] = lo as usize + 1;
    }
    Some(ShiftTuple(out))
}
