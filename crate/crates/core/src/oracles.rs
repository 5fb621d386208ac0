//! Brute-force reference implementations.
//!
//! Everything here works on plain `i8` symbols and small integers, shares no
//! code with the bit-parallel kernels, and returns exact integers or
//! rationals. Each function is guarded to the scale at which exhaustive
//! enumeration is cheap.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::bounds::{binomial, double_factorial_odd};
use crate::measures::ShiftTuple;
use crate::seqcore::BinarySequence;
use crate::{Error, Result};

pub const NAIVE_MAX_LEN: usize = 20;
pub const NAIVE_MAX_ORDER: usize = 5;
/// Largest `n` whose `2^n` sequences the averaging oracles enumerate.
pub const AVERAGE_MAX_LEN: usize = 16;
/// Enumeration budget of the even-tuple counters.
pub const COUNT_BUDGET: u64 = 10_000_000;

fn guard(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Resource(msg()))
    }
}

/// Calls `f` on every `r`-subset of `{0, ..., n-1}` in lexicographic order.
fn for_each_subset(n: usize, r: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        f(&idx);
        let Some(i) = (0..r).rev().find(|&i| idx[i] < n - r + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn naive_on_symbols(a: &[i8], r: usize) -> u64 {
    let n = a.len();
    let mut best = 0i64;
    for_each_subset(n, r, |u| {
        let last = u[r - 1];
        let mut s = 0i64;
        for j in 0..n - last {
            let prod: i8 = u.iter().map(|&x| a[j + x]).product();
            s += prod as i64;
            best = best.max(s.abs());
        }
    });
    best as u64
}

/// `C_r(A)` straight from the definition: maximum over
/// `0 <= u_1 < ... < u_r < n` and `1 <= m <= n - u_r` of
/// `|sum_{j=1}^m a_{j+u_1} ... a_{j+u_r}|`.
pub fn naive_correlation_measure(seq: &BinarySequence, r: usize) -> Result<u64> {
    let n = seq.len();
    if r < 2 || r > n {
        return Err(Error::domain(format!("order r = {r} must satisfy 2 <= r <= n = {n}")));
    }
    guard(n <= NAIVE_MAX_LEN && r <= NAIVE_MAX_ORDER, || {
        format!("naive oracle is limited to n <= {NAIVE_MAX_LEN}, r <= {NAIVE_MAX_ORDER}; got n = {n}, r = {r}")
    })?;
    Ok(naive_on_symbols(&seq.symbols(), r))
}

/// Even-length tuple together with its evenness degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvenTuple {
    pub entries: Vec<u64>,
    pub evenness_degree: usize,
}

impl EvenTuple {
    pub fn new(entries: Vec<u64>) -> Result<Self> {
        let evenness_degree = evenness_degree(&entries)?;
        Ok(Self {
            entries,
            evenness_degree,
        })
    }

    pub fn is_even(&self) -> bool {
        2 * self.evenness_degree == self.entries.len()
    }
}

/// Largest `d` such that some permutation pairs the first `2d` entries into
/// equal-valued pairs: `min(m, sum_x floor(mult(x) / 2))`.
pub fn evenness_degree(entries: &[u64]) -> Result<usize> {
    if entries.len() % 2 == 1 {
        return Err(Error::domain(format!(
            "evenness needs an even-length tuple, got length {}",
            entries.len()
        )));
    }
    let mut mult: BTreeMap<u64, usize> = BTreeMap::new();
    for &x in entries {
        *mult.entry(x).or_default() += 1;
    }
    let pairs: usize = mult.values().map(|c| c / 2).sum();
    Ok(pairs.min(entries.len() / 2))
}

/// An exhaustive count next to the bound it is checked against. The
/// comparison is done in exact arithmetic; `bound` is for display.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountCheck {
    pub count: u64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Visits every point of the box `[lo_1, hi_1] x ... x [lo_k, hi_k]` in
/// odometer order (last coordinate fastest).
fn odometer(ranges: &[(u64, u64)], mut visit: impl FnMut(&[u64])) {
    let mut cur: Vec<u64> = ranges.iter().map(|r| r.0).collect();
    if ranges.iter().any(|r| r.0 > r.1) {
        return;
    }
    loop {
        visit(&cur);
        let mut k = cur.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if cur[k] < ranges[k].1 {
                cur[k] += 1;
                break;
            }
            cur[k] = ranges[k].0;
        }
    }
}

fn checked_pow(base: u64, exp: u64) -> Option<u64> {
    base.checked_pow(u32::try_from(exp).ok()?)
}

/// Number of even tuples in `{1, ..., m}^{2q}`, checked against
/// `(2q - 1)!! m^q`.
pub fn count_even_tuples(m: u64, q: u64) -> Result<CountCheck> {
    if m == 0 || q == 0 {
        return Err(Error::domain(format!("need m, q >= 1, got m = {m}, q = {q}")));
    }
    guard(checked_pow(m, 2 * q).is_some_and(|w| w <= COUNT_BUDGET), || {
        format!("m^(2q) = {m}^{} exceeds the enumeration budget {COUNT_BUDGET}", 2 * q)
    })?;
    let ranges = vec![(1, m); 2 * q as usize];
    let mut count = 0u64;
    let mut parity = vec![false; m as usize + 1];
    odometer(&ranges, |t| {
        parity.iter_mut().for_each(|p| *p = false);
        for &x in t {
            parity[x as usize] ^= true;
        }
        if parity.iter().all(|p| !p) {
            count += 1;
        }
    });
    let bound = double_factorial_odd(q)? * BigUint::from(m).pow(q as u32);
    Ok(CountCheck {
        count,
        bound: bound.to_f64().unwrap_or(f64::INFINITY),
        satisfied: BigUint::from(count) <= bound,
    })
}

fn single_offset(t: &ShiftTuple, n: u64, name: &str) -> Result<u64> {
    if t.order() != 2 {
        return Err(Error::domain(format!(
            "{name} must have order 2 (a single offset), got order {}",
            t.order()
        )));
    }
    let u = t.last() as u64;
    if u >= n {
        return Err(Error::InvalidTuple(format!("{name} offset {u} must be below n = {n}")));
    }
    Ok(u)
}

/// Number of even tuples `(x_i, x_i + u_2, y_i, y_i + v_2)_{i = 1..2q}` over
/// `{1, ..., n}` whose `x` part is `d`-even for some `d < q - t`, checked
/// against `(8q - 1)!! n^{2q - (t+1)/3}`. Order 2 only.
pub fn count_constrained_even(n: u64, q: u64, t: u64, u: &ShiftTuple, v: &ShiftTuple) -> Result<CountCheck> {
    if n == 0 || q == 0 || t >= q {
        return Err(Error::domain(format!(
            "need n, q >= 1 and 0 <= t < q, got n = {n}, q = {q}, t = {t}"
        )));
    }
    if u == v {
        return Err(Error::domain("the two shift tuples must differ"));
    }
    let du = single_offset(u, n, "u")?;
    let dv = single_offset(v, n, "v")?;
    guard(checked_pow(n, 4 * q).is_some_and(|w| w <= COUNT_BUDGET), || {
        format!("n^(4q) = {n}^{} exceeds the enumeration budget {COUNT_BUDGET}", 4 * q)
    })?;
    let k = 2 * q as usize;
    let mut ranges = vec![(1, n - du); k];
    ranges.extend(vec![(1, n - dv); k]);
    let mut count = 0u64;
    let mut parity = vec![false; n as usize + 1];
    let mut xmult = vec![0usize; n as usize + 1];
    odometer(&ranges, |tup| {
        parity.iter_mut().for_each(|p| *p = false);
        for &x in &tup[..k] {
            parity[x as usize] ^= true;
            parity[(x + du) as usize] ^= true;
        }
        for &y in &tup[k..] {
            parity[y as usize] ^= true;
            parity[(y + dv) as usize] ^= true;
        }
        if parity.iter().any(|&p| p) {
            return;
        }
        xmult.iter_mut().for_each(|c| *c = 0);
        for &x in &tup[..k] {
            xmult[x as usize] += 1;
        }
        let d = xmult.iter().map(|c| c / 2).sum::<usize>().min(q as usize);
        if (d as u64) < q - t {
            count += 1;
        }
    });
    // count <= D n^{e/3}  <=>  count^3 <= D^3 n^e
    let r = 2u64;
    let dfact = double_factorial_odd(2 * r * q)?;
    let e = 6 * q - t - 1;
    let satisfied = BigUint::from(count).pow(3) <= dfact.pow(3) * BigUint::from(n).pow(e as u32);
    let bound = dfact.to_f64().unwrap_or(f64::INFINITY) * (n as f64).powf(e as f64 / 3.0);
    Ok(CountCheck {
        count,
        bound,
        satisfied,
    })
}

fn serialize_ratio<S: Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Exact `E[(S_u S_v)^{2p}]` against the moment bound
/// `n^{2p} [(2p-1)!!]^2 (1 + (4rp)^{4rh} / n^{1/3} + (4rp)^{2rp} / n^{(h+1)/3})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheck {
    pub n: usize,
    pub r: usize,
    pub p: u32,
    pub h: u32,
    pub u: ShiftTuple,
    pub v: ShiftTuple,
    #[serde(serialize_with = "serialize_ratio")]
    pub exact_moment: BigRational,
    pub bound: f64,
    pub satisfied: bool,
}

fn full_sum(a: &[i8], offsets: &[usize]) -> i64 {
    let last = *offsets.last().expect("non-empty");
    (0..a.len() - last)
        .map(|j| offsets.iter().fold(a[j] as i64, |acc, &x| acc * a[j + x] as i64))
        .sum()
}

/// Symbols of the sequence whose bit pattern is `code` (bit `j` set means
/// `a_{j+1} = -1`).
fn symbols_of(code: u64, n: usize) -> Vec<i8> {
    (0..n).map(|j| if (code >> j) & 1 == 1 { -1 } else { 1 }).collect()
}

pub fn moment_bound(n: usize, r: usize, p: u32, h: u32) -> f64 {
    let nf = n as f64;
    let df = (1..=p).map(|i| (2 * i - 1) as f64).product::<f64>();
    let base = (4 * r) as f64 * p as f64;
    nf.powi(2 * p as i32)
        * df
        * df
        * (1.0
            + base.powi((4 * r) as i32 * h as i32) / nf.cbrt()
            + base.powi((2 * r) as i32 * p as i32) / nf.powf((h + 1) as f64 / 3.0))
}

pub fn exact_moment(n: usize, u: &ShiftTuple, v: &ShiftTuple, p: u32, h: u32) -> Result<MomentCheck> {
    if p == 0 || h >= p {
        return Err(Error::domain(format!("need 0 <= h < p, got p = {p}, h = {h}")));
    }
    if u == v {
        return Err(Error::domain("the two shift tuples must differ"));
    }
    if u.order() != v.order() {
        return Err(Error::domain("the two shift tuples must have the same order"));
    }
    for (t, name) in [(u, "u"), (v, "v")] {
        if t.last() >= n {
            return Err(Error::InvalidTuple(format!(
                "{name} offset {} must be below n = {n}",
                t.last()
            )));
        }
    }
    guard(n <= AVERAGE_MAX_LEN && p <= 3, || {
        format!("moment oracle is limited to n <= {AVERAGE_MAX_LEN}, p <= 3; got n = {n}, p = {p}")
    })?;
    let r = u.order();
    let total: u128 = (0..1u64 << n)
        .into_par_iter()
        .map(|code| {
            let a = symbols_of(code, n);
            let prod = full_sum(&a, u.offsets()) * full_sum(&a, v.offsets());
            (prod.unsigned_abs() as u128).pow(2 * p)
        })
        .sum();
    let exact_moment = BigRational::new(BigInt::from(total), BigInt::one() << n);
    let bound = moment_bound(n, r, p, h);
    let satisfied = exact_moment.to_f64().is_some_and(|m| m <= bound);
    Ok(MomentCheck {
        n,
        r,
        p,
        h,
        u: u.clone(),
        v: v.clone(),
        exact_moment,
        bound,
        satisfied,
    })
}

/// `E[C_r(A_n)]` over all `2^n` sequences, through the literal definition.
pub fn exact_expected_measure(n: usize, r: usize) -> Result<BigRational> {
    if r < 2 || r > n {
        return Err(Error::domain(format!("order r = {r} must satisfy 2 <= r <= n = {n}")));
    }
    guard(n <= AVERAGE_MAX_LEN && r <= 4, || {
        format!("expectation oracle is limited to n <= {AVERAGE_MAX_LEN}, r <= 4; got n = {n}, r = {r}")
    })?;
    let total: u64 = (0..1u64 << n)
        .into_par_iter()
        .map(|code| naive_on_symbols(&symbols_of(code, n), r))
        .sum();
    Ok(BigRational::new(BigInt::from(total), BigInt::one() << n))
}

/// `Pr[|S_u(A_n)| >= lambda]`: `S_u` is a sum of `n - u_r` independent
/// fair `+-1` steps, so this is a two-sided binomial tail.
pub fn exact_tail(n: usize, u: &ShiftTuple, lambda: f64) -> Result<BigRational> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::domain(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if u.last() >= n {
        return Err(Error::InvalidTuple(format!(
            "largest offset {} must be below n = {n}",
            u.last()
        )));
    }
    guard(n <= NAIVE_MAX_LEN, || {
        format!("tail oracle is limited to n <= {NAIVE_MAX_LEN}, got n = {n}")
    })?;
    let steps = (n - u.last()) as u64;
    let mut mass = BigUint::zero();
    for k in 0..=steps {
        let dev = (2 * k as i64 - steps as i64).unsigned_abs() as f64;
        if dev >= lambda {
            mass += binomial(steps, k)?;
        }
    }
    Ok(BigRational::new(mass.into(), BigInt::one() << steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::{enumerate_all, random_sequence, SeedSpec};

    fn tup(v: &[usize]) -> ShiftTuple {
        ShiftTuple::new(v.to_vec()).unwrap()
    }

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn naive_examples() {
        let alt = BinarySequence::alternating(7).unwrap();
        assert_eq!(naive_correlation_measure(&alt, 3).unwrap(), 1);
        let ones = BinarySequence::all_ones(5).unwrap();
        assert_eq!(naive_correlation_measure(&ones, 2).unwrap(), 4);
        let a = BinarySequence::from_symbols(&[1, 1, 1, -1]).unwrap();
        assert_eq!(naive_correlation_measure(&a, 2).unwrap(), 2);
        assert!(matches!(
            naive_correlation_measure(&BinarySequence::all_ones(21).unwrap(), 2),
            Err(Error::Resource(_))
        ));
        assert!(naive_correlation_measure(&ones, 6).is_err());
        assert!(naive_correlation_measure(&ones, 1).is_err());
    }

    #[test]
    fn subsets_are_lexicographic() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |s| seen.push(s.to_vec()));
        assert_eq!(
            seen,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
    }

    /// Literal definition: search permutations for the largest prefix of
    /// equal pairs.
    fn degree_by_search(t: &[u64]) -> usize {
        fn best(rest: &mut Vec<u64>) -> usize {
            let mut top = 0;
            for i in 0..rest.len() {
                for j in i + 1..rest.len() {
                    if rest[i] == rest[j] {
                        let (a, b) = (rest.remove(j), rest.remove(i));
                        top = top.max(1 + best(rest));
                        rest.insert(i, b);
                        rest.insert(j, a);
                    }
                }
            }
            top
        }
        best(&mut t.to_vec())
    }

    #[test]
    fn evenness_examples() {
        assert_eq!(evenness_degree(&[1, 3, 1, 4, 3, 4]).unwrap(), 3);
        assert!(EvenTuple::new(vec![1, 3, 1, 4, 3, 4]).unwrap().is_even());
        let t = EvenTuple::new(vec![2, 1, 1, 2, 1, 3]).unwrap();
        assert_eq!(t.evenness_degree, 2);
        assert!(!t.is_even());
        assert_eq!(evenness_degree(&[5, 5]).unwrap(), 1);
        assert_eq!(evenness_degree(&[]).unwrap(), 0);
        assert!(evenness_degree(&[1, 2, 3]).is_err());
    }

    #[test]
    fn evenness_closed_form_matches_search() {
        for len in [0usize, 2, 4, 6] {
            let ranges = vec![(1, 3); len];
            odometer(&ranges, |t| {
                assert_eq!(evenness_degree(t).unwrap(), degree_by_search(t), "{t:?}");
            });
        }
        odometer(&[(1, 4); 8], |t| {
            if t[0] <= 2 {
                assert_eq!(evenness_degree(t).unwrap(), degree_by_search(t), "{t:?}");
            }
        });
    }

    #[test]
    fn even_count_examples() {
        let c = count_even_tuples(1, 1).unwrap();
        assert_eq!((c.count, c.bound, c.satisfied), (1, 1.0, true));
        let c = count_even_tuples(3, 1).unwrap();
        assert_eq!((c.count, c.bound), (3, 3.0));
        // (x,x,y,y) patterns: 3 all-equal + 3 pairings * 6 ordered distinct pairs / 2
        let c = count_even_tuples(3, 2).unwrap();
        assert_eq!(c.count, 21);
        assert_eq!(c.bound, 27.0);
        assert!(c.satisfied);
        assert!(matches!(count_even_tuples(100, 4), Err(Error::Resource(_))));
        assert!(count_even_tuples(0, 1).is_err());
    }

    #[test]
    fn even_count_closed_form() {
        // even tuples of length 2q over m values counted by the number of
        // ways to split 2q positions into even-sized classes
        fn closed(m: u64, q: u64) -> u64 {
            // coefficient extraction: (2q)! [x^{2q}] cosh(x)^m, via DP over values
            let len = 2 * q as usize;
            let mut ways = vec![0u64; len + 1];
            ways[0] = 1;
            let binom = |a: usize, b: usize| binomial(a as u64, b as u64).unwrap().to_u64().unwrap();
            for _ in 0..m {
                let mut next = vec![0u64; len + 1];
                for used in 0..=len {
                    for k in (0..=len - used).step_by(2) {
                        next[used + k] += ways[used] * binom(len - used, k);
                    }
                }
                ways = next;
            }
            ways[len]
        }
        for m in 1..=6 {
            for q in 1..=3 {
                assert_eq!(count_even_tuples(m, q).unwrap().count, closed(m, q), "m={m} q={q}");
            }
        }
    }

    #[test]
    fn constrained_examples() {
        let c = count_constrained_even(4, 1, 0, &tup(&[1]), &tup(&[2])).unwrap();
        assert!(c.satisfied);
        assert!((c.bound - 105.0 * 4f64.powf(5.0 / 3.0)).abs() < 1e-9);
        let c = count_constrained_even(5, 1, 0, &tup(&[1]), &tup(&[3])).unwrap();
        assert!(c.satisfied);
        assert!(count_constrained_even(5, 1, 0, &tup(&[1]), &tup(&[1])).is_err());
        assert!(count_constrained_even(5, 1, 1, &tup(&[1]), &tup(&[2])).is_err());
        assert!(count_constrained_even(5, 1, 0, &tup(&[1, 2]), &tup(&[3])).is_err());
        assert!(count_constrained_even(5, 1, 0, &tup(&[1]), &tup(&[5])).is_err());
        assert!(matches!(
            count_constrained_even(10, 2, 0, &tup(&[1]), &tup(&[2])),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn constrained_q1_by_hand() {
        // q = 1, t = 0: x part (x1, x2) must be 0-even, i.e. x1 != x2, and the
        // eight values must pair up. Independent count by brute force over
        // the same variables with a sort-based evenness test.
        let (n, du, dv) = (5u64, 1u64, 3u64);
        let mut want = 0;
        for x1 in 1..=n - du {
            for x2 in 1..=n - du {
                for y1 in 1..=n - dv {
                    for y2 in 1..=n - dv {
                        let mut all = [x1, x1 + du, x2, x2 + du, y1, y1 + dv, y2, y2 + dv];
                        all.sort_unstable();
                        let even = all.chunks(2).all(|c| c[0] == c[1]);
                        if even && x1 != x2 {
                            want += 1;
                        }
                    }
                }
            }
        }
        let c = count_constrained_even(n, 1, 0, &tup(&[1]), &tup(&[3])).unwrap();
        assert_eq!(c.count, want);
    }

    /// Count of even tuples `(x_i, x_i+u, y_i, y_i+v)_{i=1..2p}`, which the
    /// moment equals by expanding the product and using `E[a_j] = 0`.
    fn even_tuple_moment(n: u64, du: u64, dv: u64, p: usize) -> u64 {
        let mut ranges = vec![(1, n - du); 2 * p];
        ranges.extend(vec![(1, n - dv); 2 * p]);
        let mut count = 0;
        odometer(&ranges, |t| {
            let mut mask = 0u64;
            for &x in &t[..2 * p] {
                mask ^= 1 << x;
                mask ^= 1 << (x + du);
            }
            for &y in &t[2 * p..] {
                mask ^= 1 << y;
                mask ^= 1 << (y + dv);
            }
            if mask == 0 {
                count += 1;
            }
        });
        count
    }

    #[test]
    fn moment_matches_even_tuple_count() {
        for (n, dv, p) in [(8usize, 2u64, 1u32), (8, 3, 1), (6, 2, 2), (7, 3, 2)] {
            let m = exact_moment(n, &tup(&[1]), &tup(&[dv as usize]), p, 0).unwrap();
            let want = even_tuple_moment(n as u64, 1, dv, p as usize);
            assert_eq!(m.exact_moment, ratio(want as i64, 1), "n={n} v={dv} p={p}");
            assert!(m.satisfied);
        }
    }

    #[test]
    fn moment_examples() {
        let m = exact_moment(8, &tup(&[1]), &tup(&[2]), 1, 0).unwrap();
        assert!(m.satisfied);
        assert!(m.exact_moment.is_integer());
        let m = exact_moment(10, &tup(&[1]), &tup(&[3]), 2, 1).unwrap();
        assert!(m.satisfied);
        assert!(exact_moment(8, &tup(&[1]), &tup(&[2]), 1, 1).is_err());
        assert!(exact_moment(8, &tup(&[1]), &tup(&[1]), 1, 0).is_err());
        assert!(exact_moment(8, &tup(&[1]), &tup(&[1, 2]), 1, 0).is_err());
        assert!(matches!(
            exact_moment(17, &tup(&[1]), &tup(&[2]), 1, 0),
            Err(Error::Resource(_))
        ));
        let v = serde_json::to_value(&m).unwrap();
        assert!(v["exact_moment"].is_string());
    }

    #[test]
    fn moment_bound_value() {
        // n=8, r=2, p=1, h=0: 64 * (1 + 1/2 + 8^4/8^{1/3}) = 64 * (1.5 + 2048)
        assert!((moment_bound(8, 2, 1, 0) - 64.0 * 2049.5).abs() < 1e-6);
    }

    #[test]
    fn expected_measure_examples() {
        for n in 2..=4 {
            assert_eq!(exact_expected_measure(n, n).unwrap(), ratio(1, 1));
        }
        // frozen from an independent enumeration
        let brute: u64 = enumerate_all(4)
            .unwrap()
            .map(|s| naive_correlation_measure(&s, 2).unwrap())
            .sum();
        assert_eq!(exact_expected_measure(4, 2).unwrap(), ratio(brute as i64, 16));
        assert_eq!(exact_expected_measure(4, 2).unwrap(), ratio(9, 4));
        assert_eq!(exact_expected_measure(12, 2).unwrap(), ratio(5729, 1024));
        assert!(exact_expected_measure(17, 2).is_err());
        assert!(exact_expected_measure(10, 5).is_err());
    }

    #[test]
    fn tail_examples() {
        let u = tup(&[2]);
        assert_eq!(exact_tail(12, &u, 0.0).unwrap(), ratio(1, 1));
        assert_eq!(exact_tail(12, &u, 11.0).unwrap(), ratio(0, 1));
        let t = exact_tail(12, &u, 4.0).unwrap();
        assert_eq!(t, ratio(352, 1024));
        assert_eq!(t.to_f64().unwrap(), 0.34375);
        assert!(exact_tail(21, &u, 1.0).is_err());
        assert!(exact_tail(12, &u, -1.0).is_err());
        assert!(exact_tail(2, &u, 1.0).is_err());
    }

    #[test]
    fn tail_matches_enumeration() {
        // dual route: enumerate all sequences and tabulate |S_u|
        for (n, offsets) in [(10usize, vec![1usize]), (12, vec![2, 5]), (11, vec![3, 4, 9])] {
            let u = tup(&offsets);
            let mut hist = BTreeMap::new();
            for code in 0..1u64 << n {
                let s = full_sum(&symbols_of(code, n), &offsets).unsigned_abs();
                *hist.entry(s).or_insert(0i64) += 1;
            }
            for lambda in 0..=n as u64 + 1 {
                let hits: i64 = hist.range(lambda..).map(|(_, c)| c).sum();
                assert_eq!(
                    exact_tail(n, &u, lambda as f64).unwrap(),
                    ratio(hits, 1 << n),
                    "n={n} u={offsets:?} lambda={lambda}"
                );
            }
        }
    }

    #[test]
    fn tail_monotone_and_hoeffding() {
        for n in 4..=20usize {
            for last in 1..n {
                let u = tup(&[last]);
                let steps = (n - last) as f64;
                let mut prev = 1.0f64;
                for i in 0..=4 * n {
                    let lambda = i as f64 / 2.0;
                    let p = exact_tail(n, &u, lambda).unwrap().to_f64().unwrap();
                    assert!(p <= prev);
                    assert!(p <= 2.0 * (-lambda * lambda / (2.0 * steps)).exp() + 1e-15);
                    prev = p;
                }
            }
        }
    }

    #[test]
    fn naive_agrees_with_fast_path_samples() {
        use crate::measures::correlation_measure_exact;
        for i in 0..50 {
            let s = random_sequence(13, SeedSpec::new(77, i)).unwrap();
            for r in 2..=4 {
                assert_eq!(
                    naive_correlation_measure(&s, r).unwrap(),
                    correlation_measure_exact(&s, r).unwrap().value
                );
            }
        }
    }
}
