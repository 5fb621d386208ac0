//! Combinatorial kernels and minimum-value certificates.
//!
//! Exact integers are `BigUint`; hot paths use the checked `u128` fast path
//! and promote on overflow. Logarithms are natural.

mod certify;
mod welch;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::measures::binomial_u128;
use crate::{Error, Result};

pub use certify::{
    certify_theorem_c, certify_theorem_c_exhaustive, certify_theorem_max,
    certify_theorem_max_exhaustive, BoundReport, Construction, ExhaustiveSummary,
    LIMIT_CONSTANT_MAX, MAX_THEOREM_CONSTANT,
};
pub use welch::{
    max_offdiag_scalar, theorem_c_construction, theorem_max_construction, welch_bound,
    VectorFamily, WelchBound,
};

/// Binomial coefficients above this many decimal digits are handled in
/// log space by [`f_ratio`].
pub const EXACT_DIGIT_CAP: usize = 600;

/// Exact `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> Result<BigUint> {
    if k > n {
        return Err(Error::domain(format!("binomial C({n}, {k}) needs k <= n")));
    }
    let k = k.min(n - k);
    if let Some(v) = binomial_u128(n, k) {
        return Ok(BigUint::from(v));
    }
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    Ok(acc)
}

/// Natural log of a positive big integer.
pub fn ln_biguint(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "ln of zero");
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite below 2^1000").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn stirling_tail(x: f64) -> f64 {
    let x2 = x * x;
    1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2) + 1.0 / (1260.0 * x * x2 * x2)
        - 1.0 / (1680.0 * x * x2 * x2 * x2)
}

/// `ln C(n, k)`.
///
/// Exact below the `u128` range, a sum of term ratios for small `k`, and
/// the log-gamma (Stirling series) form otherwise, arranged so the large
/// `n ln n` terms cancel analytically.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::domain(format!("binomial C({n}, {k}) needs k <= n")));
    }
    let k = k.min(n - k);
    if k == 0 {
        return Ok(0.0);
    }
    if let Some(v) = binomial_u128(n, k) {
        return Ok((v as f64).ln());
    }
    if k < 40 {
        let base = (n - k) as f64;
        return Ok((1..=k).map(|i| ((base + i as f64) / i as f64).ln()).sum());
    }
    let (nf, kf, mf) = (n as f64, k as f64, (n - k) as f64);
    let main = -kf * (kf / nf).ln() - mf * (-kf / nf).ln_1p();
    let half = 0.5 * (nf / (2.0 * std::f64::consts::PI * kf * mf)).ln();
    Ok(main + half + stirling_tail(nf) - stirling_tail(kf) - stirling_tail(mf))
}

/// `(2k - 1)!! = (2k)! / (k! 2^k)`, the number of perfect pairings of `2k`
/// objects.
pub fn double_factorial_odd(k: u64) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::domain("(2k-1)!! needs k >= 1"));
    }
    Ok((1..=k).fold(BigUint::one(), |acc, i| acc * (2 * i - 1)))
}

/// `f(s) = C(n - l + 1, s) / C(l + s - 1, s)` with `l = floor(n / 3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FRatio {
    pub n: u64,
    pub s: u64,
    pub ell: u64,
    /// Present while both binomials stay under [`EXACT_DIGIT_CAP`] digits.
    pub exact: Option<BigRational>,
    pub ln_value: f64,
}

impl FRatio {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

pub fn f_ratio(n: u64, s: u64) -> Result<FRatio> {
    if n < 3 {
        return Err(Error::domain(format!("f(s) needs n >= 3, got {n}")));
    }
    let ell = n / 3;
    if s == 0 || s > ell {
        return Err(Error::domain(format!(
            "f(s) is defined for 1 <= s <= floor(n/3) = {ell}, got s = {s}"
        )));
    }
    let top_n = n - ell + 1;
    let bot_n = ell + s - 1;
    let ln_value = log_binomial(top_n, s)? - log_binomial(bot_n, s)?;
    // the digit count of C(a, s) is at most s * log10(a) + 1
    let digits = (s as f64 * (top_n as f64).log10()).ceil() as usize + 1;
    let exact = if digits <= EXACT_DIGIT_CAP {
        let num = binomial(top_n, s)?;
        let den = binomial(bot_n, s)?;
        let ln_value_exact = ln_biguint(&num) - ln_biguint(&den);
        debug_assert!((ln_value_exact - ln_value).abs() < 1e-9 * ln_value.abs().max(1.0));
        Some(BigRational::new(num.into(), den.into()))
    } else {
        None
    };
    Ok(FRatio {
        n,
        s,
        ell,
        exact,
        ln_value,
    })
}
