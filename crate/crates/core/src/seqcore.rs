//! Packed `{-1, +1}` sequences.
//!
//! A symbol `a_j` is stored as one bit `b_j` with `a_j = (-1)^{b_j}`: bit 0
//! is `+1` and bit 1 is `-1`. Position `j` (0-based) lives in bit `j % 64`
//! of word `j / 64`, and bits past the end are always zero. Under this
//! encoding a product of symbols is the XOR of their bits, and a window sum
//! is `len - 2 * popcount`.

use std::fmt;

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest length accepted by [`enumerate_all`].
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 24;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinarySequence {
    len: usize,
    words: Vec<u64>,
}

#[inline]
pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

#[inline]
pub(crate) fn tail_mask(len: usize) -> u64 {
    match len % 64 {
        0 => u64::MAX,
        rem => (1u64 << rem) - 1,
    }
}

impl BinarySequence {
    /// Builds a sequence from raw words; bits beyond `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidLength("sequence length must be at least 1".into()));
        }
        if words.len() < words_for(len) {
            return Err(Error::InvalidLength(format!(
                "{} words cannot hold {len} symbols",
                words.len()
            )));
        }
        words.truncate(words_for(len));
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Ok(Self { len, words })
    }

    /// Builds a sequence from bits; `true` encodes `-1`.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut words = vec![0u64; words_for(bits.len())];
        for (j, &b) in bits.iter().enumerate() {
            if b {
                words[j / 64] |= 1 << (j % 64);
            }
        }
        Self::from_words(bits.len(), words)
    }

    /// Builds a sequence from `+1`/`-1` symbols.
    pub fn from_symbols(symbols: &[i8]) -> Result<Self> {
        let mut bits = Vec::with_capacity(symbols.len());
        for (pos, &s) in symbols.iter().enumerate() {
            match s {
                1 => bits.push(false),
                -1 => bits.push(true),
                other => {
                    return Err(Error::Parse {
                        position: pos + 1,
                        message: format!("symbol {other} is not -1 or +1"),
                    })
                }
            }
        }
        Self::from_bits(&bits)
    }

    pub fn alternating(n: usize) -> Result<Self> {
        // bit j is set for odd j
        let words = vec![0xAAAA_AAAA_AAAA_AAAAu64; words_for(n)];
        Self::from_words(n, words)
    }

    pub fn all_ones(n: usize) -> Result<Self> {
        Self::from_words(n, vec![0; words_for(n)])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; sequences have at least one symbol.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Bit at 0-based position `j` (`true` means `-1`).
    #[inline]
    pub fn bit(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        (self.words[j / 64] >> (j % 64)) & 1 == 1
    }

    /// Symbol at 0-based position `j`.
    #[inline]
    pub fn symbol(&self, j: usize) -> i8 {
        if self.bit(j) {
            -1
        } else {
            1
        }
    }

    pub fn symbols(&self) -> Vec<i8> {
        (0..self.len).map(|j| self.symbol(j)).collect()
    }

    /// Sum of all symbols.
    pub fn sum(&self) -> i64 {
        let ones: u32 = self.words.iter().map(|w| w.count_ones()).sum();
        self.len as i64 - 2 * ones as i64
    }

    pub fn negate(&self) -> Self {
        let words = self.words.iter().map(|w| !w).collect();
        Self::from_words(self.len, words).expect("length unchanged")
    }

    pub fn reverse(&self) -> Self {
        let bits: Vec<bool> = (0..self.len).rev().map(|j| self.bit(j)).collect();
        Self::from_bits(&bits).expect("length unchanged")
    }

    /// The first `n` symbols.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n > self.len {
            return Err(Error::InvalidLength(format!(
                "prefix of length {n} requested from a sequence of length {}",
                self.len
            )));
        }
        Self::from_words(n, self.words[..words_for(n.max(1))].to_vec())
    }

    /// Appends one symbol.
    pub fn push(&mut self, symbol: i8) -> Result<()> {
        let bit = match symbol {
            1 => false,
            -1 => true,
            other => return Err(Error::domain(format!("symbol {other} is not -1 or +1"))),
        };
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        if bit {
            self.words[self.len / 64] |= 1 << (self.len % 64);
        }
        self.len += 1;
        Ok(())
    }
}

impl fmt::Debug for BinarySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinarySequence({})", write_sequence(self))
    }
}

impl fmt::Display for BinarySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_sequence(self))
    }
}

/// Key of an independent random stream.
///
/// The pair `(master_seed, stream_index)` selects a ChaCha8 key and stream
/// id, so every stream is a pure function of the pair and parallel work
/// derives its randomness only by choosing a stream index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    pub fn with_stream(self, stream_index: u64) -> Self {
        Self {
            stream_index,
            ..self
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// A uniformly random sequence of length `n`.
///
/// Words are drawn in order from the stream, so the sequence for a shorter
/// `n` is a prefix of the one for a longer `n` under the same seed.
pub fn random_sequence(n: usize, seed: SeedSpec) -> Result<BinarySequence> {
    if n == 0 {
        return Err(Error::InvalidLength("sequence length must be at least 1".into()));
    }
    let mut rng = seed.rng();
    let words = (0..words_for(n)).map(|_| rng.next_u64()).collect();
    BinarySequence::from_words(n, words)
}

/// All `2^n` sequences of length `n`, in the integer order of their bit
/// encodings (bit `j` of the counter is position `j`).
pub fn enumerate_all(n: usize) -> Result<impl Iterator<Item = BinarySequence>> {
    enumerate_all_with_limit(n, DEFAULT_EXHAUSTIVE_LIMIT)
}

pub fn enumerate_all_with_limit(
    n: usize,
    limit: usize,
) -> Result<impl Iterator<Item = BinarySequence>> {
    if n == 0 {
        return Err(Error::InvalidLength("sequence length must be at least 1".into()));
    }
    if n > limit || n >= 64 {
        return Err(Error::Resource(format!(
            "exhaustive enumeration of length {n} exceeds the limit of {limit}"
        )));
    }
    Ok((0..1u64 << n).map(move |code| {
        BinarySequence::from_words(n, vec![code]).expect("code fits one word")
    }))
}

/// Parses one sequence over `{'+','-'}` or `{'0','1'}`.
///
/// Positions in errors are 1-based.
pub fn read_sequence(text: &str) -> Result<BinarySequence> {
    let text = text.strip_suffix('\n').unwrap_or(text);
    let text = text.strip_suffix('\r').unwrap_or(text);
    if text.is_empty() {
        return Err(Error::Parse {
            position: 1,
            message: "empty sequence".into(),
        });
    }
    #[derive(PartialEq, Clone, Copy)]
    enum Alphabet {
        Sign,
        Digit,
    }
    let mut alphabet = None;
    let mut bits = Vec::with_capacity(text.len());
    for (i, c) in text.chars().enumerate() {
        let (abc, bit) = match c {
            '+' => (Alphabet::Sign, false),
            '-' => (Alphabet::Sign, true),
            '0' => (Alphabet::Digit, false),
            '1' => (Alphabet::Digit, true),
            other => {
                return Err(Error::Parse {
                    position: i + 1,
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        match alphabet {
            None => alphabet = Some(abc),
            Some(a) if a != abc => {
                return Err(Error::Parse {
                    position: i + 1,
                    message: format!("character {c:?} mixes the '+/-' and '0/1' alphabets"),
                })
            }
            Some(_) => {}
        }
        bits.push(bit);
    }
    BinarySequence::from_bits(&bits)
}

/// Renders a sequence over the `'+'`/`'-'` alphabet.
pub fn write_sequence(seq: &BinarySequence) -> String {
    (0..seq.len())
        .map(|j| if seq.bit(j) { '-' } else { '+' })
        .collect()
}

/// Parses a sequence file: one sequence per line, blank lines ignored.
///
/// Errors name the 1-based line number alongside the column.
pub fn read_sequence_file(text: &str) -> Result<Vec<BinarySequence>> {
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if !line.is_ascii() {
            let position = line.chars().position(|c| !c.is_ascii()).unwrap_or(0) + 1;
            return Err(Error::Parse {
                position,
                message: format!("line {}: non-ASCII input", line_no + 1),
            });
        }
        out.push(read_sequence(line).map_err(|e| match e {
            Error::Parse { position, message } => Error::Parse {
                position,
                message: format!("line {}: {message}", line_no + 1),
            },
            other => other,
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(symbols: &[i8]) -> BinarySequence {
        BinarySequence::from_symbols(symbols).unwrap()
    }

    #[test]
    fn constructors() {
        assert_eq!(BinarySequence::alternating(4).unwrap(), seq(&[1, -1, 1, -1]));
        assert_eq!(BinarySequence::all_ones(3).unwrap(), seq(&[1, 1, 1]));
        assert_eq!(BinarySequence::alternating(1).unwrap(), seq(&[1]));
        assert!(BinarySequence::alternating(0).is_err());
        assert!(BinarySequence::all_ones(0).is_err());
        let long = BinarySequence::alternating(130).unwrap();
        assert_eq!(long.symbols().iter().map(|&s| s as i64).sum::<i64>(), 0);
        assert_eq!(long.sum(), 0);
    }

    #[test]
    fn random_sequence_is_reproducible() {
        let a = random_sequence(8, SeedSpec::new(0, 0)).unwrap();
        let b = random_sequence(8, SeedSpec::new(0, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.words(), b.words());
        assert!(random_sequence(0, SeedSpec::new(0, 0)).is_err());
    }

    #[test]
    fn random_sequence_golden() {
        // ChaCha8 with key (0,...,0), stream 0; pins the platform-independent output.
        let a = random_sequence(8, SeedSpec::new(0, 0)).unwrap();
        let expected = {
            let mut rng = SeedSpec::new(0, 0).rng();
            rng.next_u64() & 0xff
        };
        assert_eq!(a.words()[0], expected);
        assert_eq!(write_sequence(&a).len(), 8);
    }

    #[test]
    fn random_sequence_prefix_consistent() {
        let long = random_sequence(1000, SeedSpec::new(7, 3)).unwrap();
        let short = random_sequence(130, SeedSpec::new(7, 3)).unwrap();
        assert_eq!(long.prefix(130).unwrap(), short);
    }

    #[test]
    fn streams_are_independent() {
        let n = 1_000_000;
        let a = random_sequence(n, SeedSpec::new(0, 0)).unwrap();
        let b = random_sequence(n, SeedSpec::new(0, 1)).unwrap();
        let differ: u32 = a
            .words()
            .iter()
            .zip(b.words())
            .map(|(x, y)| (x ^ y).count_ones())
            .sum();
        let agree = (n as f64 - differ as f64) / n as f64;
        assert!((0.495..=0.505).contains(&agree), "agreement {agree}");
    }

    #[test]
    fn frequency_test() {
        let a = random_sequence(100_000, SeedSpec::new(0, 0)).unwrap();
        let mean = a.sum() as f64 / 1e5;
        assert!(mean.abs() <= 0.02, "mean {mean}");
    }

    #[test]
    fn enumerate_order_and_guard() {
        let all: Vec<_> = enumerate_all(2).unwrap().collect();
        assert_eq!(
            all,
            vec![seq(&[1, 1]), seq(&[-1, 1]), seq(&[1, -1]), seq(&[-1, -1])]
        );
        assert_eq!(enumerate_all(12).unwrap().count(), 4096);
        assert!(matches!(enumerate_all(25), Err(Error::Resource(_))));
        assert!(enumerate_all_with_limit(10, 8).is_err());
    }

    #[test]
    fn enumerate_has_no_duplicates() {
        for n in 1..=12 {
            let set: std::collections::HashSet<_> = enumerate_all(n).unwrap().collect();
            assert_eq!(set.len(), 1 << n);
        }
    }

    #[test]
    fn text_io() {
        assert_eq!(read_sequence("+-+-").unwrap(), seq(&[1, -1, 1, -1]));
        assert_eq!(read_sequence("0110").unwrap(), seq(&[1, -1, -1, 1]));
        assert_eq!(read_sequence("+-\n").unwrap(), seq(&[1, -1]));
        assert!(matches!(
            read_sequence("+x-"),
            Err(Error::Parse { position: 2, .. })
        ));
        assert!(matches!(read_sequence(""), Err(Error::Parse { .. })));
        assert!(matches!(
            read_sequence("+-01"),
            Err(Error::Parse { position: 3, .. })
        ));
        assert_eq!(write_sequence(&seq(&[1, -1, -1])), "+--");
    }

    #[test]
    fn sequence_file() {
        let seqs = read_sequence_file("+-+\n0101\n\n--\n").unwrap();
        assert_eq!(seqs.len(), 3);
        let err = read_sequence_file("++\n+a\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn push_negate_reverse() {
        let mut s = seq(&[1]);
        for i in 0..200 {
            s.push(if i % 3 == 0 { -1 } else { 1 }).unwrap();
        }
        assert_eq!(s.len(), 201);
        assert_eq!(s.negate().negate(), s);
        assert_eq!(s.reverse().reverse(), s);
        assert_eq!(s.negate().sum(), -s.sum());
        assert_eq!(s.reverse().symbol(0), s.symbol(200));
        assert!(s.push(0).is_err());
    }
}
