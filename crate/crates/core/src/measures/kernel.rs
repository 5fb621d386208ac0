//! Bit-parallel kernels: shifted XOR products and prefix-sum ranges.

/// Per-byte walk summary: total step sum and the extreme partial sums
/// reached after each of the 8 steps (bit set = step -1).
#[derive(Clone, Copy)]
struct ByteWalk {
    sum: i8,
    min: i8,
    max: i8,
}

const fn byte_walk(b: u8) -> ByteWalk {
    let mut p: i8 = 0;
    let mut min = i8::MAX;
    let mut max = i8::MIN;
    let mut i = 0;
    while i < 8 {
        if (b >> i) & 1 == 1 {
            p -= 1;
        } else {
            p += 1;
        }
        if p < min {
            min = p;
        }
        if p > max {
            max = p;
        }
        i += 1;
    }
    ByteWalk { sum: p, min, max }
}

const BYTE_WALKS: [ByteWalk; 256] = {
    let mut t = [ByteWalk { sum: 0, min: 0, max: 0 }; 256];
    let mut b = 0;
    while b < 256 {
        t[b] = byte_walk(b as u8);
        b += 1;
    }
    t
};

/// XORs bits `[offset, offset + len)` of `src` into `dst[..]` starting at bit 0.
///
/// `dst` must hold `ceil(len / 64)` words; bits of the last word past `len`
/// may be left dirty and are ignored by the range kernels.
#[inline]
pub(crate) fn xor_shifted_into(src: &[u64], offset: usize, len: usize, dst: &mut [u64]) {
    let words = len.div_ceil(64);
    let base = offset / 64;
    let shift = offset % 64;
    if shift == 0 {
        for (d, s) in dst[..words].iter_mut().zip(&src[base..]) {
            *d ^= *s;
        }
    } else {
        for (i, d) in dst[..words].iter_mut().enumerate() {
            let lo = src[base + i] >> shift;
            let hi = src.get(base + i + 1).map_or(0, |w| w << (64 - shift));
            *d ^= lo | hi;
        }
    }
}

/// Fills `dst` with the product sequence for `offsets` (which must start
/// with the implicit 0) over `len` positions.
#[inline]
pub(crate) fn product_into(src: &[u64], offsets: &[usize], len: usize, dst: &mut Vec<u64>) {
    let words = len.div_ceil(64);
    dst.clear();
    dst.resize(words, 0);
    for &u in offsets {
        xor_shifted_into(src, u, len, dst);
    }
}

/// Range (max - min) of the prefix-sum path `P_0 = 0, P_1, ..., P_len` of
/// the walk encoded in `words`.
#[inline]
pub(crate) fn walk_range(words: &[u64], len: usize) -> u32 {
    let full_bytes = len / 8;
    let mut p: i32 = 0;
    let mut lo: i32 = 0;
    let mut hi: i32 = 0;
    let mut byte_idx = 0;
    'outer: for &w in words {
        for k in 0..8 {
            if byte_idx == full_bytes {
                break 'outer;
            }
            let e = BYTE_WALKS[((w >> (8 * k)) & 0xff) as usize];
            hi = hi.max(p + e.max as i32);
            lo = lo.min(p + e.min as i32);
            p += e.sum as i32;
            byte_idx += 1;
        }
    }
    for j in full_bytes * 8..len {
        if (words[j / 64] >> (j % 64)) & 1 == 1 {
            p -= 1;
        } else {
            p += 1;
        }
        hi = hi.max(p);
        lo = lo.min(p);
    }
    (hi - lo) as u32
}

/// Range together with the first prefix indices attaining the maximum
/// and the minimum.
pub(crate) fn walk_range_with_positions(words: &[u64], len: usize) -> (u32, usize, usize) {
    let mut p: i64 = 0;
    let (mut hi, mut lo) = (0i64, 0i64);
    let (mut arg_hi, mut arg_lo) = (0usize, 0usize);
    for j in 0..len {
        if (words[j / 64] >> (j % 64)) & 1 == 1 {
            p -= 1;
        } else {
            p += 1;
        }
        if p > hi {
            hi = p;
            arg_hi = j + 1;
        }
        if p < lo {
            lo = p;
            arg_lo = j + 1;
        }
    }
    ((hi - lo) as u32, arg_hi, arg_lo)
}

/// Sum of the symbols at 0-based positions `[start, end)`.
pub(crate) fn window_sum(words: &[u64], start: usize, end: usize) -> i64 {
    let mut ones = 0i64;
    for j in start..end {
        ones += ((words[j / 64] >> (j % 64)) & 1) as i64;
    }
    (end - start) as i64 - 2 * ones
}

/// Sum of the first `len` symbols.
#[inline]
pub(crate) fn total_sum(words: &[u64], len: usize) -> i64 {
    let full = len / 64;
    let mut ones: i64 = words[..full].iter().map(|w| w.count_ones() as i64).sum();
    if !len.is_multiple_of(64) {
        ones += (words[full] & ((1u64 << (len % 64)) - 1)).count_ones() as i64;
    }
    len as i64 - 2 * ones
}
