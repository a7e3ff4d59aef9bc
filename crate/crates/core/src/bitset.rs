//! Minimal word-packed bitset helpers for positive-set masks.

pub fn with_capacity(bits: u64) -> Vec<u64> {
    vec![0u64; bits.div_ceil(64) as usize]
}

#[inline]
pub fn set(words: &mut [u64], i: u64) {
    words[(i / 64) as usize] |= 1u64 << (i % 64);
}

#[inline]
pub fn get(words: &[u64], i: u64) -> bool {
    words[(i / 64) as usize] >> (i % 64) & 1 == 1
}

pub fn count(words: &[u64]) -> u64 {
    words.iter().map(|w| w.count_ones() as u64).sum()
}

pub fn and_count(a: &[u64], b: &[u64]) -> u64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as u64).sum()
}

pub fn xor_count(a: &[u64], b: &[u64]) -> u64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones() as u64).sum()
}

pub fn for_each_set(words: &[u64], mut f: impl FnMut(u64)) {
    for (wi, &w) in words.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            let bit = w.trailing_zeros() as u64;
            f(wi as u64 * 64 + bit);
            w &= w - 1;
        }
    }
}
