//! Packed bit sequences.
//!
//! `BitBuf` stores bit `i` at bit `i % 64` of word `i / 64`. Bits past `len`
//! in the last word are always zero, so word-level comparisons and popcounts
//! need no masking.
//!
//! The external byte layout (key encodings and `.bits` keystream files) is
//! MSB-first: bit `t` lands in byte `t / 8` at position `7 - t % 8`.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitBuf {
    words: Vec<u64>,
    len: usize,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitBuf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut b = Self::zeros(len);
        for i in 0..len {
            if f(i) {
                b.words[i / 64] |= 1 << (i % 64);
            }
        }
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_fn(bits.len(), |i| bits[i])
    }

    /// Low `width` bits of `value`, bit 0 first.
    pub fn from_u64(value: u64, width: usize) -> Self {
        assert!(width <= 64);
        let mut b = Self::zeros(width);
        if width > 0 {
            b.words[0] = value & low_mask(width);
        }
        b
    }

    /// Builds a buffer from raw words; bits past `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(words_for(len), 0);
        let mut b = Self { words, len };
        b.clear_tail();
        b
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let words = (0..words_for(len)).map(|_| rng.gen()).collect();
        Self::from_words(words, len)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let m = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        if bit {
            self.words[self.len / 64] |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    pub fn extend(&mut self, other: &BitBuf) {
        for i in 0..other.len {
            self.push(other.get(i));
        }
    }

    pub fn concat(parts: &[BitBuf]) -> BitBuf {
        let mut out = BitBuf::new();
        for p in parts {
            out.extend(p);
        }
        out
    }

    /// Value of the first `min(len, 64)` bits as an integer, bit 0 least significant.
    pub fn to_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    /// 64 bits starting at `offset`; positions at or past `len` read as zero.
    #[inline]
    pub fn window_word(&self, offset: usize) -> u64 {
        let q = offset / 64;
        let r = offset % 64;
        let lo = self.words.get(q).copied().unwrap_or(0);
        if r == 0 {
            lo
        } else {
            let hi = self.words.get(q + 1).copied().unwrap_or(0);
            (lo >> r) | (hi << (64 - r))
        }
    }

    pub fn slice(&self, start: usize, len: usize) -> BitBuf {
        assert!(start + len <= self.len);
        let words = (0..words_for(len))
            .map(|i| self.window_word(start + 64 * i))
            .collect();
        BitBuf::from_words(words, len)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Positions where `self` and `other` agree. Lengths must match.
    pub fn agreement(&self, other: &BitBuf) -> usize {
        assert_eq!(self.len, other.len);
        let diff: usize = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum();
        self.len - diff
    }

    pub fn xor_assign(&mut self, other: &BitBuf) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn complemented(&self) -> BitBuf {
        let words = self.words.iter().map(|w| !w).collect();
        BitBuf::from_words(words, self.len)
    }

    /// MSB-first byte packing, final byte zero-padded.
    pub fn to_bytes_msb(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for i in 0..self.len {
            if self.get(i) {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    /// Inverse of [`to_bytes_msb`](Self::to_bytes_msb). Requires exactly
    /// `ceil(len / 8)` bytes; padding bits are ignored.
    pub fn from_bytes_msb(bytes: &[u8], len: usize) -> Result<BitBuf> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::parse_nl(format!(
                "expected {} bytes for {len} bits, found {}",
                len.div_ceil(8),
                bytes.len()
            )));
        }
        Ok(BitBuf::from_fn(len, |i| bytes[i / 8] & (0x80 >> (i % 8)) != 0))
    }

    /// ASCII `0`/`1` rendering, no separators.
    pub fn to_text(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    fn clear_tail(&mut self) {
        if !self.len.is_multiple_of(64) {
            if let Some(last) = self.words.last_mut() {
                *last &= low_mask(self.len % 64);
            }
        }
    }
}

/// Appends bits to a packed buffer, many at a time.
pub(crate) struct BitWriter {
    words: Vec<u64>,
    len: usize,
}

impl BitWriter {
    pub(crate) fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(64) + 1),
            len: 0,
        }
    }

    /// Appends the low `count <= 64` bits of `value`, bit 0 first.
    #[inline]
    pub(crate) fn push_bits(&mut self, value: u64, count: usize) {
        if count == 0 {
            return;
        }
        let value = value & low_mask(count);
        let r = self.len % 64;
        if r == 0 {
            self.words.push(value);
        } else {
            *self.words.last_mut().expect("r != 0") |= value << r;
            if r + count > 64 {
                self.words.push(value >> (64 - r));
            }
        }
        self.len += count;
    }

    pub(crate) fn finish(self) -> BitBuf {
        BitBuf::from_words(self.words, self.len)
    }
}

#[inline]
pub(crate) fn low_mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl fmt::Debug for BitBuf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 256 {
            write!(f, "BitBuf[{}]({})", self.len, self.to_text())
        } else {
            write!(f, "BitBuf[{}]({}…)", self.len, self.slice(0, 256).to_text())
        }
    }
}

impl FromIterator<bool> for BitBuf {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut b = BitBuf::new();
        for bit in iter {
            b.push(bit);
        }
        b
    }
}
