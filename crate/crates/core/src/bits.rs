//! A growable little-endian bit string.

use smallvec::SmallVec;

use crate::packed::{low_mask, WORD_BITS};

pub(crate) type Words = SmallVec<[u64; 4]>;

/// Stream bit `k` is bit `k % 64` of word `k / 64`. Bits past `len` are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitBuf {
    words: Words,
    len: usize,
}

impl BitBuf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitBuf {
            words: SmallVec::with_capacity(bits.div_ceil(WORD_BITS)),
            len: 0,
        }
    }

    pub fn zeros(bits: usize) -> Self {
        let mut words = Words::new();
        words.resize(bits.div_ceil(WORD_BITS), 0);
        BitBuf { words, len: bits }
    }

    pub fn from_words(words: &[u64], len: usize) -> Self {
        let mut w: Words = words.iter().copied().take(len.div_ceil(WORD_BITS)).collect();
        w.resize(len.div_ceil(WORD_BITS), 0);
        if !len.is_multiple_of(WORD_BITS) {
            let last = w.len() - 1;
            w[last] &= low_mask(len % WORD_BITS);
        }
        BitBuf { words: w, len }
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

    /// Appends the low `width` bits of `value`, least significant first.
    #[inline]
    pub fn push(&mut self, value: u64, width: usize) {
        debug_assert!(width <= WORD_BITS);
        if width == 0 {
            return;
        }
        let value = value & low_mask(width);
        let shift = self.len % WORD_BITS;
        if shift == 0 {
            self.words.push(value);
        } else {
            let last = self.words.len() - 1;
            self.words[last] |= value << shift;
            if shift + width > WORD_BITS {
                self.words.push(value >> (WORD_BITS - shift));
            }
        }
        self.len += width;
    }

    #[inline]
    pub fn push_bit(&mut self, bit: bool) {
        self.push(u64::from(bit), 1);
    }

    pub fn extend(&mut self, other: &BitBuf) {
        let mut rest = other.len;
        for &w in other.words.iter() {
            let width = rest.min(WORD_BITS);
            self.push(w, width);
            rest -= width;
        }
    }

    /// Reads `width <= 64` bits starting at `pos`.
    #[inline]
    pub fn get(&self, pos: usize, width: usize) -> u64 {
        debug_assert!(width <= WORD_BITS && pos + width <= self.len);
        if width == 0 {
            return 0;
        }
        let (w, shift) = (pos / WORD_BITS, pos % WORD_BITS);
        let mut v = self.words[w] >> shift;
        if shift != 0 && shift + width > WORD_BITS {
            v |= self.words[w + 1] << (WORD_BITS - shift);
        }
        v & low_mask(width)
    }

    #[inline]
    pub fn bit(&self, pos: usize) -> bool {
        self.get(pos, 1) == 1
    }

    pub fn set_bit(&mut self, pos: usize, bit: bool) {
        debug_assert!(pos < self.len);
        let (w, shift) = (pos / WORD_BITS, pos % WORD_BITS);
        if bit {
            self.words[w] |= 1 << shift;
        } else {
            self.words[w] &= !(1 << shift);
        }
    }

    /// Copies bits `[pos, pos + width)` into a new buffer.
    pub fn range(&self, pos: usize, width: usize) -> BitBuf {
        let mut out = BitBuf::with_capacity(width);
        let mut at = pos;
        let end = pos + width;
        while at < end {
            let chunk = (end - at).min(WORD_BITS);
            out.push(self.get(at, chunk), chunk);
            at += chunk;
        }
        out
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Stream-order rendering, bit 0 first.
    pub fn to_bit_string(&self) -> String {
        (0..self.len).map(|k| if self.bit(k) { '1' } else { '0' }).collect()
    }

    /// Little-endian bytes, `ceil(len / 8)` of them.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.len.div_ceil(8));
        out
    }

    pub fn from_le_bytes(bytes: &[u8], len: usize) -> Self {
        let words: Vec<u64> = bytes
            .chunks(8)
            .map(|c| {
                let mut b = [0u8; 8];
                b[..c.len()].copy_from_slice(c);
                u64::from_le_bytes(b)
            })
            .collect();
        BitBuf::from_words(&words, len)
    }
}
