//! Bit-packed strings.
//!
//! Character `i` of a [`PackedString`] occupies stream bits
//! `[i * bits, (i + 1) * bits)`, and stream bit `k` is bit `k % 64` of word
//! `k / 64`. Character 0 therefore sits in the lowest-order bits of the first
//! word, and any run of characters that fits in a word can be pulled out with
//! two shifts and an OR.

use std::fmt;

use crate::error::{Error, Result};

/// A character code. Alphabets hold at most 2^16 symbols.
pub type Code = u16;

/// Width of a storage word in bits.
pub const WORD_BITS: usize = u64::BITS as usize;

const MAX_SIGMA: u32 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    sigma: u32,
    bits: u32,
}

impl Alphabet {
    pub fn new(sigma: u32) -> Result<Self> {
        if sigma == 0 || sigma > MAX_SIGMA {
            return Err(Error::InvalidAlphabet(sigma));
        }
        // ceil(log2 sigma), but never zero
        let bits = (u32::BITS - (sigma - 1).leading_zeros()).max(1);
        Ok(Alphabet { sigma, bits })
    }

    /// Identity mapping over bytes.
    pub fn bytes() -> Self {
        Alphabet { sigma: 256, bits: 8 }
    }

    /// A, C, G, T.
    pub fn dna() -> Self {
        Alphabet { sigma: 4, bits: 2 }
    }

    #[inline]
    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    #[inline]
    pub fn bits_per_char(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn contains(&self, code: Code) -> bool {
        u32::from(code) < self.sigma
    }

    /// Largest window length (in characters) that fits in one word.
    #[inline]
    pub fn chars_per_word(&self) -> usize {
        WORD_BITS / self.bits as usize
    }

    fn check(&self, code: Code) -> Result<()> {
        if self.contains(code) {
            Ok(())
        } else {
            Err(Error::InvalidCode {
                code: code.into(),
                sigma: self.sigma,
            })
        }
    }
}

/// A short run of characters packed into a single word, in stream order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Window {
    pub length: usize,
    pub bits: u64,
}

impl Window {
    pub const EMPTY: Window = Window { length: 0, bits: 0 };

    /// Packs `codes` into a window. Fails if a code is outside the alphabet or
    /// the codes do not fit in one word.
    pub fn from_codes(codes: &[Code], alphabet: Alphabet) -> Result<Self> {
        let bpc = alphabet.bits_per_char() as usize;
        if codes.len() * bpc > WORD_BITS {
            return Err(Error::WindowOutOfRange {
                start: 0,
                length: codes.len(),
                len: codes.len(),
                bits: alphabet.bits_per_char(),
            });
        }
        let mut bits = 0u64;
        for (k, &c) in codes.iter().enumerate() {
            alphabet.check(c)?;
            bits |= u64::from(c) << (k * bpc);
        }
        Ok(Window {
            length: codes.len(),
            bits,
        })
    }

    #[inline]
    pub fn get(&self, k: usize, bits_per_char: u32) -> Code {
        debug_assert!(k < self.length);
        let bpc = bits_per_char as usize;
        ((self.bits >> (k * bpc)) & low_mask(bpc)) as Code
    }

    pub fn codes(&self, bits_per_char: u32) -> Vec<Code> {
        (0..self.length).map(|k| self.get(k, bits_per_char)).collect()
    }

    /// The first `length` characters of this window.
    pub fn prefix(&self, length: usize, bits_per_char: u32) -> Window {
        debug_assert!(length <= self.length);
        Window {
            length,
            bits: self.bits & low_mask(length * bits_per_char as usize),
        }
    }
}

#[inline]
pub(crate) fn low_mask(width: usize) -> u64 {
    if width >= WORD_BITS {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// An immutable bit-packed character sequence.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PackedString {
    alphabet: Alphabet,
    len: usize,
    words: Vec<u64>,
}

impl PackedString {
    pub fn pack(codes: &[Code], alphabet: Alphabet) -> Result<Self> {
        let bpc = alphabet.bits_per_char() as usize;
        let mut words = vec![0u64; (codes.len() * bpc).div_ceil(WORD_BITS)];
        for (i, &c) in codes.iter().enumerate() {
            alphabet.check(c)?;
            let pos = i * bpc;
            let (w, shift) = (pos / WORD_BITS, pos % WORD_BITS);
            words[w] |= u64::from(c) << shift;
            if shift + bpc > WORD_BITS {
                words[w + 1] |= u64::from(c) >> (WORD_BITS - shift);
            }
        }
        Ok(PackedString {
            alphabet,
            len: codes.len(),
            words,
        })
    }

    /// Packs raw bytes under the identity mapping (σ = 256).
    pub fn from_bytes(bytes: &[u8]) -> Self {
        let codes: Vec<Code> = bytes.iter().map(|&b| Code::from(b)).collect();
        Self::pack(&codes, Alphabet::bytes()).expect("bytes are always valid codes")
    }

    #[inline]
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The backing storage words.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn char_at(&self, i: usize) -> Result<Code> {
        if i >= self.len {
            return Err(Error::OutOfRange {
                index: i,
                len: self.len,
            });
        }
        Ok(self.code_unchecked(i))
    }

    #[inline]
    pub(crate) fn code_unchecked(&self, i: usize) -> Code {
        let bpc = self.alphabet.bits as usize;
        self.read_bits(i * bpc, bpc) as Code
    }

    /// Reads `width <= 64` stream bits starting at `pos`. Touches at most two
    /// storage words.
    #[inline]
    fn read_bits(&self, pos: usize, width: usize) -> u64 {
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

    pub fn extract_window(&self, start: usize, length: usize) -> Result<Window> {
        let bpc = self.alphabet.bits as usize;
        if start.checked_add(length).is_none_or(|end| end > self.len) || length * bpc > WORD_BITS {
            return Err(Error::WindowOutOfRange {
                start,
                length,
                len: self.len,
                bits: self.alphabet.bits,
            });
        }
        Ok(self.window_unchecked(start, length))
    }

    #[inline]
    pub(crate) fn window_unchecked(&self, start: usize, length: usize) -> Window {
        let bpc = self.alphabet.bits as usize;
        Window {
            length,
            bits: self.read_bits(start * bpc, length * bpc),
        }
    }

    pub fn unpack(&self) -> Vec<Code> {
        self.iter().collect()
    }

    pub fn iter(&self) -> Codes<'_> {
        Codes { s: self, next: 0 }
    }

    /// Codes `[start, end)` as a new packed string.
    pub fn slice(&self, start: usize, end: usize) -> Result<PackedString> {
        if start > end || end > self.len {
            return Err(Error::OutOfRange {
                index: end,
                len: self.len,
            });
        }
        let codes: Vec<Code> = (start..end).map(|i| self.code_unchecked(i)).collect();
        PackedString::pack(&codes, self.alphabet)
    }
}

impl fmt::Debug for PackedString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PackedString")
            .field("sigma", &self.alphabet.sigma)
            .field("len", &self.len)
            .field("codes", &self.unpack())
            .finish()
    }
}

pub struct Codes<'a> {
    s: &'a PackedString,
    next: usize,
}

impl Iterator for Codes<'_> {
    type Item = Code;

    #[inline]
    fn next(&mut self) -> Option<Code> {
        if self.next >= self.s.len {
            return None;
        }
        let c = self.s.code_unchecked(self.next);
        self.next += 1;
        Some(c)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = self.s.len - self.next;
        (rest, Some(rest))
    }
}

impl ExactSizeIterator for Codes<'_> {}
