//! Fixed-width records describing the light transitions of one segment.
//!
//! Record layout, in stream order (every integer field least significant bit
//! first):
//!
//! | field                 | bits                  |
//! |-----------------------|-----------------------|
//! | size                  | `ceil(log2(r + 1))`   |
//! | first segment flag    | 1                     |
//! | accepting flag        | 1                     |
//! | heavy forward label   | `bits_per_char`       |
//! | heavy forward present | 1                     |
//! | forward labels        | `(r - 1) * bits_per_char` |
//! | `B_I`                 | `r`                   |
//! | `f_first`             | `ceil(log2 r)`        |
//! | `B_D`                 | `4r`                  |
//! | `B_D'`                | `4r`                  |
//!
//! `B_I[j]` is set when local state `j` has a light failure transition. The
//! failure targets `f_{i_1}, f_{i_2}, ...` of those states are stored as
//! `f_{i_1}` plus the differences `d = f_{i_k} - f_{i_{k-1}}`, each written in
//! minimal-width two's complement into `B_D`; `B_D'` marks the first bit of
//! every difference. The last difference is sign-extended to the end of
//! `B_D`, which makes its width recoverable without an end marker.

use crate::bits::BitBuf;
use crate::error::{Error, Result};
use crate::packed::{Alphabet, Code};
use crate::segment::SegmentAutomaton;

/// `ceil(log2 x)` for `x >= 1`.
#[inline]
pub(crate) fn ceil_log2(x: usize) -> usize {
    debug_assert!(x >= 1);
    (usize::BITS - (x - 1).leading_zeros()) as usize
}

/// Smallest `k >= 1` with `-2^(k-1) <= d <= 2^(k-1) - 1`.
#[inline]
pub fn twos_complement_width(d: i64) -> usize {
    let magnitude = if d < 0 { !d } else { d };
    (i64::BITS - magnitude.leading_zeros()) as usize + 1
}

/// Bit offsets of every record field for a given `(r, σ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EncodingLayout {
    r: usize,
    alphabet: Alphabet,
    size_bits: usize,
    local_bits: usize,
}

impl EncodingLayout {
    pub fn new(r: usize, alphabet: Alphabet) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidParameter(format!("r = {r} must be at least 2")));
        }
        Ok(EncodingLayout {
            r,
            alphabet,
            size_bits: ceil_log2(r + 1),
            local_bits: ceil_log2(r),
        })
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    #[inline]
    fn bpc(&self) -> usize {
        self.alphabet.bits_per_char() as usize
    }

    /// Bits for a local state index (`ceil(log2 r)`).
    #[inline]
    pub fn local_bits(&self) -> usize {
        self.local_bits
    }

    /// Capacity of `B_D` and of `B_D'`.
    #[inline]
    pub fn diff_capacity(&self) -> usize {
        4 * self.r
    }

    fn heavy_label_at(&self) -> usize {
        self.size_bits + 2
    }

    fn labels_at(&self) -> usize {
        self.heavy_label_at() + self.bpc() + 1
    }

    fn b_i_at(&self) -> usize {
        self.labels_at() + (self.r - 1) * self.bpc()
    }

    fn f_first_at(&self) -> usize {
        self.b_i_at() + self.r
    }

    fn b_d_at(&self) -> usize {
        self.f_first_at() + self.local_bits
    }

    fn b_d_prime_at(&self) -> usize {
        self.b_d_at() + self.diff_capacity()
    }

    /// Total record width `b_enc(r, σ)`.
    pub fn width(&self) -> usize {
        self.b_d_prime_at() + self.diff_capacity()
    }
}

/// `b_enc(r, σ)`: width of a segment record.
pub fn encoding_width(r: usize, alphabet: Alphabet) -> Result<usize> {
    Ok(EncodingLayout::new(r, alphabet)?.width())
}

/// The light transitions of one segment, in segment-local coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentDescription {
    pub size: usize,
    /// The segment contains K-state 0, so local state 0 loops on a mismatch.
    pub first_segment: bool,
    /// The forward transition into the rightmost local state is accepting.
    pub accepting: bool,
    /// Label of the heavy forward transition out of the rightmost state.
    pub heavy_forward: Option<Code>,
    /// Labels of the light forward transitions `j -> j + 1`, `size - 1` of them.
    pub labels: Vec<Code>,
    /// Light failure target of each local state.
    pub light_fail: Vec<Option<usize>>,
}

impl SegmentDescription {
    /// Describes segment `i` of `sa`.
    pub fn from_automaton(sa: &SegmentAutomaton, i: usize) -> Result<Self> {
        let seg = *sa.segments().get(i).ok_or(Error::OutOfRange {
            index: i,
            len: sa.segments().len(),
        })?;
        let mp = sa.mp();
        let m = mp.len();
        let labels = (seg.start..seg.end)
            .map(|s| mp.label(s).expect("states left of r_i have a forward label"))
            .collect();
        let light_fail = (seg.start..=seg.end)
            .map(|s| {
                if s == 0 {
                    return None;
                }
                let f = mp.fail(s);
                seg.contains(f).then(|| f - seg.start)
            })
            .collect();
        Ok(SegmentDescription {
            size: seg.size(),
            first_segment: seg.start == 0,
            accepting: seg.end == m,
            heavy_forward: if seg.end < m { mp.label(seg.end) } else { None },
            labels,
            light_fail,
        })
    }

    /// `(i_k, f_{i_k})` for every state with a light failure transition.
    pub fn light_failures(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.light_fail
            .iter()
            .enumerate()
            .filter_map(|(j, f)| f.map(|f| (j, f)))
    }

    /// The differences `d_{i_2}, ..., d_{i_l}` stored in `B_D`.
    pub fn differences(&self) -> Vec<i64> {
        let f: Vec<i64> = self.light_failures().map(|(_, f)| f as i64).collect();
        f.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// One segment record. Always exactly `layout.width()` bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SegmentEncoding {
    layout: EncodingLayout,
    bits: BitBuf,
}

impl SegmentEncoding {
    /// Encodes segment `i` of `sa` over the automaton's alphabet.
    pub fn encode(sa: &SegmentAutomaton, i: usize) -> Result<Self> {
        let layout = EncodingLayout::new(sa.r(), sa.mp().pattern().alphabet())?;
        let desc = SegmentDescription::from_automaton(sa, i)?;
        let enc = Self::from_description(&desc, layout)?;
        debug_assert_eq!(enc.decode().as_ref().ok(), Some(&desc));
        Ok(enc)
    }

    pub fn from_description(desc: &SegmentDescription, layout: EncodingLayout) -> Result<Self> {
        let r = layout.r;
        let bpc = layout.bpc();
        if desc.size == 0 || desc.size > r {
            return Err(Error::InvalidParameter(format!(
                "segment size {} outside 1..={r}",
                desc.size
            )));
        }
        if desc.labels.len() + 1 != desc.size || desc.light_fail.len() != desc.size {
            return Err(Error::InvalidParameter(
                "segment description has inconsistent lengths".into(),
            ));
        }
        for &c in desc.labels.iter().chain(desc.heavy_forward.iter()) {
            if !layout.alphabet.contains(c) {
                return Err(Error::InvalidCode {
                    code: c.into(),
                    sigma: layout.alphabet.sigma(),
                });
            }
        }

        let mut bits = BitBuf::with_capacity(layout.width());
        bits.push(desc.size as u64, layout.size_bits);
        bits.push_bit(desc.first_segment);
        bits.push_bit(desc.accepting);
        bits.push(desc.heavy_forward.map_or(0, u64::from), bpc);
        bits.push_bit(desc.heavy_forward.is_some());
        for j in 0..r - 1 {
            bits.push(desc.labels.get(j).map_or(0, |&c| u64::from(c)), bpc);
        }
        for j in 0..r {
            bits.push_bit(desc.light_fail.get(j).is_some_and(Option::is_some));
        }
        let f_first = desc.light_failures().next().map_or(0, |(_, f)| f);
        if f_first >= 1 << layout.local_bits {
            return Err(Error::InvalidParameter(format!("failure target {f_first} too large")));
        }
        bits.push(f_first as u64, layout.local_bits);

        let diffs = desc.differences();
        let cap = layout.diff_capacity();
        let used: usize = diffs.iter().map(|&d| twos_complement_width(d)).sum();
        if used > cap {
            return Err(Error::EncodingOverflow { used, capacity: cap });
        }
        let mut b_d = BitBuf::with_capacity(cap);
        let mut b_d_prime = BitBuf::zeros(cap);
        for (k, &d) in diffs.iter().enumerate() {
            b_d_prime.set_bit(b_d.len(), true);
            let width = if k + 1 == diffs.len() {
                cap - b_d.len()
            } else {
                twos_complement_width(d)
            };
            push_signed(&mut b_d, d, width);
        }
        while b_d.len() < cap {
            b_d.push(0, (cap - b_d.len()).min(64));
        }
        bits.extend(&b_d);
        bits.extend(&b_d_prime);
        debug_assert_eq!(bits.len(), layout.width());
        Ok(SegmentEncoding { layout, bits })
    }

    /// Wraps raw record bits. No validation happens until [`decode`](Self::decode).
    pub fn from_bits(bits: BitBuf, layout: EncodingLayout) -> Result<Self> {
        if bits.len() != layout.width() {
            return Err(Error::malformed(format!(
                "record is {} bits, expected {}",
                bits.len(),
                layout.width()
            )));
        }
        Ok(SegmentEncoding { layout, bits })
    }

    pub fn layout(&self) -> &EncodingLayout {
        &self.layout
    }

    pub fn bits(&self) -> &BitBuf {
        &self.bits
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn size_field(&self) -> usize {
        self.bits.get(0, self.layout.size_bits) as usize
    }

    pub fn first_segment_flag(&self) -> bool {
        self.bits.bit(self.layout.size_bits)
    }

    pub fn accepting_flag(&self) -> bool {
        self.bits.bit(self.layout.size_bits + 1)
    }

    /// `B_I` as an integer, bit `j` for local state `j`. Requires `r <= 64`.
    pub fn b_i(&self) -> u64 {
        assert!(self.layout.r <= 64, "B_I does not fit in a word; use b_i_bits");
        self.bits.get(self.layout.b_i_at(), self.layout.r)
    }

    pub fn b_i_bits(&self) -> BitBuf {
        self.bits.range(self.layout.b_i_at(), self.layout.r)
    }

    pub fn f_first(&self) -> usize {
        self.bits.get(self.layout.f_first_at(), self.layout.local_bits) as usize
    }

    pub fn b_d(&self) -> BitBuf {
        self.bits.range(self.layout.b_d_at(), self.layout.diff_capacity())
    }

    pub fn b_d_prime(&self) -> BitBuf {
        self.bits.range(self.layout.b_d_prime_at(), self.layout.diff_capacity())
    }

    /// Number of `B_D` bits holding minimal-width differences.
    pub fn used_b_d_bits(&self) -> Result<usize> {
        let parsed = parse_differences(&self.b_d(), &self.b_d_prime())?;
        Ok(parsed.iter().map(|&(_, w)| w).sum())
    }

    /// Decodes and validates the record.
    pub fn decode(&self) -> Result<SegmentDescription> {
        let layout = &self.layout;
        let (r, bpc) = (layout.r, layout.bpc());
        let sigma = layout.alphabet.sigma();
        let bits = &self.bits;

        let size = self.size_field();
        if size == 0 || size > r {
            return Err(Error::malformed(format!("segment size {size} outside 1..={r}")));
        }
        let first_segment = self.first_segment_flag();
        let accepting = self.accepting_flag();
        let heavy_label = bits.get(layout.heavy_label_at(), bpc) as u32;
        let heavy_present = bits.bit(layout.heavy_label_at() + bpc);
        if heavy_label >= sigma {
            return Err(Error::malformed(format!("heavy label {heavy_label} >= sigma {sigma}")));
        }
        if accepting && heavy_present {
            return Err(Error::malformed(
                "rightmost state cannot be accepting and have a heavy forward transition",
            ));
        }
        if accepting && size < 2 {
            return Err(Error::malformed("accepting flag on a one-state segment"));
        }

        let mut labels = Vec::with_capacity(size - 1);
        for j in 0..r - 1 {
            let c = bits.get(layout.labels_at() + j * bpc, bpc) as u32;
            if c >= sigma {
                return Err(Error::malformed(format!("label {c} >= sigma {sigma}")));
            }
            if j + 1 < size {
                labels.push(c as Code);
            }
        }

        let b_i = self.b_i_bits();
        let light_states: Vec<usize> = (0..r).filter(|&j| b_i.bit(j)).collect();
        if light_states.last().is_some_and(|&j| j >= size) {
            return Err(Error::malformed("B_I marks a state outside the segment"));
        }

        let mut light_fail = vec![None; size];
        if let Some((&first, rest)) = light_states.split_first() {
            let b_d_prime = self.b_d_prime();
            if b_d_prime.count_ones() != rest.len() {
                return Err(Error::malformed(format!(
                    "B_D' marks {} numbers, B_I implies {}",
                    b_d_prime.count_ones(),
                    rest.len()
                )));
            }
            let diffs = parse_differences(&self.b_d(), &b_d_prime)?;
            let mut f = self.f_first() as i64;
            light_fail[first] = Some(f);
            for (&j, &(d, _)) in rest.iter().zip(&diffs) {
                f += d;
                light_fail[j] = Some(f);
            }
        }
        let light_fail = light_fail
            .into_iter()
            .enumerate()
            .map(|(j, f)| match f {
                // a failure transition always goes to a strictly shorter prefix
                Some(f) if f < 0 || f as usize >= j => Err(Error::malformed(format!(
                    "light failure target {f} of local state {j} is not in 0..{j}"
                ))),
                Some(f) => Ok(Some(f as usize)),
                None => Ok(None),
            })
            .collect::<Result<Vec<_>>>()?;

        let desc = SegmentDescription {
            size,
            first_segment,
            accepting,
            heavy_forward: heavy_present.then_some(heavy_label as Code),
            labels,
            light_fail,
        };
        // reject non-canonical records (stray padding, non-minimal widths)
        if SegmentEncoding::from_description(&desc, *layout)?.bits != self.bits {
            return Err(Error::malformed("record is not in canonical form"));
        }
        Ok(desc)
    }
}

fn push_signed(buf: &mut BitBuf, d: i64, width: usize) {
    let mut rest = width;
    let mut v = d;
    while rest > 0 {
        let chunk = rest.min(64);
        buf.push(v as u64, chunk);
        v = if chunk == 64 { v >> 63 } else { v >> chunk };
        rest -= chunk;
    }
}

/// Splits `B_D` at the starts marked in `B_D'`. Returns `(value, width)`
/// pairs, the last width being its minimal width.
fn parse_differences(b_d: &BitBuf, b_d_prime: &BitBuf) -> Result<Vec<(i64, usize)>> {
    let cap = b_d.len();
    let starts: Vec<usize> = (0..cap).filter(|&k| b_d_prime.bit(k)).collect();
    let Some(&last) = starts.last() else {
        return Ok(Vec::new());
    };
    if starts[0] != 0 {
        return Err(Error::malformed("B_D' does not mark bit 0"));
    }
    let mut out = Vec::with_capacity(starts.len());
    for w in starts.windows(2) {
        let width = w[1] - w[0];
        if width > 63 {
            return Err(Error::malformed(format!("difference of width {width}")));
        }
        out.push((sign_extend(b_d.get(w[0], width), width), width));
    }
    // the last number runs to the end of B_D, sign-extended
    let top = b_d.bit(cap - 1);
    let mut width = cap - last;
    while width > 1 && b_d.bit(last + width - 2) == top {
        width -= 1;
    }
    if width > 63 {
        return Err(Error::malformed(format!("difference of width {width}")));
    }
    out.push((sign_extend(b_d.get(last, width), width), width));
    Ok(out)
}

#[inline]
fn sign_extend(v: u64, width: usize) -> i64 {
    let shift = 64 - width;
    ((v << shift) as i64) >> shift
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::MpAutomaton;
    use crate::packed::PackedString;
    use proptest::prelude::*;

    fn abc(s: &str) -> PackedString {
        let codes: Vec<Code> = s.bytes().map(|b| Code::from(b - b'a')).collect();
        PackedString::pack(&codes, Alphabet::new(3).unwrap()).unwrap()
    }

    fn automaton(p: &PackedString, r: usize) -> SegmentAutomaton {
        SegmentAutomaton::build(MpAutomaton::build(p).unwrap(), r).unwrap()
    }

    #[test]
    fn widths() {
        let sigma4 = Alphabet::new(4).unwrap();
        assert_eq!(encoding_width(4, sigma4).unwrap(), 52);
        assert_eq!(encoding_width(2, Alphabet::new(2).unwrap()).unwrap(), 26);
        for sigma in [1, 2, 3, 4, 16, 256] {
            let a = Alphabet::new(sigma).unwrap();
            let mut prev = 0;
            for r in (2..=64).step_by(2) {
                let w = encoding_width(r, a).unwrap();
                assert!(w >= prev);
                prev = w;
            }
        }
    }

    #[test]
    fn twos_complement() {
        let cases = [(0, 1), (-1, 1), (1, 2), (-2, 2), (2, 3), (3, 3), (-3, 3), (-4, 3), (4, 4)];
        for (d, w) in cases {
            assert_eq!(twos_complement_width(d), w, "d = {d}");
        }
    }

    #[test]
    fn ababca_segment0() {
        let sa = automaton(&abc("ababca"), 4);
        let enc = SegmentEncoding::encode(&sa, 0).unwrap();
        assert_eq!(enc.width(), encoding_width(4, Alphabet::new(3).unwrap()).unwrap());
        assert_eq!(enc.size_field(), 4);
        assert!(enc.first_segment_flag());
        assert!(!enc.accepting_flag());
        assert_eq!(enc.b_i(), 0b1110);
        assert_eq!(enc.f_first(), 0);
        assert_eq!(enc.used_b_d_bits().unwrap(), 3);
        assert_eq!(&enc.b_d_prime().to_bit_string()[..3], "110");
        // d = 0 (width 1) then d = 1 (width 2, low bit first), sign-extended with 0
        assert_eq!(&enc.b_d().to_bit_string()[..3], "010");
        assert_eq!(enc.b_d().count_ones(), 1);

        let desc = enc.decode().unwrap();
        assert_eq!(desc.labels, vec![0, 1, 0]);
        assert_eq!(desc.heavy_forward, Some(1));
        assert_eq!(desc.light_fail, vec![None, Some(0), Some(0), Some(1)]);
        assert_eq!(desc.differences(), vec![0, 1]);
    }

    #[test]
    fn ababca_segment2_accepts() {
        let sa = automaton(&abc("ababca"), 4);
        let enc = SegmentEncoding::encode(&sa, 2).unwrap();
        assert!(enc.accepting_flag());
        assert_eq!(enc.size_field(), 3);
        let desc = enc.decode().unwrap();
        assert_eq!(desc.heavy_forward, None);
        assert_eq!(desc.labels, vec![2, 0]);
    }

    #[test]
    fn no_light_failures() {
        // every failure of "abc" goes to state 0, outside segment [2, 3]
        let sa = automaton(&abc("abc"), 2);
        let enc = SegmentEncoding::encode(&sa, 2).unwrap();
        assert_eq!(enc.b_i(), 0);
        assert_eq!(enc.f_first(), 0);
        assert_eq!(enc.b_d().count_ones(), 0);
        assert_eq!(enc.b_d_prime().count_ones(), 0);
    }

    #[test]
    fn all_zero_record() {
        let layout = EncodingLayout::new(4, Alphabet::new(2).unwrap()).unwrap();
        let mut bits = BitBuf::new();
        bits.push(2, 3);
        bits.extend(&BitBuf::zeros(layout.width() - 3));
        let desc = SegmentEncoding::from_bits(bits, layout).unwrap().decode().unwrap();
        assert_eq!(desc.size, 2);
        assert!(desc.light_fail.iter().all(Option::is_none));
        assert_eq!(desc.labels, vec![0]);
    }

    #[test]
    fn malformed_records() {
        let layout = EncodingLayout::new(4, Alphabet::new(2).unwrap()).unwrap();
        let w = layout.width();
        let zero = SegmentEncoding::from_bits(BitBuf::zeros(w), layout).unwrap();
        assert!(zero.decode().is_err(), "size 0");

        let sa = automaton(&abc("ababca"), 4);
        let good = SegmentEncoding::encode(&sa, 0).unwrap();
        // B_I[0]: local state 0 cannot fail inside its segment
        let mut bits = good.bits().clone();
        bits.set_bit(good.layout().b_i_at(), true);
        assert!(SegmentEncoding::from_bits(bits, *good.layout()).unwrap().decode().is_err());
        // drop a B_D' start
        let mut bits = good.bits().clone();
        bits.set_bit(good.layout().b_d_prime_at() + 1, false);
        assert!(SegmentEncoding::from_bits(bits, *good.layout()).unwrap().decode().is_err());
        // garbage after the sign extension
        let mut bits = good.bits().clone();
        bits.set_bit(good.layout().b_d_at() + 10, true);
        assert!(SegmentEncoding::from_bits(bits, *good.layout()).unwrap().decode().is_err());
        // wrong width
        assert!(SegmentEncoding::from_bits(BitBuf::zeros(w + 1), layout).is_err());
    }

    // every segment of every binary pattern up to length 10, r in {2, 4}
    #[test]
    fn exhaustive_round_trip_binary() {
        let sigma2 = Alphabet::new(2).unwrap();
        for m in 1..=10usize {
            for mask in 0..1u32 << m {
                let codes: Vec<Code> = (0..m).map(|k| ((mask >> k) & 1) as Code).collect();
                let p = PackedString::pack(&codes, sigma2).unwrap();
                for r in [2, 4].into_iter().filter(|&r| r <= m + 1) {
                    let sa = automaton(&p, r);
                    for i in 0..sa.segments().len() {
                        let desc = SegmentDescription::from_automaton(&sa, i).unwrap();
                        let enc = SegmentEncoding::encode(&sa, i).unwrap();
                        assert_eq!(enc.decode().unwrap(), desc);
                        assert_eq!(enc.b_d_prime().count_ones(), desc.light_failures().count().saturating_sub(1));
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn random_round_trip(codes in prop::collection::vec(0..4 as Code, 1..80), half in 1usize..12) {
            let p = PackedString::pack(&codes, Alphabet::new(4).unwrap()).unwrap();
            let r = (2 * half).min((codes.len() + 1) & !1);
            prop_assume!(r >= 2);
            let sa = automaton(&p, r);
            for i in 0..sa.segments().len() {
                let enc = SegmentEncoding::encode(&sa, i).unwrap();
                let desc = enc.decode().unwrap();
                prop_assert_eq!(&desc, &SegmentDescription::from_automaton(&sa, i).unwrap());
                let sum: i64 = desc.differences().iter().map(|d| d.abs()).sum();
                prop_assert!(sum <= 2 * r as i64);
                prop_assert!(enc.used_b_d_bits().unwrap() <= 3 * r);
            }
        }
    }
}
