//! The tabulated `Next` function.
//!
//! `Next(S, j, q)` follows light, non-accepting transitions of segment `S`
//! from local state `j` over the characters of `q` and reports how many
//! characters were consumed and where it stopped. The table answering it is
//! keyed by `num(Z)`, the integer whose binary digits are the bit stream
//!
//! ```text
//! segment record (b_enc bits) · j (ceil(log2 r)) · |q| (ceil(log2 r)) · q ((r - 1) · bits_per_char)
//! ```
//!
//! and depends only on `(r, σ)`, never on a pattern. Entries are computed on
//! first use and memoized; [`NextTable::fill_segment`] tabulates every query
//! for a record up front.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use rustc_hash::FxHashMap;

use crate::bits::{BitBuf, Words};
use crate::encoding::{EncodingLayout, SegmentDescription, SegmentEncoding};
use crate::error::{Error, Result};
use crate::packed::{Alphabet, Window, WORD_BITS};

/// Result of `Next`: characters consumed and the final local state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct NextResult {
    pub consumed: u32,
    pub end: u32,
}

impl NextResult {
    pub fn new(consumed: usize, end: usize) -> Self {
        NextResult {
            consumed: consumed as u32,
            end: end as u32,
        }
    }
}

/// Evaluates `Next` by walking the decoded segment.
///
/// Per character: follow light failure transitions until the current state's
/// forward label matches, then take the forward transition. Stops without
/// consuming the character when the needed failure transition is heavy, or
/// the matching forward transition is heavy or accepting. At K-state 0 a
/// mismatch consumes the character and stays.
pub fn next_direct(
    seg: &SegmentDescription,
    j: usize,
    q: &Window,
    bits_per_char: u32,
) -> Result<NextResult> {
    let size = seg.size;
    if size == 0 || seg.labels.len() + 1 != size || seg.light_fail.len() != size {
        return Err(Error::malformed("segment description has inconsistent lengths"));
    }
    if j >= size {
        return Err(Error::malformed(format!("local state {j} outside segment of size {size}")));
    }
    let last = size - 1;
    let mut cur = j;
    let mut consumed = 0;
    'chars: for k in 0..q.length {
        let alpha = q.get(k, bits_per_char);
        loop {
            if cur < last {
                if seg.labels[cur] == alpha {
                    if seg.accepting && cur + 1 == last {
                        break 'chars;
                    }
                    cur += 1;
                    consumed += 1;
                    continue 'chars;
                }
            } else if seg.heavy_forward == Some(alpha) {
                break 'chars;
            }
            if seg.first_segment && cur == 0 {
                consumed += 1;
                continue 'chars;
            }
            match seg.light_fail[cur] {
                Some(f) if f < cur => cur = f,
                Some(_) => return Err(Error::malformed("light failure does not move left")),
                None => break 'chars,
            }
        }
    }
    Ok(NextResult::new(consumed, cur))
}

/// Field widths of a `Next` key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KeyLayout {
    record: EncodingLayout,
    record_bits: usize,
}

impl KeyLayout {
    pub fn new(r: usize, alphabet: Alphabet) -> Result<Self> {
        let record = EncodingLayout::new(r, alphabet)?;
        if (r - 1) * alphabet.bits_per_char() as usize > WORD_BITS {
            return Err(Error::InvalidParameter(format!(
                "a window of r - 1 = {} characters at {} bits each does not fit in a word",
                r - 1,
                alphabet.bits_per_char()
            )));
        }
        Ok(KeyLayout {
            record,
            record_bits: record.width(),
        })
    }

    pub fn record(&self) -> &EncodingLayout {
        &self.record
    }

    pub fn r(&self) -> usize {
        self.record.r()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.record.alphabet()
    }

    fn q_bits(&self) -> usize {
        (self.r() - 1) * self.alphabet().bits_per_char() as usize
    }

    /// Key width `b = b_enc + 2 ceil(log2 r) + (r - 1) bits_per_char`.
    pub fn width(&self) -> usize {
        self.record_bits + 2 * self.record.local_bits() + self.q_bits()
    }

    /// Appends `j`, `|q|` and `q` to a record.
    #[inline]
    fn push_query(&self, key: &mut BitBuf, j: usize, q: &Window) {
        let lb = self.record.local_bits();
        key.push(j as u64, lb);
        key.push(q.length as u64, lb);
        key.push(q.bits, self.q_bits());
    }

    /// Splits and validates a key.
    pub fn decode(&self, key: &BitBuf) -> Result<(SegmentDescription, usize, Window)> {
        if key.len() != self.width() {
            return Err(Error::malformed(format!(
                "key is {} bits, expected {}",
                key.len(),
                self.width()
            )));
        }
        let record = SegmentEncoding::from_bits(key.range(0, self.record_bits), self.record)?;
        let desc = record.decode()?;
        let lb = self.record.local_bits();
        let mut at = self.record_bits;
        let j = key.get(at, lb) as usize;
        at += lb;
        let q_len = key.get(at, lb) as usize;
        at += lb;
        let q_bits = key.get(at, self.q_bits());
        if j >= desc.size {
            return Err(Error::malformed(format!("local state {j} outside segment of size {}", desc.size)));
        }
        if q_len > self.r() - 1 {
            return Err(Error::malformed(format!("query length {q_len} exceeds r - 1")));
        }
        let bpc = self.alphabet().bits_per_char();
        let q = Window {
            length: q_len,
            bits: q_bits,
        };
        if q.prefix(q_len, bpc).bits != q_bits {
            return Err(Error::malformed("query padding is not zero"));
        }
        if let Some(c) = q.codes(bpc).into_iter().find(|&c| !self.alphabet().contains(c)) {
            return Err(Error::malformed(format!("query code {c} outside the alphabet")));
        }
        Ok((desc, j, q))
    }
}

/// An encoded `Next` input `Z`. Its words, least significant first, are
/// `num(Z)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NextKey {
    bits: BitBuf,
}

impl NextKey {
    pub fn new(record: &SegmentEncoding, j: usize, q: &Window) -> Result<Self> {
        let layout = KeyLayout::new(record.layout().r(), record.layout().alphabet())?;
        if j >= layout.r() {
            return Err(Error::InvalidParameter(format!("local state {j} >= r")));
        }
        if q.length > layout.r() - 1 {
            return Err(Error::InvalidParameter(format!("query of length {} > r - 1", q.length)));
        }
        let mut bits = record.bits().clone();
        layout.push_query(&mut bits, j, q);
        Ok(NextKey { bits })
    }

    pub fn from_bits(bits: BitBuf) -> Self {
        NextKey { bits }
    }

    pub fn bits(&self) -> &BitBuf {
        &self.bits
    }

    /// `num(Z)` as little-endian words.
    pub fn num(&self) -> &[u64] {
        self.bits.words()
    }
}

/// How an `r` was picked from a table budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RChoice {
    pub r: usize,
    /// Key width `b(r, σ)` for the chosen `r`.
    pub key_bits: usize,
    /// Whether `2^b` fits the budget. When no even `r` does, `r = 2`.
    pub within_budget: bool,
}

/// Largest even `r >= 2` whose table of `2^b(r, σ)` entries fits in
/// `t_budget` entries.
pub fn choose_r(t_budget: u64, alphabet: Alphabet) -> RChoice {
    let fits = |r: usize| -> Option<usize> {
        let b = KeyLayout::new(r, alphabet).ok()?.width();
        (b < 64 && (1u64 << b) <= t_budget).then_some(b)
    };
    let mut best = None;
    let mut r = 2;
    while let Some(b) = fits(r) {
        best = Some((r, b));
        r += 2;
    }
    match best {
        Some((r, key_bits)) => RChoice {
            r,
            key_bits,
            within_budget: true,
        },
        None => {
            let key_bits = KeyLayout::new(2, alphabet).map_or(0, |l| l.width());
            RChoice {
                r: 2,
                key_bits,
                within_budget: false,
            }
        }
    }
}

type Memo = FxHashMap<Words, NextResult>;
type Registry = HashMap<(usize, Alphabet), Arc<NextTable>>;

/// Memoized `Next` answers for one `(r, σ)`.
///
/// Lookups may race; a key computed twice yields the same value, and entries
/// become visible only once fully inserted.
#[derive(Debug)]
pub struct NextTable {
    layout: KeyLayout,
    memo: RwLock<Memo>,
    hits: AtomicU64,
    misses: AtomicU64,
}

const CACHE_MAGIC: &[u8; 4] = b"PKSM";
const CACHE_VERSION: u8 = 1;

impl NextTable {
    pub fn new(r: usize, alphabet: Alphabet) -> Result<Self> {
        Ok(NextTable {
            layout: KeyLayout::new(r, alphabet)?,
            memo: RwLock::new(Memo::default()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        })
    }

    /// The process-wide table for `(r, σ)`; every caller with the same
    /// parameters gets the same instance.
    pub fn shared(r: usize, alphabet: Alphabet) -> Result<Arc<NextTable>> {
        static TABLES: OnceLock<Mutex<Registry>> = OnceLock::new();
        let mut tables = TABLES
            .get_or_init(Default::default)
            .lock()
            .unwrap_or_else(|e| e.into_inner());
        if let Some(t) = tables.get(&(r, alphabet)) {
            return Ok(Arc::clone(t));
        }
        let t = Arc::new(NextTable::new(r, alphabet)?);
        tables.insert((r, alphabet), Arc::clone(&t));
        Ok(t)
    }

    pub fn layout(&self) -> &KeyLayout {
        &self.layout
    }

    pub fn r(&self) -> usize {
        self.layout.r()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.layout.alphabet()
    }

    /// Key width `b`.
    pub fn key_bits(&self) -> usize {
        self.layout.width()
    }

    pub fn len(&self) -> usize {
        self.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(hits, misses)` since construction.
    pub fn counters(&self) -> (u64, u64) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, Memo> {
        self.memo.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, Memo> {
        self.memo.write().unwrap_or_else(|e| e.into_inner())
    }

    pub fn lookup(&self, key: &NextKey) -> Result<NextResult> {
        if key.bits.len() != self.key_bits() {
            return Err(Error::malformed(format!(
                "key is {} bits, table expects {}",
                key.bits.len(),
                self.key_bits()
            )));
        }
        self.lookup_bits(&key.bits)
    }

    /// Builds the key for `(record, j, q)` and looks it up.
    #[inline]
    pub fn query(&self, record: &SegmentEncoding, j: usize, q: &Window) -> Result<NextResult> {
        let mut key = record.bits().clone();
        self.layout.push_query(&mut key, j, q);
        self.lookup_bits(&key)
    }

    #[inline]
    pub(crate) fn lookup_bits(&self, key: &BitBuf) -> Result<NextResult> {
        if let Some(&v) = self.read().get(key.words()) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(v);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let (desc, j, q) = self.layout.decode(key)?;
        let v = next_direct(&desc, j, &q, self.alphabet().bits_per_char())?;
        self.write().entry(key.words().into()).or_insert(v);
        Ok(v)
    }

    /// Tabulates every `(j, q)` for one record: all `j < size` and every `q`
    /// of length `0..r` over the alphabet. Returns the number of entries
    /// written.
    pub fn fill_segment(&self, record: &SegmentEncoding) -> Result<usize> {
        if record.layout() != self.layout.record() {
            return Err(Error::InvalidParameter("record layout does not match the table".into()));
        }
        let desc = record.decode()?;
        let alphabet = self.alphabet();
        let bpc = alphabet.bits_per_char();
        let sigma = u64::from(alphabet.sigma());
        let mut batch = Vec::new();
        for q_len in 0..self.r() {
            let count = sigma.checked_pow(q_len as u32).ok_or_else(|| {
                Error::InvalidParameter("eager tabulation would not terminate".into())
            })?;
            for n in 0..count {
                // base-sigma digits of n, first character lowest
                let (mut rest, mut bits) = (n, 0u64);
                for k in 0..q_len {
                    bits |= (rest % sigma) << (k * bpc as usize);
                    rest /= sigma;
                }
                let q = Window { length: q_len, bits };
                for j in 0..desc.size {
                    let v = next_direct(&desc, j, &q, bpc)?;
                    let mut key = record.bits().clone();
                    self.layout.push_query(&mut key, j, &q);
                    batch.push((key.words().into(), v));
                }
            }
        }
        let written = batch.len();
        let mut memo = self.write();
        for (k, v) in batch {
            memo.entry(k).or_insert(v);
        }
        Ok(written)
    }

    /// All entries ordered by `num(Z)`.
    pub fn entries(&self) -> Vec<(BitBuf, NextResult)> {
        let b = self.key_bits();
        let mut out: Vec<(BitBuf, NextResult)> = self
            .read()
            .iter()
            .map(|(k, &v)| (BitBuf::from_words(k, b), v))
            .collect();
        out.sort_by(|a, b| a.0.words().iter().rev().cmp(b.0.words().iter().rev()));
        out
    }

    /// Writes the table in the `PKSM` cache format.
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        let entries = self.entries();
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&[CACHE_VERSION])?;
        w.write_all(&(self.r() as u32).to_le_bytes())?;
        w.write_all(&self.alphabet().sigma().to_le_bytes())?;
        w.write_all(&(self.key_bits() as u32).to_le_bytes())?;
        w.write_all(&(entries.len() as u64).to_le_bytes())?;
        for (key, v) in &entries {
            w.write_all(&key.to_le_bytes())?;
            w.write_all(&v.consumed.to_le_bytes())?;
            w.write_all(&v.end.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `PKSM` cache into a fresh table. Every entry is re-derived and
    /// checked.
    pub fn read_cache<R: Read>(mut rd: R) -> Result<NextTable> {
        let mut header = [0u8; 4 + 1 + 12 + 8];
        rd.read_exact(&mut header)?;
        if &header[..4] != CACHE_MAGIC {
            return Err(Error::CacheFormat("bad magic".into()));
        }
        if header[4] != CACHE_VERSION {
            return Err(Error::CacheFormat(format!("unsupported version {}", header[4])));
        }
        let u32_at = |at: usize| u32::from_le_bytes(header[at..at + 4].try_into().unwrap());
        let (r, sigma, b) = (u32_at(5) as usize, u32_at(9), u32_at(13) as usize);
        let count = u64::from_le_bytes(header[17..25].try_into().unwrap());
        let alphabet = Alphabet::new(sigma).map_err(|e| Error::CacheFormat(e.to_string()))?;
        let table = NextTable::new(r, alphabet).map_err(|e| Error::CacheFormat(e.to_string()))?;
        if b != table.key_bits() {
            return Err(Error::CacheFormat(format!(
                "key width {b} does not match b(r = {r}, sigma = {sigma}) = {}",
                table.key_bits()
            )));
        }
        let key_bytes = b.div_ceil(8);
        let mut buf = vec![0u8; key_bytes + 8];
        let bpc = alphabet.bits_per_char();
        {
            let mut memo = table.write();
            for _ in 0..count {
                rd.read_exact(&mut buf)?;
                let key = BitBuf::from_le_bytes(&buf[..key_bytes], b);
                if key.to_le_bytes() != buf[..key_bytes] {
                    return Err(Error::CacheFormat("key has bits beyond its width".into()));
                }
                let consumed = u32::from_le_bytes(buf[key_bytes..key_bytes + 4].try_into().unwrap());
                let end = u32::from_le_bytes(buf[key_bytes + 4..].try_into().unwrap());
                let (desc, j, q) = table.layout.decode(&key)?;
                let expect = next_direct(&desc, j, &q, bpc)?;
                if expect != (NextResult { consumed, end }) {
                    return Err(Error::CacheFormat("entry disagrees with its key".into()));
                }
                memo.insert(key.words().into(), expect);
            }
        }
        let mut probe = [0u8; 1];
        if rd.read(&mut probe)? != 0 {
            return Err(Error::CacheFormat("trailing bytes".into()));
        }
        Ok(table)
    }

    /// Copies every entry of `other` into this table.
    pub fn absorb(&self, other: &NextTable) -> Result<()> {
        if other.layout != self.layout {
            return Err(Error::CacheFormat("cache was built for a different (r, sigma)".into()));
        }
        let theirs = other.read();
        let mut ours = self.write();
        for (k, &v) in theirs.iter() {
            ours.entry(k.clone()).or_insert(v);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::MpAutomaton;
    use crate::packed::{Code, PackedString};
    use crate::segment::SegmentAutomaton;

    fn abc(s: &str) -> Vec<Code> {
        s.bytes().map(|b| Code::from(b - b'a')).collect()
    }

    fn ababca(r: usize) -> SegmentAutomaton {
        let p = PackedString::pack(&abc("ababca"), Alphabet::new(3).unwrap()).unwrap();
        SegmentAutomaton::build(MpAutomaton::build(&p).unwrap(), r).unwrap()
    }

    fn window(s: &str) -> Window {
        Window::from_codes(&abc(s), Alphabet::new(3).unwrap()).unwrap()
    }

    #[test]
    fn direct_examples() {
        let sa = ababca(4);
        let seg1 = SegmentDescription::from_automaton(&sa, 1).unwrap();
        assert_eq!(next_direct(&seg1, 1, &window("bac"), 2).unwrap(), NextResult::new(2, 1));
        let seg0 = SegmentDescription::from_automaton(&sa, 0).unwrap();
        assert_eq!(next_direct(&seg0, 0, &window("aba"), 2).unwrap(), NextResult::new(3, 3));
        for j in 0..4 {
            assert_eq!(next_direct(&seg1, j, &Window::EMPTY, 2).unwrap(), NextResult::new(0, j));
        }
        // root self-loop and accepting stop
        assert_eq!(next_direct(&seg0, 1, &window("cac"), 2).unwrap(), NextResult::new(3, 0));
        let seg2 = SegmentDescription::from_automaton(&sa, 2).unwrap();
        assert_eq!(next_direct(&seg2, 0, &window("ca"), 2).unwrap(), NextResult::new(1, 1));
        assert!(next_direct(&seg2, 3, &Window::EMPTY, 2).is_err());
    }

    #[test]
    fn table_lookup_memoizes() {
        let sa = ababca(4);
        let table = NextTable::new(4, Alphabet::new(3).unwrap()).unwrap();
        let rec = SegmentEncoding::encode(&sa, 1).unwrap();
        let key = NextKey::new(&rec, 1, &window("bac")).unwrap();
        assert_eq!(key.bits().len(), table.key_bits());
        assert_eq!(table.lookup(&key).unwrap(), NextResult::new(2, 1));
        assert_eq!(table.counters(), (0, 1));
        assert_eq!(table.lookup(&key).unwrap(), NextResult::new(2, 1));
        assert_eq!(table.counters(), (1, 1));
        assert_eq!(table.len(), 1);
    }

    #[test]
    fn malformed_keys() {
        let table = NextTable::new(4, Alphabet::new(3).unwrap()).unwrap();
        let zeros = NextKey::from_bits(BitBuf::zeros(table.key_bits()));
        assert!(matches!(table.lookup(&zeros), Err(Error::MalformedEncoding(_))));
        let short = NextKey::from_bits(BitBuf::zeros(table.key_bits() - 1));
        assert!(table.lookup(&short).is_err());
        // j past the segment end
        let sa = ababca(4);
        let rec = SegmentEncoding::encode(&sa, 2).unwrap();
        let key = NextKey::new(&rec, 3, &Window::EMPTY).unwrap();
        assert!(table.lookup(&key).is_err());
        assert!(table.is_empty());
    }

    #[test]
    fn key_width_formula() {
        for (r, sigma) in [(2, 2), (4, 3), (4, 4), (8, 256), (10, 4)] {
            let a = Alphabet::new(sigma).unwrap();
            let l = KeyLayout::new(r, a).unwrap();
            let bpc = a.bits_per_char() as usize;
            let lb = crate::encoding::ceil_log2(r);
            assert_eq!(l.width(), crate::encoding::encoding_width(r, a).unwrap() + 2 * lb + (r - 1) * bpc);
        }
        assert!(KeyLayout::new(10, Alphabet::bytes()).is_err());
    }

    #[test]
    fn choose_r_examples() {
        let c = choose_r(2, Alphabet::bytes());
        assert_eq!(c.r, 2);
        assert!(!c.within_budget);
        // b(2, 4) = 32 already exceeds 2^28
        let c = choose_r(1 << 28, Alphabet::dna());
        assert_eq!((c.r, c.key_bits), (2, 32));
        let c = choose_r(1 << 32, Alphabet::dna());
        assert_eq!((c.r, c.key_bits, c.within_budget), (2, 32, true));
        let c = choose_r(u64::MAX, Alphabet::new(2).unwrap());
        assert_eq!(c.r, 4);
        assert!(c.within_budget);
    }

    #[test]
    fn shared_tables() {
        let a = NextTable::shared(4, Alphabet::new(5).unwrap()).unwrap();
        let b = NextTable::shared(4, Alphabet::new(5).unwrap()).unwrap();
        let c = NextTable::shared(6, Alphabet::new(5).unwrap()).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert!(!Arc::ptr_eq(&a, &c));
    }

    #[test]
    fn eager_fill_counts() {
        let sa = ababca(4);
        let table = NextTable::new(4, Alphabet::new(3).unwrap()).unwrap();
        let rec = SegmentEncoding::encode(&sa, 2).unwrap();
        // 3 states times (1 + 3 + 9 + 27) queries
        assert_eq!(table.fill_segment(&rec).unwrap(), 3 * 40);
        assert_eq!(table.len(), 120);
        assert_eq!(table.query(&rec, 0, &window("ca")).unwrap(), NextResult::new(1, 1));
    }

    #[test]
    fn cache_round_trip() {
        let sa = ababca(4);
        let table = NextTable::new(4, Alphabet::new(3).unwrap()).unwrap();
        for i in 0..3 {
            table.fill_segment(&SegmentEncoding::encode(&sa, i).unwrap()).unwrap();
        }
        let mut bytes = Vec::new();
        table.write_cache(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"PKSM");
        let loaded = NextTable::read_cache(&bytes[..]).unwrap();
        assert_eq!(loaded.entries(), table.entries());

        let mut again = Vec::new();
        loaded.write_cache(&mut again).unwrap();
        assert_eq!(again, bytes);

        // wrong b
        let mut bad = bytes.clone();
        bad[13] ^= 1;
        assert!(matches!(NextTable::read_cache(&bad[..]), Err(Error::CacheFormat(_))));
        // corrupted value
        let mut bad = bytes.clone();
        let n = bad.len();
        bad[n - 1] ^= 0x40;
        assert!(NextTable::read_cache(&bad[..]).is_err());
        // truncated
        assert!(NextTable::read_cache(&bytes[..bytes.len() - 3]).is_err());
    }
}
