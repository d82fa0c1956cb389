//! Packed search: simulate the segment automaton, resolving runs of light
//! transitions with one table lookup each.
//!
//! Each iteration looks up `Next` on the next `r - 1` text characters from the
//! current state, then takes the single transition that stopped it (heavy,
//! accepting, or a light one when the whole window was consumed). Positions
//! are 1-based end positions.

use std::sync::Arc;

use serde::Serialize;

use crate::encoding::SegmentEncoding;
use crate::error::{Error, Result};
use crate::mp::MpAutomaton;
use crate::next::{choose_r, NextResult, NextTable, RChoice};
use crate::packed::{PackedString, Window};
use crate::segment::{CState, Move, SegmentAutomaton, SimStats, TransitionKind};

/// Default table budget, `2^22` entries.
pub const DEFAULT_BUDGET: u64 = 1 << 22;

#[derive(Clone, Debug)]
pub struct PreprocessOptions {
    /// Table budget `t` in entries.
    pub t_budget: u64,
    /// Use this `r` instead of deriving one from the budget. Still clamped to
    /// `m + 1`.
    pub forced_r: Option<usize>,
    /// Tabulate every `(j, q)` of every segment during preprocessing.
    pub eager: bool,
    /// Use this table instead of the shared one for `(r, σ)`.
    pub table: Option<Arc<NextTable>>,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            t_budget: DEFAULT_BUDGET,
            forced_r: None,
            eager: false,
            table: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PreprocessedPattern {
    sa: SegmentAutomaton,
    records: Vec<SegmentEncoding>,
    table: Arc<NextTable>,
    budget_choice: RChoice,
    t_budget: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    /// Sorted 1-based end positions.
    pub end_positions: Vec<usize>,
    pub stats: SimStats,
    pub iterations: u64,
}

/// One step of a traced search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceStep {
    /// A table lookup consumed `consumed` characters and ended at `state`.
    Light { consumed: usize, state: CState },
    /// A single transition; `kind` is `None` for the self-loop at K-state 0.
    Single {
        kind: Option<TransitionKind>,
        accepting: bool,
        state: CState,
    },
}

impl TraceStep {
    pub fn state(&self) -> CState {
        match *self {
            TraceStep::Light { state, .. } | TraceStep::Single { state, .. } => state,
        }
    }
}

/// Per-search array of full-window lookups, indexed by segment, local state
/// and window bits. Slots hold `0x8000 | consumed << 7 | end`, or 0 when
/// not yet fetched from the shared table.
struct FrontCache {
    slots: Vec<u16>,
    r: usize,
    q_bits: usize,
}

impl FrontCache {
    fn new(segments: usize, r: usize, q_bits: usize, budget: u64) -> Option<Self> {
        let len = (segments * r).checked_mul(1usize.checked_shl(q_bits as u32)?)?;
        (r <= 64 && q_bits < 32 && len as u64 <= budget).then(|| FrontCache {
            slots: vec![0; len],
            r,
            q_bits,
        })
    }

    #[inline]
    fn slot(&self, at: CState, q: &Window) -> usize {
        ((at.segment * self.r + at.local) << self.q_bits) | q.bits as usize
    }

    #[inline]
    fn get(&self, slot: usize) -> Option<NextResult> {
        let v = self.slots[slot];
        (v != 0).then(|| NextResult::new(usize::from((v >> 7) & 0xff), usize::from(v & 0x7f)))
    }

    #[inline]
    fn put(&mut self, slot: usize, v: NextResult) {
        self.slots[slot] = 0x8000 | (v.consumed as u16) << 7 | v.end as u16;
    }
}

/// Largest even value `<= x` (and at least 2).
fn even_floor(x: usize) -> usize {
    (x & !1).max(2)
}

impl PreprocessedPattern {
    /// Preprocesses with `r` derived from `t_budget`.
    pub fn new(pattern: &PackedString, t_budget: u64) -> Result<Self> {
        Self::with_options(
            pattern,
            &PreprocessOptions {
                t_budget,
                ..Default::default()
            },
        )
    }

    /// Preprocesses with a fixed `r` (clamped to `m + 1`).
    pub fn with_r(pattern: &PackedString, r: usize) -> Result<Self> {
        Self::with_options(
            pattern,
            &PreprocessOptions {
                forced_r: Some(r),
                ..Default::default()
            },
        )
    }

    pub fn with_options(pattern: &PackedString, opts: &PreprocessOptions) -> Result<Self> {
        let alphabet = pattern.alphabet();
        let m = pattern.len();
        if m == 0 {
            return Err(Error::EmptyPattern);
        }
        let budget_choice = choose_r(opts.t_budget, alphabet);
        let window_cap = even_floor(alphabet.chars_per_word() + 1);
        let r = match (opts.forced_r, &opts.table) {
            (_, Some(t)) => t.r(),
            (Some(r), None) => {
                if r < 2 || r % 2 != 0 {
                    return Err(Error::InvalidParameter(format!("forced r = {r} must be even and >= 2")));
                }
                r
            }
            (None, None) => {
                if !budget_choice.within_budget {
                    log::warn!(
                        "no even r fits a budget of {} entries at sigma = {} (b(2) = {}); using r = 2",
                        opts.t_budget,
                        alphabet.sigma(),
                        budget_choice.key_bits
                    );
                }
                budget_choice.r.min(window_cap)
            }
        };
        let r = if r > m + 1 {
            log::debug!("clamping r = {r} to {} for m = {m}", even_floor(m + 1));
            even_floor(m + 1)
        } else {
            r
        };
        let table = match &opts.table {
            Some(t) if t.r() == r && t.alphabet() == alphabet => Arc::clone(t),
            Some(t) => {
                return Err(Error::InvalidParameter(format!(
                    "table is for r = {}, sigma = {}; pattern needs r = {r}, sigma = {}",
                    t.r(),
                    t.alphabet().sigma(),
                    alphabet.sigma()
                )))
            }
            None => NextTable::shared(r, alphabet)?,
        };
        let sa = SegmentAutomaton::build(MpAutomaton::build(pattern)?, r)?;
        let records = (0..sa.segments().len())
            .map(|i| SegmentEncoding::encode(&sa, i))
            .collect::<Result<Vec<_>>>()?;
        if opts.eager {
            for rec in &records {
                table.fill_segment(rec)?;
            }
        }
        Ok(PreprocessedPattern {
            sa,
            records,
            table,
            budget_choice,
            t_budget: opts.t_budget,
        })
    }

    pub fn r(&self) -> usize {
        self.sa.r()
    }

    pub fn m(&self) -> usize {
        self.sa.m()
    }

    pub fn automaton(&self) -> &SegmentAutomaton {
        &self.sa
    }

    pub fn records(&self) -> &[SegmentEncoding] {
        &self.records
    }

    pub fn table(&self) -> &Arc<NextTable> {
        &self.table
    }

    /// What the table budget alone would have picked.
    pub fn budget_choice(&self) -> RChoice {
        self.budget_choice
    }

    pub fn search(&self, text: &PackedString) -> Result<SearchOutcome> {
        self.run(text, None)
    }

    /// Search that also records the state after every lookup and every
    /// single transition.
    pub fn search_traced(&self, text: &PackedString) -> Result<(SearchOutcome, Vec<TraceStep>)> {
        let mut trace = Vec::new();
        let out = self.run(text, Some(&mut trace))?;
        Ok((out, trace))
    }

    fn run(&self, text: &PackedString, mut trace: Option<&mut Vec<TraceStep>>) -> Result<SearchOutcome> {
        let alphabet = self.sa.mp().pattern().alphabet();
        if text.alphabet() != alphabet {
            return Err(Error::InvalidParameter(format!(
                "text alphabet (sigma = {}) differs from pattern alphabet (sigma = {})",
                text.alphabet().sigma(),
                alphabet.sigma()
            )));
        }
        let n = text.len();
        let span = self.r() - 1;
        let mut out = SearchOutcome::default();
        let mut at = CState::START;
        let mut k = 0;
        let q_bits = span * alphabet.bits_per_char() as usize;
        let mut front = if n >= span {
            FrontCache::new(self.records.len(), self.r(), q_bits, self.t_budget)
        } else {
            None
        };
        loop {
            out.iterations += 1;
            let q = text.window_unchecked(k, span.min(n - k));
            let next = match front.as_mut().filter(|_| q.length == span) {
                Some(front) => {
                    let slot = front.slot(at, &q);
                    match front.get(slot) {
                        Some(v) => v,
                        None => {
                            let v = self.table.query(&self.records[at.segment], at.local, &q)?;
                            front.put(slot, v);
                            v
                        }
                    }
                }
                None => self.table.query(&self.records[at.segment], at.local, &q)?,
            };
            let l = next.consumed as usize;
            at.local = next.end as usize;
            if let Some(t) = trace.as_deref_mut() {
                t.push(TraceStep::Light { consumed: l, state: at });
            }
            if k + l == n {
                break;
            }
            let mv = self.sa.next_move(at, text.code_unchecked(k + l));
            match mv {
                Move::RootSelfLoop => {
                    debug_assert_eq!(l, q.length, "lookup stopped before a root self-loop");
                    k += l + 1;
                }
                Move::Take(t) => {
                    debug_assert!(
                        l == q.length || t.kind.is_heavy() || t.accepting,
                        "lookup stopped before a light non-accepting transition"
                    );
                    match t.kind {
                        TransitionKind::HeavyForward => out.stats.hforward += 1,
                        TransitionKind::HeavyFailure => out.stats.hfail += 1,
                        _ => {}
                    }
                    at = t.target;
                    k += l + usize::from(t.kind.is_forward());
                    if t.accepting {
                        out.stats.accept += 1;
                        out.end_positions.push(k);
                    }
                }
            }
            if let Some(t) = trace.as_deref_mut() {
                let (kind, accepting) = match mv {
                    Move::RootSelfLoop => (None, false),
                    Move::Take(t) => (Some(t.kind), t.accepting),
                };
                t.push(TraceStep::Single {
                    kind,
                    accepting,
                    state: at,
                });
            }
        }
        Ok(out)
    }
}
