//! The segment automaton over a Morris-Pratt automaton.
//!
//! The states `0..=m` are covered by overlapping segments `[l_i, r_i]` with
//! `l_i = i * r/2` and `r_i = min(l_i + r - 1, m)`, generated while
//! `l_i < m`. Segment-local state `(i, j)` stands for K-state `l_i + j`.
//!
//! A transition `s -> s'` copied into segment `i` is *light* when `s'` stays
//! inside `[l_i, r_i]` and *heavy* otherwise. Heavy transitions land in the
//! segment holding `s'` in its leftmost half, i.e. segment
//! `min(2s'/r, z - 1)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mp::MpAutomaton;
use crate::packed::{Code, PackedString};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub index: usize,
    /// First K-state, `l_i`.
    pub start: usize,
    /// Last K-state, `r_i`.
    pub end: usize,
}

impl Segment {
    #[inline]
    pub fn size(&self) -> usize {
        self.end - self.start + 1
    }

    #[inline]
    pub fn contains(&self, s: usize) -> bool {
        self.start <= s && s <= self.end
    }
}

/// A state `(segment, local)` of the segment automaton.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CState {
    pub segment: usize,
    pub local: usize,
}

impl CState {
    pub const START: CState = CState { segment: 0, local: 0 };

    pub fn new(segment: usize, local: usize) -> Self {
        CState { segment, local }
    }
}

impl From<(usize, usize)> for CState {
    fn from((segment, local): (usize, usize)) -> Self {
        CState { segment, local }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransitionKind {
    LightForward,
    LightFailure,
    HeavyForward,
    HeavyFailure,
}

impl TransitionKind {
    pub fn is_heavy(self) -> bool {
        matches!(self, TransitionKind::HeavyForward | TransitionKind::HeavyFailure)
    }

    pub fn is_forward(self) -> bool {
        matches!(self, TransitionKind::LightForward | TransitionKind::HeavyForward)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transition {
    pub kind: TransitionKind,
    /// Set only on the forward transition into K-state `m`.
    pub accepting: bool,
    pub target: CState,
}

/// Which transition of a state to classify.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Edge {
    Forward,
    Failure,
}

/// The single transition taken next from a state on some character.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    Take(Transition),
    /// Mismatch at K-state 0: consume the character and stay.
    RootSelfLoop,
}

impl Move {
    /// Whether the move consumes the character it was chosen for.
    pub fn consumes(&self) -> bool {
        match self {
            Move::Take(t) => t.kind.is_forward(),
            Move::RootSelfLoop => true,
        }
    }
}

/// Transition counters for one simulation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SimStats {
    #[serde(rename = "N_hforward")]
    pub hforward: u64,
    #[serde(rename = "N_hfail")]
    pub hfail: u64,
    #[serde(rename = "N_accept")]
    pub accept: u64,
    /// Light moves, root self-loops included. Only the character-at-a-time
    /// reference simulator fills this in.
    #[serde(rename = "N_light")]
    pub light: u64,
}

impl SimStats {
    pub(crate) fn record(&mut self, mv: &Move) {
        match mv {
            Move::RootSelfLoop => self.light += 1,
            Move::Take(t) => {
                match t.kind {
                    TransitionKind::HeavyForward => self.hforward += 1,
                    TransitionKind::HeavyFailure => self.hfail += 1,
                    _ => self.light += 1,
                }
                if t.accepting {
                    self.accept += 1;
                }
            }
        }
    }

    /// `(N_hforward, N_hfail, N_accept)`.
    pub fn heavy_and_accepting(&self) -> (u64, u64, u64) {
        (self.hforward, self.hfail, self.accept)
    }
}

#[derive(Clone, Debug)]
pub struct SegmentAutomaton {
    mp: MpAutomaton,
    r: usize,
    segments: Vec<Segment>,
}

impl SegmentAutomaton {
    pub fn build(mp: MpAutomaton, r: usize) -> Result<Self> {
        let m = mp.len();
        if r < 2 || !r.is_multiple_of(2) || r > m + 1 {
            return Err(Error::InvalidParameter(format!(
                "segment size r = {r} must be even with 2 <= r <= m + 1 = {}",
                m + 1
            )));
        }
        let half = r / 2;
        let segments = (0..)
            .map(|i| i * half)
            .take_while(|&start| start < m)
            .enumerate()
            .map(|(index, start)| Segment {
                index,
                start,
                end: (start + r - 1).min(m),
            })
            .collect();
        Ok(SegmentAutomaton { mp, r, segments })
    }

    pub fn mp(&self) -> &MpAutomaton {
        &self.mp
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    /// Pattern length.
    #[inline]
    pub fn m(&self) -> usize {
        self.mp.len()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    #[inline]
    pub fn segment(&self, i: usize) -> &Segment {
        &self.segments[i]
    }

    /// K-state represented by `at`.
    #[inline]
    pub fn k_state(&self, at: CState) -> usize {
        self.segments[at.segment].start + at.local
    }

    /// Copy of K-state `s` that heavy transitions into `s` land on.
    #[inline]
    pub fn landing(&self, s: usize) -> CState {
        let segment = (2 * s / self.r).min(self.segments.len() - 1);
        CState {
            segment,
            local: s - self.segments[segment].start,
        }
    }

    fn check_state(&self, at: CState) -> Result<()> {
        match self.segments.get(at.segment) {
            Some(seg) if at.local < seg.size() => Ok(()),
            Some(seg) => Err(Error::OutOfRange {
                index: at.local,
                len: seg.size(),
            }),
            None => Err(Error::OutOfRange {
                index: at.segment,
                len: self.segments.len(),
            }),
        }
    }

    /// Classifies the forward or failure transition out of `at`.
    pub fn classify(&self, at: CState, edge: Edge) -> Result<Transition> {
        self.check_state(at)?;
        let s = self.k_state(at);
        let m = self.m();
        let target = match edge {
            Edge::Forward if s >= m => return Err(Error::NoForwardTransition(s)),
            Edge::Forward => s + 1,
            Edge::Failure if s == 0 => return Err(Error::NoFailureTransition),
            Edge::Failure => self.mp.fail(s),
        };
        Ok(self.copy_transition(at, target, edge == Edge::Forward))
    }

    #[inline]
    fn copy_transition(&self, at: CState, target: usize, forward: bool) -> Transition {
        let seg = &self.segments[at.segment];
        let accepting = forward && target == self.m();
        if seg.contains(target) {
            Transition {
                kind: if forward {
                    TransitionKind::LightForward
                } else {
                    TransitionKind::LightFailure
                },
                accepting,
                target: CState::new(at.segment, target - seg.start),
            }
        } else {
            Transition {
                kind: if forward {
                    TransitionKind::HeavyForward
                } else {
                    TransitionKind::HeavyFailure
                },
                accepting,
                target: self.landing(target),
            }
        }
    }

    /// The single transition taken from `at` when the next character is
    /// `alpha`: the forward transition if its label matches, otherwise the
    /// failure transition (or the self-loop at K-state 0).
    #[inline]
    pub fn next_move(&self, at: CState, alpha: Code) -> Move {
        let s = self.k_state(at);
        if self.mp.label(s) == Some(alpha) {
            Move::Take(self.copy_transition(at, s + 1, true))
        } else if s == 0 {
            Move::RootSelfLoop
        } else {
            Move::Take(self.copy_transition(at, self.mp.fail(s), false))
        }
    }

    /// Character-at-a-time simulation. Returns 1-based end positions.
    pub fn simulate_reference(&self, text: &PackedString) -> (Vec<usize>, SimStats) {
        let mut stats = SimStats::default();
        let mut out = Vec::new();
        let mut at = CState::START;
        for (k, alpha) in text.iter().enumerate() {
            loop {
                let mv = self.next_move(at, alpha);
                stats.record(&mv);
                match mv {
                    Move::RootSelfLoop => break,
                    Move::Take(t) => {
                        at = t.target;
                        if t.accepting {
                            out.push(k + 1);
                        }
                        if t.kind.is_forward() {
                            break;
                        }
                    }
                }
            }
        }
        (out, stats)
    }
}
