//! The Morris-Pratt automaton.
//!
//! States are the integers `0..=m`; state `s` means "the last `s` characters
//! read equal `P[..s]`". The forward transition out of `s < m` is labeled
//! `P[s]` (0-based) and the one into `m` is the accepting transition. Every
//! state `s >= 1` has a failure transition to `fail(s)`, the length of the
//! longest proper border of `P[..s]`.
//!
//! After reaching `m` the matcher re-enters via `fail(m)` before reading the
//! next character, so overlapping occurrences are all reported.

use crate::error::{Error, Result};
use crate::packed::{Code, PackedString};

#[derive(Clone, Debug)]
pub struct MpAutomaton {
    pattern: PackedString,
    codes: Vec<Code>,
    // fail[0] is unused and kept at 0
    fail: Vec<usize>,
}

/// Outcome of consuming one character.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub state: usize,
    pub accept: bool,
    /// Transitions followed, counting the final forward or root self-loop.
    pub transitions: usize,
}

impl MpAutomaton {
    pub fn build(pattern: &PackedString) -> Result<Self> {
        let codes = pattern.unpack();
        let m = codes.len();
        if m == 0 {
            return Err(Error::EmptyPattern);
        }
        let mut fail = vec![0usize; m + 1];
        let mut t = 0;
        for s in 1..m {
            while t > 0 && codes[t] != codes[s] {
                t = fail[t];
            }
            if codes[t] == codes[s] {
                t += 1;
            }
            fail[s + 1] = t;
        }
        Ok(MpAutomaton {
            pattern: pattern.clone(),
            codes,
            fail,
        })
    }

    pub fn pattern(&self) -> &PackedString {
        &self.pattern
    }

    /// Pattern length `m`, which is also the accepting state.
    #[inline]
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Label of the forward transition out of `s`, if any.
    #[inline]
    pub fn label(&self, s: usize) -> Option<Code> {
        self.codes.get(s).copied()
    }

    /// Failure target of `s` in `1..=m`.
    #[inline]
    pub fn fail(&self, s: usize) -> usize {
        assert!(s >= 1 && s <= self.len(), "state {s} has no failure transition");
        self.fail[s]
    }

    /// `fail(1..=m)` as a slice.
    pub fn fail_links(&self) -> &[usize] {
        &self.fail[1..]
    }

    /// Consumes `alpha` from state `s < m`.
    pub fn step(&self, s: usize, alpha: Code) -> Step {
        debug_assert!(s < self.len());
        let mut s = s;
        let mut transitions = 1;
        loop {
            if self.codes[s] == alpha {
                let next = s + 1;
                return Step {
                    state: next,
                    accept: next == self.len(),
                    transitions,
                };
            }
            if s == 0 {
                return Step {
                    state: 0,
                    accept: false,
                    transitions,
                };
            }
            s = self.fail[s];
            transitions += 1;
        }
    }

    /// All occurrences of the pattern in `text`, as sorted 1-based end
    /// positions.
    pub fn search_baseline(&self, text: &PackedString) -> Vec<usize> {
        self.search_counted(text).0
    }

    /// Like [`search_baseline`](Self::search_baseline), also returning the
    /// number of transitions followed.
    pub fn search_counted(&self, text: &PackedString) -> (Vec<usize>, usize) {
        let m = self.len();
        let mut out = Vec::new();
        let mut transitions = 0;
        let mut s = 0;
        for (k, alpha) in text.iter().enumerate() {
            if s == m {
                s = self.fail[m];
                transitions += 1;
            }
            let step = self.step(s, alpha);
            transitions += step.transitions;
            s = step.state;
            if step.accept {
                out.push(k + 1);
            }
        }
        (out, transitions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packed::Alphabet;
    use proptest::prelude::*;

    fn abc(s: &str) -> PackedString {
        let codes: Vec<Code> = s.bytes().map(|b| Code::from(b - b'a')).collect();
        PackedString::pack(&codes, Alphabet::new(3).unwrap()).unwrap()
    }

    // longest proper border of p[..s], by trying every length
    fn brute_fail(p: &[Code], s: usize) -> usize {
        (0..s).rev().find(|&k| p[..k] == p[s - k..s]).unwrap()
    }

    fn naive(p: &[Code], t: &[Code]) -> Vec<usize> {
        if p.len() > t.len() {
            return vec![];
        }
        (0..=t.len() - p.len())
            .filter(|&i| &t[i..i + p.len()] == p)
            .map(|i| i + p.len())
            .collect()
    }

    #[test]
    fn fail_examples() {
        let a = MpAutomaton::build(&abc("ababca")).unwrap();
        assert_eq!(a.fail_links(), &[0, 0, 1, 2, 0, 1]);
        let aaaa = PackedString::pack(&[0, 0, 0, 0], Alphabet::new(2).unwrap()).unwrap();
        assert_eq!(MpAutomaton::build(&aaaa).unwrap().fail_links(), &[0, 1, 2, 3]);
        assert_eq!(MpAutomaton::build(&abc("c")).unwrap().fail_links(), &[0]);
    }

    #[test]
    fn empty_pattern() {
        let e = PackedString::pack(&[], Alphabet::new(2).unwrap()).unwrap();
        assert!(matches!(MpAutomaton::build(&e), Err(Error::EmptyPattern)));
    }

    #[test]
    fn step_examples() {
        let a = MpAutomaton::build(&abc("ababca")).unwrap();
        let st = a.step(4, 2);
        assert_eq!((st.state, st.accept), (5, false));
        let st = a.step(0, 1);
        assert_eq!((st.state, st.accept), (0, false));
        let st = a.step(5, 0);
        assert_eq!((st.state, st.accept), (6, true));
    }

    #[test]
    fn search_examples() {
        let a = MpAutomaton::build(&abc("ababca")).unwrap();
        assert_eq!(a.search_baseline(&abc("abacacababca")), vec![12]);
        let aa = MpAutomaton::build(&abc("aa")).unwrap();
        assert_eq!(aa.search_baseline(&abc("aaaa")), vec![2, 3, 4]);
        let long = MpAutomaton::build(&abc("abcabc")).unwrap();
        assert!(long.search_baseline(&abc("abc")).is_empty());
    }

    fn pattern_and_text() -> impl Strategy<Value = (u32, Vec<Code>, Vec<Code>)> {
        prop::sample::select(vec![2u32, 4, 26]).prop_flat_map(|sigma| {
            (
                Just(sigma),
                prop::collection::vec(0..sigma as Code, 1..=12),
                prop::collection::vec(0..sigma as Code, 0..=300),
            )
        })
    }

    proptest! {
        #[test]
        fn fail_is_longest_border(p in prop::collection::vec(0..3 as Code, 1..=24)) {
            let a = MpAutomaton::build(&PackedString::pack(&p, Alphabet::new(3).unwrap()).unwrap()).unwrap();
            for s in 1..=p.len() {
                prop_assert!(a.fail(s) < s);
                prop_assert_eq!(a.fail(s), brute_fail(&p, s));
            }
            // failure links form a tree rooted at 0
            for s in 1..=p.len() {
                let (mut t, mut hops) = (s, 0);
                while t != 0 { t = a.fail(t); hops += 1; }
                prop_assert!(hops <= p.len());
            }
        }

        #[test]
        fn baseline_matches_naive((sigma, p, t) in pattern_and_text()) {
            let alphabet = Alphabet::new(sigma).unwrap();
            let a = MpAutomaton::build(&PackedString::pack(&p, alphabet).unwrap()).unwrap();
            let text = PackedString::pack(&t, alphabet).unwrap();
            let (found, transitions) = a.search_counted(&text);
            prop_assert_eq!(found, naive(&p, &t));
            prop_assert!(transitions <= 2 * t.len());
        }
    }
}
