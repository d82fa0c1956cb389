//! Exact string matching on packed strings.
//!
//! Pattern and text are stored with `ceil(log2 σ)` bits per character. The
//! pattern's Morris-Pratt automaton is split into overlapping segments of `r`
//! states; each segment is summarized in a fixed-width record, and runs of
//! transitions that stay inside a segment are resolved by a table keyed on
//! that record plus the next `r - 1` text characters. Only transitions that
//! cross segments or report a match are simulated one at a time.
//!
//! ```
//! use packmatch::{Alphabet, PackedString, PreprocessedPattern};
//!
//! let dna = |s: &str| -> PackedString {
//!     let codes: Vec<u16> = s.bytes().map(|b| b"ACGT".iter().position(|&c| c == b).unwrap() as u16).collect();
//!     PackedString::pack(&codes, Alphabet::dna()).unwrap()
//! };
//! let pattern = PreprocessedPattern::with_r(&dna("GATTACA"), 4).unwrap();
//! let found = pattern.search(&dna("TTGATTACAGATTACA")).unwrap();
//! assert_eq!(found.end_positions, vec![9, 16]);
//! ```

pub mod bits;
pub mod cli;
pub mod encoding;
pub mod error;
pub mod mp;
pub mod naive;
pub mod next;
pub mod packed;
pub mod search;
pub mod segment;

pub use encoding::{encoding_width, EncodingLayout, SegmentDescription, SegmentEncoding};
pub use error::{Error, Result};
pub use mp::MpAutomaton;
pub use next::{choose_r, next_direct, KeyLayout, NextKey, NextResult, NextTable, RChoice};
pub use packed::{Alphabet, Code, PackedString, Window};
pub use search::{PreprocessOptions, PreprocessedPattern, SearchOutcome, TraceStep};
pub use segment::{CState, Edge, Move, Segment, SegmentAutomaton, SimStats, Transition, TransitionKind};
