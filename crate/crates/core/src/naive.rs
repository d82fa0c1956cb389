//! Quadratic reference matcher.

use crate::packed::{Code, PackedString};

/// 1-based end positions of every occurrence of `pattern` in `text`.
pub fn find_all(pattern: &[Code], text: &[Code]) -> Vec<usize> {
    let m = pattern.len();
    if m == 0 || m > text.len() {
        return Vec::new();
    }
    text.windows(m)
        .enumerate()
        .filter(|(_, w)| *w == pattern)
        .map(|(i, _)| i + m)
        .collect()
}

pub fn find_all_packed(pattern: &PackedString, text: &PackedString) -> Vec<usize> {
    find_all(&pattern.unpack(), &text.unpack())
}
