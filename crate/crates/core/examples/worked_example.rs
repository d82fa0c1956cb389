//! P = ababca, Q = abacacababca, r = 4: segments, one table entry, and the
//! full search trace.

use packmatch::{Alphabet, Code, NextKey, PackedString, PreprocessedPattern, TraceStep, Window};

fn abc(s: &str) -> Vec<Code> {
    s.bytes().map(|b| Code::from(b - b'a')).collect()
}

fn main() -> packmatch::Result<()> {
    let alphabet = Alphabet::new(3)?;
    let pattern = PackedString::pack(&abc("ababca"), alphabet)?;
    let text = PackedString::pack(&abc("abacacababca"), alphabet)?;
    let pp = PreprocessedPattern::with_r(&pattern, 4)?;

    println!("fail links: {:?}", pp.automaton().mp().fail_links());
    for seg in pp.automaton().segments() {
        println!("segment {}: K-states {}..={} (size {})", seg.index, seg.start, seg.end, seg.size());
    }

    let q = Window::from_codes(&abc("bac"), alphabet)?;
    let next = pp.table().lookup(&NextKey::new(&pp.records()[1], 1, &q)?)?;
    println!("Next(segment 1, j = 1, \"bac\") = ({}, {})", next.consumed, next.end);

    let (out, trace) = pp.search_traced(&text)?;
    for step in &trace {
        let at = step.state();
        match step {
            TraceStep::Light { consumed, .. } => println!("  lookup consumed {consumed} -> ({}, {})", at.segment, at.local),
            TraceStep::Single { kind, accepting, .. } => println!(
                "  {:<14} -> ({}, {}){}",
                kind.map_or("self-loop".into(), |k| format!("{k:?}")),
                at.segment,
                at.local,
                if *accepting { "  match" } else { "" }
            ),
        }
    }
    println!("occurrences: {:?}  iterations: {}  stats: {:?}", out.end_positions, out.iterations, out.stats);
    Ok(())
}
