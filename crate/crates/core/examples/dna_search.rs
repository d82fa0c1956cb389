//! Search a generated DNA sequence, mapping bytes through the DNA alphabet.
//!
//!     cargo run --release --example dna_search -- [LENGTH] [PATTERN]

use std::time::Instant;

use packmatch::cli::ByteMapping;
use packmatch::{PackedString, PreprocessedPattern};
use rand::{Rng, SeedableRng};

fn main() -> packmatch::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(2_000_000, |s| s.parse().expect("LENGTH"));
    let pattern = args.next().unwrap_or_else(|| "GATTACA".into());

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut genome: Vec<u8> = (0..n).map(|_| b"ACGT"[rng.gen_range(0..4)]).collect();
    // FASTA-style line breaks, stripped by the mapping
    for i in (60..genome.len()).step_by(61) {
        genome[i] = b'\n';
    }

    let dna = ByteMapping::dna();
    let clock = Instant::now();
    let text = PackedString::pack(&dna.map(&genome, true)?, dna.alphabet())?;
    let p = PackedString::pack(&dna.map(pattern.as_bytes(), false)?, dna.alphabet())?;
    println!("packed {} bases into {} words in {:?}", text.len(), text.words().len(), clock.elapsed());

    for r in [2, 4, 6] {
        let pp = PreprocessedPattern::with_r(&p, r)?;
        let clock = Instant::now();
        let out = pp.search(&text)?;
        println!(
            "r = {r}: {} occurrences of {pattern} in {:?} ({} lookups, {} heavy forward, {} heavy failure)",
            out.end_positions.len(),
            clock.elapsed(),
            out.iterations,
            out.stats.hforward,
            out.stats.hfail
        );
    }
    Ok(())
}
