//! Lazy and eager table filling, and the on-disk cache.

use std::fs::File;
use std::io::{BufReader, BufWriter};

use packmatch::{Alphabet, Code, NextTable, PackedString, PreprocessOptions, PreprocessedPattern};

fn main() -> packmatch::Result<()> {
    let a = Alphabet::new(2)?;
    let p = PackedString::pack(&[0, 1, 1, 0, 1, 0, 0, 1], a)?;
    let text: Vec<Code> = (0..5000u32).map(|i| (i.count_ones() % 2) as Code).collect();
    let text = PackedString::pack(&text, a)?;

    let lazy = PreprocessedPattern::with_r(&p, 4)?;
    let found = lazy.search(&text)?;
    let (hits, misses) = lazy.table().counters();
    println!(
        "lazy: {} matches, table holds {} entries after {hits} hits / {misses} misses (key {} bits)",
        found.end_positions.len(),
        lazy.table().len(),
        lazy.table().key_bits()
    );

    let eager = PreprocessedPattern::with_options(
        &p,
        &PreprocessOptions {
            forced_r: Some(4),
            eager: true,
            table: Some(NextTable::new(4, a)?.into()),
            ..Default::default()
        },
    )?;
    println!("eager: {} entries before searching", eager.table().len());
    assert_eq!(eager.search(&text)?, found);

    let path = std::env::temp_dir().join("packmatch-example.pksm");
    eager.table().write_cache(BufWriter::new(File::create(&path)?))?;
    let loaded = NextTable::read_cache(BufReader::new(File::open(&path)?))?;
    println!("cache {}: {} entries reloaded and verified", path.display(), loaded.len());
    Ok(())
}
