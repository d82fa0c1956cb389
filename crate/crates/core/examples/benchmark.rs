//! Packed search against the MP baseline over a range of r.
//!
//!     cargo run --release --example benchmark

use packmatch::cli::{cmd_bench, BenchConfig, Generator};

fn main() -> packmatch::Result<()> {
    for generator in [Generator::Random, Generator::Periodic] {
        for r in [2, 4, 6, 8] {
            let cfg = BenchConfig {
                sigma: 4,
                n: 4_000_000,
                m: 32,
                generator,
                trials: 1,
                forced_r: Some(r),
                skip_naive: true,
                ..Default::default()
            };
            let rows = cmd_bench(&cfg, std::io::sink())?;
            let (packed, mp) = (&rows[0], &rows[1]);
            println!(
                "{generator:?} r = {r}: packed {:.1} ms, mp {:.1} ms, ratio {:.2}, {} matches",
                packed.seconds * 1e3,
                mp.seconds * 1e3,
                packed.ratio_vs_mp,
                packed.matches
            );
        }
    }
    Ok(())
}
