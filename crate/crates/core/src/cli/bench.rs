use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mp::MpAutomaton;
use crate::naive;
use crate::packed::{Alphabet, Code, PackedString};
use crate::search::{PreprocessOptions, PreprocessedPattern, DEFAULT_BUDGET};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// Uniform pattern and text.
    #[default]
    Random,
    /// A random period; the pattern and the text repeat it.
    Periodic,
    /// Pattern and text are one repeated character.
    AllEqual,
}

impl Generator {
    /// Draws `(pattern, text)` codes.
    pub fn generate(self, rng: &mut impl Rng, sigma: u32, n: usize, m: usize) -> (Vec<Code>, Vec<Code>) {
        let mut draw = |len: usize| -> Vec<Code> { (0..len).map(|_| rng.gen_range(0..sigma) as Code).collect() };
        match self {
            Generator::Random => {
                let p = draw(m);
                (p, draw(n))
            }
            Generator::Periodic => {
                let period_len = rng.gen_range(1..=m.max(1));
                let period = (0..period_len).map(|_| rng.gen_range(0..sigma) as Code).collect::<Vec<_>>();
                let repeat = |len: usize| period.iter().copied().cycle().take(len).collect::<Vec<_>>();
                (repeat(m), repeat(n))
            }
            Generator::AllEqual => {
                let c = rng.gen_range(0..sigma) as Code;
                (vec![c; m], vec![c; n])
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Packed,
    MpBaseline,
    Naive,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sigma: u32,
    pub n: usize,
    pub m: usize,
    pub generator: Generator,
    pub seed: u64,
    pub trials: usize,
    pub t_budget: u64,
    pub forced_r: Option<usize>,
    pub skip_naive: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sigma: 4,
            n: 1_000_000,
            m: 32,
            generator: Generator::Random,
            seed: 0,
            trials: 3,
            t_budget: DEFAULT_BUDGET,
            forced_r: None,
            skip_naive: false,
        }
    }
}

/// One CSV row. `r` and the heavy counters are empty for the baselines;
/// `ratio_vs_mp` is this engine's time over the MP baseline's time.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct BenchRow {
    pub engine: Engine,
    pub sigma: u32,
    pub n: usize,
    pub m: usize,
    pub r: Option<usize>,
    pub seconds: f64,
    pub matches: usize,
    pub N_hforward: Option<u64>,
    pub N_hfail: Option<u64>,
    pub trial: usize,
    pub seed: u64,
    pub ratio_vs_mp: f64,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let clock = Instant::now();
    let v = f();
    (v, clock.elapsed().as_secs_f64())
}

/// Runs every engine on `trials` generated instances and writes CSV to `out`.
/// Trial `t` uses the seed `seed + t`.
pub fn cmd_bench<W: Write>(cfg: &BenchConfig, out: W) -> Result<Vec<BenchRow>> {
    if cfg.m == 0 || cfg.n < cfg.m {
        return Err(Error::InvalidParameter(format!(
            "need n >= m >= 1, got n = {}, m = {}",
            cfg.n, cfg.m
        )));
    }
    let alphabet = Alphabet::new(cfg.sigma)?;
    let mut csv = csv::Writer::from_writer(out);
    let mut rows = Vec::new();
    for trial in 0..cfg.trials {
        let seed = cfg.seed.wrapping_add(trial as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p_codes, t_codes) = cfg.generator.generate(&mut rng, cfg.sigma, cfg.n, cfg.m);
        let p = PackedString::pack(&p_codes, alphabet)?;
        let t = PackedString::pack(&t_codes, alphabet)?;

        let pp = PreprocessedPattern::with_options(
            &p,
            &PreprocessOptions {
                t_budget: cfg.t_budget,
                forced_r: cfg.forced_r,
                ..Default::default()
            },
        )?;
        let (packed, packed_s) = timed(|| pp.search(&t));
        let packed = packed?;
        let mp = MpAutomaton::build(&p)?;
        let (baseline, mp_s) = timed(|| mp.search_baseline(&t));

        let disagree = |what: &str, a: usize, b: usize| {
            Error::Disagreement(format!(
                "{what}: {a} vs {b} occurrences (generator {:?}, sigma {}, n {}, m {}, seed {seed})",
                cfg.generator, cfg.sigma, cfg.n, cfg.m
            ))
        };
        if packed.end_positions != baseline {
            return Err(disagree("packed vs mp_baseline", packed.end_positions.len(), baseline.len()));
        }
        let mut trial_rows = vec![
            BenchRow {
                engine: Engine::Packed,
                sigma: cfg.sigma,
                n: cfg.n,
                m: cfg.m,
                r: Some(pp.r()),
                seconds: packed_s,
                matches: packed.end_positions.len(),
                N_hforward: Some(packed.stats.hforward),
                N_hfail: Some(packed.stats.hfail),
                trial,
                seed,
                ratio_vs_mp: packed_s / mp_s,
            },
            BenchRow {
                engine: Engine::MpBaseline,
                r: None,
                seconds: mp_s,
                matches: baseline.len(),
                N_hforward: None,
                N_hfail: None,
                ratio_vs_mp: 1.0,
                ..trial_rows_template(cfg, trial, seed)
            },
        ];
        if !cfg.skip_naive {
            let (scan, naive_s) = timed(|| naive::find_all(&p_codes, &t_codes));
            if scan != baseline {
                return Err(disagree("naive vs mp_baseline", scan.len(), baseline.len()));
            }
            trial_rows.push(BenchRow {
                engine: Engine::Naive,
                seconds: naive_s,
                matches: scan.len(),
                ratio_vs_mp: naive_s / mp_s,
                ..trial_rows_template(cfg, trial, seed)
            });
        }
        for row in &trial_rows {
            csv.serialize(row)?;
        }
        rows.extend(trial_rows);
    }
    csv.flush()?;
    Ok(rows)
}

fn trial_rows_template(cfg: &BenchConfig, trial: usize, seed: u64) -> BenchRow {
    BenchRow {
        engine: Engine::Naive,
        sigma: cfg.sigma,
        n: cfg.n,
        m: cfg.m,
        r: None,
        seconds: 0.0,
        matches: 0,
        N_hforward: None,
        N_hfail: None,
        trial,
        seed,
        ratio_vs_mp: 1.0,
    }
}
