use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Generator;
use crate::encoding::{SegmentDescription, SegmentEncoding};
use crate::error::Result;
use crate::mp::MpAutomaton;
use crate::naive;
use crate::next::{next_direct, NextTable};
use crate::packed::{Alphabet, Code, PackedString, Window};
use crate::search::{PreprocessOptions, PreprocessedPattern, TraceStep};
use crate::segment::SegmentAutomaton;

/// Suite names in run order.
pub const SUITES: &[&str] = &[
    "worked-example",
    "encoding-round-trip",
    "next-tabulation",
    "failure-growth",
    "heavy-counters",
    "search-equivalence",
];

#[derive(Clone, Debug, Default)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Name of a suite to sabotage. Honored only in debug builds.
    pub inject_fault: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: u64,
    pub failure: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

type Check = std::result::Result<u64, String>;

/// Runs every suite, printing one line per suite (plus the worked-example
/// trace). Returns the results; the caller decides the exit code.
pub fn cmd_selftest<W: Write>(cfg: &SelftestConfig, mut out: W) -> Result<Vec<SuiteResult>> {
    if let Some(name) = cfg.inject_fault.as_deref() {
        if !SUITES.contains(&name) {
            return Err(crate::error::Error::InvalidParameter(format!(
                "unknown suite {name:?}; expected one of {}",
                SUITES.join(", ")
            )));
        }
    }
    let faulty = |name: &str| cfg!(debug_assertions) && cfg.inject_fault.as_deref() == Some(name);
    let mut results = Vec::new();
    for &name in SUITES {
        let fault = faulty(name);
        let clock = Instant::now();
        let check = match name {
            "worked-example" => worked_example(fault, &mut out)?,
            "encoding-round-trip" => encoding_round_trip(fault),
            "next-tabulation" => next_tabulation(fault),
            "failure-growth" => failure_growth(cfg.seed, fault),
            "heavy-counters" => heavy_counters(cfg.seed, fault),
            "search-equivalence" => search_equivalence(cfg.seed, fault),
            _ => unreachable!(),
        };
        let res = match check {
            Ok(checks) => SuiteResult {
                name,
                checks,
                failure: None,
            },
            Err(msg) => SuiteResult {
                name,
                checks: 0,
                failure: Some(msg),
            },
        };
        match &res.failure {
            None => writeln!(
                out,
                "PASS {name} ({} checks, {:.2}s)",
                res.checks,
                clock.elapsed().as_secs_f64()
            )?,
            Some(msg) => writeln!(out, "FAIL {name}: {msg}")?,
        }
        results.push(res);
    }
    Ok(results)
}

fn letters(s: &str) -> Vec<Code> {
    s.bytes().map(|b| Code::from(b - b'a')).collect()
}

fn worked_example<W: Write>(fault: bool, out: &mut W) -> Result<Check> {
    let abc = Alphabet::new(3)?;
    let p = PackedString::pack(&letters("ababca"), abc)?;
    let q = PackedString::pack(&letters("abacacababca"), abc)?;
    let pp = PreprocessedPattern::with_options(
        &p,
        &PreprocessOptions {
            forced_r: Some(4),
            table: Some(Arc::new(NextTable::new(4, abc)?)),
            ..Default::default()
        },
    )?;
    let (outcome, trace) = pp.search_traced(&q)?;
    writeln!(out, "worked example: P = ababca, Q = abacacababca, r = 4")?;
    for step in &trace {
        let s = step.state();
        match step {
            TraceStep::Light { consumed, .. } => writeln!(out, "  lookup  +{consumed} -> ({}, {})", s.segment, s.local)?,
            TraceStep::Single { kind, accepting, .. } => {
                let kind = kind.map_or("root self-loop".to_string(), |k| format!("{k:?}"));
                let acc = if *accepting { " accept" } else { "" };
                writeln!(out, "  single  {kind}{acc} -> ({}, {})", s.segment, s.local)?
            }
        }
    }
    writeln!(out, "  occurrences: {:?}", outcome.end_positions)?;

    let mut expected = vec![(0, 3), (0, 1), (0, 0), (0, 1), (0, 3), (2, 0), (2, 1), (2, 2), (2, 2)];
    if fault {
        expected[0] = (1, 0);
    }
    let got: Vec<_> = trace.iter().map(|s| (s.state().segment, s.state().local)).collect();
    let sizes: Vec<_> = pp.automaton().segments().iter().map(|s| s.size()).collect();
    Ok(if got != expected {
        Err(format!("state sequence {got:?}, expected {expected:?}"))
    } else if sizes != [4, 4, 3] {
        Err(format!("segment sizes {sizes:?}"))
    } else if outcome.end_positions != [12] {
        Err(format!("occurrences {:?}", outcome.end_positions))
    } else {
        Ok(got.len() as u64 + 2)
    })
}

/// Every binary pattern with `lo <= m <= hi`.
fn binary_patterns(lo: usize, hi: usize) -> impl Iterator<Item = Vec<Code>> {
    (lo..=hi).flat_map(|m| (0u32..1 << m).map(move |x| (0..m).map(|i| ((x >> i) & 1) as Code).collect()))
}

fn automaton(codes: &[Code], alphabet: Alphabet, r: usize) -> Result<SegmentAutomaton, String> {
    let p = PackedString::pack(codes, alphabet).map_err(|e| e.to_string())?;
    let mp = MpAutomaton::build(&p).map_err(|e| e.to_string())?;
    SegmentAutomaton::build(mp, r).map_err(|e| e.to_string())
}

fn encoding_round_trip(fault: bool) -> Check {
    let bin = Alphabet::new(2).expect("sigma 2");
    let mut checks = 0;
    for codes in binary_patterns(1, 10) {
        for r in [2, 4] {
            if r > codes.len() + 1 {
                continue;
            }
            let sa = automaton(&codes, bin, r)?;
            for i in 0..sa.segments().len() {
                let desc = SegmentDescription::from_automaton(&sa, i).map_err(|e| e.to_string())?;
                let mut enc = SegmentEncoding::encode(&sa, i).map_err(|e| e.to_string())?;
                if fault {
                    let mut bits = enc.bits().clone();
                    bits.set_bit(0, !bits.bit(0));
                    enc = SegmentEncoding::from_bits(bits, *enc.layout()).map_err(|e| e.to_string())?;
                }
                let back = enc.decode().map_err(|e| format!("{codes:?} r={r} segment {i}: {e}"))?;
                if back != desc {
                    return Err(format!("{codes:?} r={r} segment {i}: decode(encode) differs"));
                }
                checks += 1;
            }
        }
    }
    Ok(checks)
}

fn next_tabulation(fault: bool) -> Check {
    let bin = Alphabet::new(2).expect("sigma 2");
    let table = NextTable::new(4, bin).map_err(|e| e.to_string())?;
    let mut checks = 0;
    for codes in binary_patterns(3, 7) {
        let sa = automaton(&codes, bin, 4)?;
        for i in 0..sa.segments().len() {
            let rec = SegmentEncoding::encode(&sa, i).map_err(|e| e.to_string())?;
            let desc = rec.decode().map_err(|e| e.to_string())?;
            for j in 0..desc.size {
                for len in 0..=3 {
                    for x in 0u32..1 << len {
                        let q: Vec<Code> = (0..len).map(|k| ((x >> k) & 1) as Code).collect();
                        let q = Window::from_codes(&q, bin).map_err(|e| e.to_string())?;
                        let got = table.query(&rec, j, &q).map_err(|e| e.to_string())?;
                        let jj = if fault { (j + 1) % desc.size } else { j };
                        let want = next_direct(&desc, jj, &q, 1).map_err(|e| e.to_string())?;
                        if got != want {
                            return Err(format!(
                                "{codes:?} segment {i} j={j} q={:?}: table {got:?}, direct {want:?}",
                                q.codes(1)
                            ));
                        }
                        checks += 1;
                    }
                }
            }
        }
    }
    Ok(checks)
}

fn failure_growth(seed: u64, fault: bool) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slack = if fault { 0 } else { 1 };
    for t in 0..2000 {
        let sigma = [2, 4, 26][t % 3];
        let m = rng.gen_range(1..=256);
        let (p, _) = Generator::Random.generate(&mut rng, sigma, m, m);
        let mp = MpAutomaton::build(&PackedString::pack(&p, Alphabet::new(sigma).expect("sigma")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let f = mp.fail_links();
        if let Some(s) = (1..m).find(|&s| f[s] > f[s - 1] + slack) {
            return Err(format!("fail({}) = {} > fail({s}) + 1 for {p:?}", s + 1, f[s]));
        }
    }
    Ok(2000)
}

/// Draws a random instance and an even `r` that the pattern admits.
fn random_instance(rng: &mut ChaCha8Rng, sigma: u32, max_m: usize, max_n: usize) -> (Vec<Code>, Vec<Code>, usize) {
    let generator = [Generator::Random, Generator::Periodic, Generator::AllEqual][rng.gen_range(0..3)];
    let m = rng.gen_range(1..=max_m);
    let n = rng.gen_range(m..=max_n);
    let (p, t) = generator.generate(rng, sigma, n, m);
    let bpc = Alphabet::new(sigma).expect("sigma").bits_per_char() as usize;
    let cap = (m + 1).min(64 / bpc + 1).min(16) / 2;
    let r = 2 * rng.gen_range(1..=cap.max(1));
    (p, t, r)
}

fn run_instance(p: &[Code], t: &[Code], sigma: u32, r: usize) -> Result<(PreprocessedPattern, crate::search::SearchOutcome), String> {
    let a = Alphabet::new(sigma).map_err(|e| e.to_string())?;
    let pp = PreprocessedPattern::with_options(
        &PackedString::pack(p, a).map_err(|e| e.to_string())?,
        &PreprocessOptions {
            forced_r: Some(r),
            table: Some(Arc::new(NextTable::new(r, a).map_err(|e| e.to_string())?)),
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let out = pp.search(&PackedString::pack(t, a).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    Ok((pp, out))
}

fn heavy_counters(seed: u64, fault: bool) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1e77a2);
    for i in 0..600 {
        let sigma = [2, 4][i % 2];
        let (p, t, r) = random_instance(&mut rng, sigma, 24, 512);
        let (_, out) = run_instance(&p, &t, sigma, r)?;
        let (hf, hfail, acc) = out.stats.heavy_and_accepting();
        let (n, rr, occ) = (t.len() as f64, r as f64, out.end_positions.len() as f64);
        let scale = if fault { 0.0 } else { 1.0 };
        let bad = if hfail > 2 * hf {
            Some("N_hfail > 2 N_hforward")
        } else if hf as f64 > scale * 4.0 * n / (rr - 1.0) + 1.0 {
            Some("N_hforward > 4n/(r-1) + 1")
        } else if (hf + hfail + acc) as f64 > scale * 12.0 * n / rr + occ + 3.0 {
            Some("N_hforward + N_hfail + N_accept > 12n/r + occ + 3")
        } else {
            None
        };
        if let Some(what) = bad {
            return Err(format!("{what}: sigma {sigma}, r {r}, P {p:?}, n {}", t.len()));
        }
    }
    Ok(600)
}

fn search_equivalence(seed: u64, fault: bool) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ea7c4);
    for i in 0..400 {
        let sigma = [2, 4, 16, 256][i % 4];
        let (p, t, r) = random_instance(&mut rng, sigma, 32, 1024);
        let (pp, out) = run_instance(&p, &t, sigma, r)?;
        let baseline = pp.automaton().mp().search_baseline(&PackedString::pack(&t, Alphabet::new(sigma).expect("sigma")).map_err(|e| e.to_string())?);
        let mut scan = naive::find_all(&p, &t);
        if fault {
            scan.push(t.len() + 1);
        }
        if out.end_positions != scan || baseline != scan {
            return Err(format!(
                "sigma {sigma}, r {r}, m {}, n {}: packed {}, mp {}, naive {} occurrences",
                p.len(),
                t.len(),
                out.end_positions.len(),
                baseline.len(),
                scan.len()
            ));
        }
    }
    Ok(400)
}
