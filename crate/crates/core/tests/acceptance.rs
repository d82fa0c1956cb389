//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any gating criterion fails.

use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use packmatch::cli::{cmd_bench, BenchConfig, Engine, Generator};
use packmatch::{
    next_direct, Alphabet, CState, Code, Move, MpAutomaton, NextKey, NextResult, NextTable, PackedString,
    PreprocessOptions, PreprocessedPattern, SegmentAutomaton, SegmentDescription, SegmentEncoding, Window,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5eed_2024;
const PAIRS_PER_SIGMA: usize = 10_000;
const SIGMAS: [u32; 4] = [2, 4, 16, 256];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn naive(p: &[Code], t: &[Code]) -> Vec<usize> {
    let m = p.len();
    let mut out = Vec::new();
    if m <= t.len() {
        for end in m..=t.len() {
            if (0..m).all(|i| t[end - m + i] == p[i]) {
                out.push(end);
            }
        }
    }
    out
}

/// Textbook failure function, `f[s]` for `s` in `0..=m` with `f[0] = 0`.
fn failure(p: &[Code]) -> Vec<usize> {
    let mut f = vec![0; p.len() + 1];
    let mut k = 0;
    for s in 1..p.len() {
        while k > 0 && p[s] != p[k] {
            k = f[k];
        }
        if p[s] == p[k] {
            k += 1;
        }
        f[s + 1] = k;
    }
    f
}

fn pack(codes: &[Code], a: Alphabet) -> PackedString {
    PackedString::pack(codes, a).unwrap()
}

fn letters(s: &str) -> Vec<Code> {
    s.bytes().map(|b| Code::from(b - b'a')).collect()
}

// ---------------------------------------------------------------- 1

fn worked_example() -> Outcome {
    let clock = Instant::now();
    let abc = Alphabet::new(3).unwrap();
    let p = pack(&letters("ababca"), abc);
    let pp = PreprocessedPattern::with_options(
        &p,
        &PreprocessOptions {
            forced_r: Some(4),
            table: Some(Arc::new(NextTable::new(4, abc).unwrap())),
            ..Default::default()
        },
    )
    .unwrap();
    let sizes: Vec<usize> = pp.automaton().segments().iter().map(|s| s.size()).collect();
    let q = Window::from_codes(&letters("bac"), abc).unwrap();
    let next = pp
        .table()
        .lookup(&NextKey::new(&pp.records()[1], 1, &q).unwrap())
        .unwrap();
    let (out, trace) = pp.search_traced(&pack(&letters("abacacababca"), abc)).unwrap();
    let states: Vec<(usize, usize)> = trace.iter().map(|s| (s.state().segment, s.state().local)).collect();
    let want = [(0, 3), (0, 1), (0, 0), (0, 1), (0, 3), (2, 0), (2, 1), (2, 2), (2, 2)];
    let elapsed = clock.elapsed();
    outcome(
        sizes == [4, 4, 3]
            && next == NextResult::new(2, 1)
            && states == want
            && out.end_positions == [12]
            && elapsed < Duration::from_secs(1),
        format!(
            "sizes {sizes:?}, Next = ({}, {}), states {states:?}, occurrences {:?}, {:.3}s",
            next.consumed,
            next.end,
            out.end_positions,
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- 2, 4, 5, 7b

#[derive(Default)]
struct Suite {
    pairs: usize,
    mismatches: Vec<String>,
    counter_violations: Vec<String>,
    segments: usize,
    encoding_violations: Vec<String>,
    iteration_violations: Vec<String>,
    max_sum_d: (usize, usize),
    max_used_bd: (usize, usize),
    seconds: f64,
}

impl Suite {
    fn merge(&mut self, o: Suite) {
        self.pairs += o.pairs;
        self.mismatches.extend(o.mismatches);
        self.counter_violations.extend(o.counter_violations);
        self.segments += o.segments;
        self.encoding_violations.extend(o.encoding_violations);
        self.iteration_violations.extend(o.iteration_violations);
        self.max_sum_d = self.max_sum_d.max(o.max_sum_d);
        self.max_used_bd = self.max_used_bd.max(o.max_used_bd);
    }
}

fn generate(rng: &mut ChaCha8Rng, sigma: u32, i: usize) -> (Vec<Code>, Vec<Code>, usize, Generator) {
    let generator = [Generator::Random, Generator::Periodic, Generator::AllEqual][i % 3];
    let m = rng.gen_range(1..=64);
    let n = rng.gen_range(m..=4096);
    let (p, t) = generator.generate(rng, sigma, n, m);
    let bpc = Alphabet::new(sigma).unwrap().bits_per_char() as usize;
    let r_max = (m + 1).min(64 / bpc + 1);
    let r = 2 * rng.gen_range(1..=(r_max / 2).max(1));
    (p, t, r, generator)
}

fn run_sigma(sigma: u32) -> Suite {
    let alphabet = Alphabet::new(sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ u64::from(sigma));
    let mut s = Suite::default();
    for i in 0..PAIRS_PER_SIGMA {
        let (p, t, r, generator) = generate(&mut rng, sigma, i);
        let tag = || format!("sigma {sigma} pair {i} ({generator:?}, m {}, n {}, r {r})", p.len(), t.len());
        let (pp_, tp) = (pack(&p, alphabet), pack(&t, alphabet));
        let pp = PreprocessedPattern::with_options(
            &pp_,
            &PreprocessOptions {
                forced_r: Some(r),
                table: Some(Arc::new(NextTable::new(r, alphabet).unwrap())),
                ..Default::default()
            },
        )
        .unwrap();
        let out = pp.search(&tp).unwrap();
        let baseline = MpAutomaton::build(&pp_).unwrap().search_baseline(&tp);
        let expected = naive(&p, &t);
        s.pairs += 1;
        if out.end_positions != expected || baseline != expected {
            s.mismatches.push(tag());
        }

        let (hf, hfail, acc) = out.stats.heavy_and_accepting();
        let (n, rf, occ) = (t.len() as f64, r as f64, expected.len() as f64);
        if hfail > 2 * hf
            || hf as f64 > 4.0 * n / (rf - 1.0) + 1.0
            || (hf + hfail + acc) as f64 > 12.0 * n / rf + occ + 3.0
        {
            s.counter_violations.push(format!("{}: hf {hf}, hfail {hfail}, accept {acc}", tag()));
        }
        let iter_bound = n / (r.saturating_sub(2).max(1)) as f64 + 3.0 * hf as f64 + occ + 2.0;
        if out.iterations as f64 > iter_bound {
            s.iteration_violations.push(format!("{}: {} iterations > {iter_bound}", tag(), out.iterations));
        }

        let sa = pp.automaton();
        for (k, rec) in pp.records().iter().enumerate() {
            s.segments += 1;
            let desc = SegmentDescription::from_automaton(sa, k).unwrap();
            let sum_d: usize = desc.differences().iter().map(|d| d.unsigned_abs() as usize).sum();
            let used = rec.used_b_d_bits().unwrap();
            s.max_sum_d = s.max_sum_d.max((sum_d, r));
            s.max_used_bd = s.max_used_bd.max((used, r));
            let round_trip = rec.decode().ok() == Some(desc);
            if sum_d > 2 * r || used > 3 * r || !round_trip {
                s.encoding_violations
                    .push(format!("{} segment {k}: sum|d| {sum_d}, used {used}, round trip {round_trip}", tag()));
            }
        }
    }
    s
}

fn oracle_suite() -> Suite {
    let clock = Instant::now();
    let mut suite = Suite::default();
    let parts: Vec<Suite> = thread::scope(|scope| {
        let handles: Vec<_> = SIGMAS.iter().map(|&sigma| scope.spawn(move || run_sigma(sigma))).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for p in parts {
        suite.merge(p);
    }
    suite.seconds = clock.elapsed().as_secs_f64();
    suite
}

fn first(v: &[String]) -> String {
    v.first().map_or(String::new(), |s| format!("; first: {s}"))
}

// ---------------------------------------------------------------- 3

fn failure_growth() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x1e);
    let mut violations = Vec::new();
    let mut disagreements = 0;
    for i in 0..10_000 {
        let sigma = [2, 4, 26][i % 3];
        let m = rng.gen_range(1..=256);
        let p: Vec<Code> = (0..m).map(|_| rng.gen_range(0..sigma) as Code).collect();
        let mp = MpAutomaton::build(&pack(&p, Alphabet::new(sigma).unwrap())).unwrap();
        let f = failure(&p);
        if mp.fail_links() != &f[1..] {
            disagreements += 1;
        }
        if let Some(s) = (1..m).find(|&s| mp.fail(s + 1) > mp.fail(s) + 1) {
            violations.push(format!("pattern {i}: fail({}) > fail({s}) + 1", s + 1));
        }
    }
    outcome(
        violations.is_empty() && disagreements == 0,
        format!(
            "10000 patterns, {} violations, {disagreements} fail arrays differing from the independent oracle{}",
            violations.len(),
            first(&violations)
        ),
    )
}

// ---------------------------------------------------------------- 5 (exhaustive part)

fn binary_patterns(lo: usize, hi: usize) -> impl Iterator<Item = Vec<Code>> {
    (lo..=hi).flat_map(|m| (0u32..1 << m).map(move |x| (0..m).map(|i| ((x >> i) & 1) as Code).collect()))
}

fn automaton(p: &[Code], a: Alphabet, r: usize) -> SegmentAutomaton {
    SegmentAutomaton::build(MpAutomaton::build(&pack(p, a)).unwrap(), r).unwrap()
}

fn exhaustive_round_trip() -> (usize, Vec<String>) {
    let bin = Alphabet::new(2).unwrap();
    let mut count = 0;
    let mut bad = Vec::new();
    for p in binary_patterns(1, 10) {
        for r in [2, 4] {
            if r > p.len() + 1 {
                continue;
            }
            let sa = automaton(&p, bin, r);
            for k in 0..sa.segments().len() {
                let desc = SegmentDescription::from_automaton(&sa, k).unwrap();
                let enc = SegmentEncoding::encode(&sa, k).unwrap();
                let again = SegmentEncoding::from_bits(enc.bits().clone(), *enc.layout()).unwrap();
                count += 1;
                if again.decode().ok().as_ref() != Some(&desc) {
                    bad.push(format!("{p:?} r {r} segment {k}"));
                }
            }
        }
    }
    (count, bad)
}

// ---------------------------------------------------------------- 6

/// `Next` read straight off the segment automaton, one character at a time.
fn next_oracle(sa: &SegmentAutomaton, seg: usize, j: usize, q: &[Code]) -> NextResult {
    let mut at = CState::new(seg, j);
    for (consumed, &alpha) in q.iter().enumerate() {
        loop {
            match sa.next_move(at, alpha) {
                Move::RootSelfLoop => break,
                Move::Take(t) if t.kind.is_heavy() || t.accepting => {
                    return NextResult::new(consumed, at.local);
                }
                Move::Take(t) => {
                    at = t.target;
                    if t.kind.is_forward() {
                        break;
                    }
                }
            }
        }
    }
    NextResult::new(q.len(), at.local)
}

fn tabulation() -> Outcome {
    let clock = Instant::now();
    let bin = Alphabet::new(2).unwrap();
    let lazy = NextTable::new(4, bin).unwrap();
    let eager = NextTable::new(4, bin).unwrap();
    let mut checks = 0usize;
    let mut bad = Vec::new();
    for p in binary_patterns(3, 7) {
        let sa = automaton(&p, bin, 4);
        for k in 0..sa.segments().len() {
            let rec = SegmentEncoding::encode(&sa, k).unwrap();
            eager.fill_segment(&rec).unwrap();
            let desc = rec.decode().unwrap();
            for j in 0..desc.size {
                for len in 0..=3 {
                    for x in 0u32..1 << len {
                        let q: Vec<Code> = (0..len).map(|i| ((x >> i) & 1) as Code).collect();
                        let w = Window::from_codes(&q, bin).unwrap();
                        let got = lazy.lookup(&NextKey::new(&rec, j, &w).unwrap()).unwrap();
                        let direct = next_direct(&desc, j, &w, 1).unwrap();
                        let oracle = next_oracle(&sa, k, j, &q);
                        checks += 1;
                        if got != direct || got != oracle {
                            bad.push(format!(
                                "{p:?} segment {k} j {j} q {q:?}: table {got:?}, direct {direct:?}, oracle {oracle:?}"
                            ));
                        }
                    }
                }
            }
        }
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    lazy.write_cache(&mut a).unwrap();
    eager.write_cache(&mut b).unwrap();
    let elapsed = clock.elapsed();
    outcome(
        bad.is_empty() && a == b && elapsed < Duration::from_secs(60),
        format!(
            "{checks} (pattern, segment, j, q) checks, {} mismatches; lazy {} / eager {} entries, serialized tables {}; {:.2}s{}",
            bad.len(),
            lazy.len(),
            eager.len(),
            if a == b { "identical" } else { "differ" },
            elapsed.as_secs_f64(),
            first(&bad)
        ),
    )
}

// ---------------------------------------------------------------- 7c

fn benchmark(forced_r: Option<usize>) -> String {
    let cfg = BenchConfig {
        forced_r,
        sigma: 4,
        n: 10_000_000,
        m: 32,
        trials: 1,
        seed: SEED,
        t_budget: 1 << 22,
        skip_naive: true,
        ..Default::default()
    };
    let mut csv = Vec::new();
    let rows = cmd_bench(&cfg, &mut csv).unwrap();
    let packed = rows.iter().find(|r| r.engine == Engine::Packed).unwrap();
    let mp = rows.iter().find(|r| r.engine == Engine::MpBaseline).unwrap();
    print!("{}", String::from_utf8(csv).unwrap());
    format!(
        "{} r = {}: packed {:.4}s, mp_baseline {:.4}s, ratio {:.3} ({})",
        if forced_r.is_some() { "forced" } else { "budget 2^22 ->" },
        packed.r.unwrap(),
        packed.seconds,
        mp.seconds,
        packed.ratio_vs_mp,
        if packed.ratio_vs_mp <= 1.0 { "packed not slower" } else { "packed slower" }
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |id: &str, name: &str, o: Outcome| {
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {id} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    };

    report("1", "worked example", worked_example());

    let suite = oracle_suite();
    report(
        "2",
        "oracle equivalence",
        outcome(
            suite.mismatches.is_empty() && suite.pairs == SIGMAS.len() * PAIRS_PER_SIGMA && suite.seconds < 120.0,
            format!(
                "{} pairs over sigma {SIGMAS:?}, {} mismatches, {:.1}s{}",
                suite.pairs,
                suite.mismatches.len(),
                suite.seconds,
                first(&suite.mismatches)
            ),
        ),
    );
    report("3", "failure-function growth", failure_growth());
    report(
        "4",
        "heavy and accepting counters",
        outcome(
            suite.counter_violations.is_empty(),
            format!("{} runs, {} violations{}", suite.pairs, suite.counter_violations.len(), first(&suite.counter_violations)),
        ),
    );
    let (exhaustive, exhaustive_bad) = exhaustive_round_trip();
    report(
        "5",
        "encoding bounds",
        outcome(
            suite.encoding_violations.is_empty() && exhaustive_bad.is_empty(),
            format!(
                "{} segments from criterion 2 ({} violations, max sum|d| {} at r = {}, max B_D bits {} at r = {}); {exhaustive} exhaustive sigma = 2 round trips ({} failures){}{}",
                suite.segments,
                suite.encoding_violations.len(),
                suite.max_sum_d.0,
                suite.max_sum_d.1,
                suite.max_used_bd.0,
                suite.max_used_bd.1,
                exhaustive_bad.len(),
                first(&suite.encoding_violations),
                first(&exhaustive_bad)
            ),
        ),
    );
    report("6", "tabulation", tabulation());
    report(
        "7",
        "iteration bound",
        outcome(
            suite.iteration_violations.is_empty() && suite.counter_violations.is_empty(),
            format!(
                "{} runs, {} iteration-bound violations{}",
                suite.pairs,
                suite.iteration_violations.len(),
                first(&suite.iteration_violations)
            ),
        ),
    );
    println!("INFO criterion 7 benchmark (not gating): {}", benchmark(None));
    println!("INFO criterion 7 benchmark (not gating): {}", benchmark(Some(6)));

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
