use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::{
    cmd_bench, cmd_search, cmd_selftest, BenchConfig, ByteMapping, Generator, OutputFormat, PatternSource,
    PositionConvention, RunConfig, SelftestConfig, EXIT_ERROR, EXIT_MATCH,
};
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "packmatch", version, about = "Exact pattern search over packed strings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report every occurrence of a pattern in a file.
    Search(SearchArgs),
    /// Time the packed engine against the MP baseline and a naive scan; CSV on stdout.
    Bench(BenchArgs),
    /// Run the built-in consistency suites.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// PATTERN TEXT_FILE, or just TEXT_FILE with --pattern-file.
    #[arg(required = true, num_args = 1..=2, value_names = ["PATTERN", "TEXT_FILE"])]
    pub inputs: Vec<OsString>,
    /// Read the pattern from a file.
    #[arg(short = 'f', long, value_name = "PATH")]
    pub pattern_file: Option<PathBuf>,
    /// `byte`, `dna`, or a mapping file of `<char|0xHH> <code>` lines.
    #[arg(long, default_value = "byte")]
    pub alphabet: String,
    /// Keep newlines under the dna or custom alphabets.
    #[arg(long)]
    pub keep_newlines: bool,
    /// Table budget: 2^N entries.
    #[arg(long, default_value_t = 22, value_name = "N")]
    pub budget_log2: u32,
    /// Segment size; overrides the budget.
    #[arg(long = "r", value_name = "R")]
    pub r: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Print 0-based start offsets instead of 1-based end positions.
    #[arg(long)]
    pub start_offsets: bool,
    /// Check the result against a naive scan; mismatch is an error.
    #[arg(long)]
    pub verify: bool,
    /// Load lookup results from PATH if it exists and save them back after.
    #[arg(long, value_name = "PATH")]
    pub table_cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 4)]
    pub sigma: u32,
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 32)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = Generator::Random)]
    pub generator: Generator,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    #[arg(long, default_value_t = 22, value_name = "N")]
    pub budget_log2: u32,
    #[arg(long = "r", value_name = "R")]
    pub r: Option<usize>,
    /// Leave out the naive engine.
    #[arg(long)]
    pub skip_naive: bool,
    /// Write CSV here instead of stdout.
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Make the named suite fail.
    #[cfg(debug_assertions)]
    #[arg(long, value_name = "SUITE")]
    pub inject_fault: Option<String>,
}

/// Parses `args` (program name first), runs the command, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_MATCH };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("packmatch: error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    let stdout = io::stdout();
    match command {
        Command::Search(a) => {
            let mut inputs = a.inputs.into_iter();
            let (pattern, text) = match (a.pattern_file, inputs.next(), inputs.next()) {
                (Some(f), Some(text), None) => (PatternSource::File(f), text),
                (None, Some(p), Some(text)) => (PatternSource::Literal(p.into_encoded_bytes()), text),
                (Some(_), _, _) => {
                    return Err(Error::InvalidParameter("with --pattern-file give only TEXT_FILE".into()))
                }
                _ => return Err(Error::InvalidParameter("expected PATTERN TEXT_FILE".into())),
            };
            let cfg = RunConfig {
                mapping: ByteMapping::from_arg(&a.alphabet)?,
                strip_newlines: !a.keep_newlines,
                forced_r: a.r,
                format: a.format,
                positions: if a.start_offsets {
                    PositionConvention::Start0
                } else {
                    PositionConvention::End1
                },
                verify: a.verify,
                table_cache: a.table_cache,
                ..Default::default()
            }
            .with_budget_log2(a.budget_log2)?;
            let report = cmd_search(&pattern, &PathBuf::from(text), &cfg, BufWriter::new(stdout.lock()))?;
            Ok(report.exit_code())
        }
        Command::Bench(a) => {
            if a.budget_log2 > 63 {
                return Err(Error::InvalidParameter(format!("budget 2^{} does not fit in 64 bits", a.budget_log2)));
            }
            let cfg = BenchConfig {
                sigma: a.sigma,
                n: a.n,
                m: a.m,
                generator: a.generator,
                seed: a.seed,
                trials: a.trials,
                t_budget: 1 << a.budget_log2,
                forced_r: a.r,
                skip_naive: a.skip_naive,
            };
            match a.output {
                Some(path) => cmd_bench(&cfg, BufWriter::new(File::create(path)?))?,
                None => cmd_bench(&cfg, stdout.lock())?,
            };
            Ok(EXIT_MATCH)
        }
        Command::Selftest(a) => {
            let cfg = SelftestConfig {
                seed: a.seed,
                #[cfg(debug_assertions)]
                inject_fault: a.inject_fault,
                #[cfg(not(debug_assertions))]
                inject_fault: None,
            };
            let mut out = stdout.lock();
            let results = cmd_selftest(&cfg, &mut out)?;
            out.flush()?;
            Ok(if results.iter().all(|r| r.passed()) {
                EXIT_MATCH
            } else {
                EXIT_ERROR
            })
        }
    }
}
