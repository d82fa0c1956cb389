//! Command-line front end: file search, benchmark harness, and self-test.
//!
//! [`run`] parses arguments and returns the process exit code, so the binary
//! is a one-liner and tests can drive the whole CLI in-process.

mod args;
mod bench;
mod mapping;
mod search;
mod selftest;

pub use args::{run, Cli, Command};
pub use bench::{cmd_bench, BenchConfig, BenchRow, Engine, Generator};
pub use mapping::ByteMapping;
pub use search::{cmd_search, search_bytes, PatternSource, PositionConvention, ReportStats, SearchReport, Timings};
pub use selftest::{cmd_selftest, SelftestConfig, SuiteResult, SUITES};

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::search::DEFAULT_BUDGET;

/// Exit code for a run that found something (or passed).
pub const EXIT_MATCH: i32 = 0;
/// Exit code for a search with no occurrences.
pub const EXIT_NO_MATCH: i32 = 1;
/// Exit code for any error.
pub const EXIT_ERROR: i32 = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mapping: ByteMapping,
    /// Drop unmapped `\n` and `\r` from inputs (ignored for the byte alphabet).
    pub strip_newlines: bool,
    pub t_budget: u64,
    pub forced_r: Option<usize>,
    pub format: OutputFormat,
    pub positions: PositionConvention,
    /// Cross-check every result against the naive scan.
    pub verify: bool,
    pub table_cache: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mapping: ByteMapping::byte(),
            strip_newlines: true,
            t_budget: DEFAULT_BUDGET,
            forced_r: None,
            format: OutputFormat::Text,
            positions: PositionConvention::End1,
            verify: false,
            table_cache: None,
        }
    }
}

impl RunConfig {
    /// Sets `t_budget = 2^log2`.
    pub fn with_budget_log2(mut self, log2: u32) -> Result<Self> {
        if log2 > 63 {
            return Err(Error::InvalidParameter(format!("budget 2^{log2} does not fit in 64 bits")));
        }
        self.t_budget = 1 << log2;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.forced_r {
            if r < 2 || r % 2 != 0 {
                return Err(Error::InvalidParameter(format!("--r {r} must be even and >= 2")));
            }
        }
        Ok(())
    }

    fn strips(&self) -> bool {
        self.strip_newlines && self.mapping.name() != "byte"
    }
}
