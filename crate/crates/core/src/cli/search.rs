use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use super::{OutputFormat, RunConfig};
use crate::error::{Error, Result};
use crate::naive;
use crate::next::NextTable;
use crate::packed::PackedString;
use crate::search::{PreprocessOptions, PreprocessedPattern};

#[derive(Clone, Debug)]
pub enum PatternSource {
    Literal(Vec<u8>),
    File(PathBuf),
}

impl PatternSource {
    fn bytes(&self) -> Result<Vec<u8>> {
        match self {
            PatternSource::Literal(b) => Ok(b.clone()),
            PatternSource::File(p) => Ok(fs::read(p)?),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum PositionConvention {
    /// 1-based position of the last character.
    #[default]
    #[serde(rename = "end-1-based")]
    End1,
    /// 0-based position of the first character.
    #[serde(rename = "start-0-based")]
    Start0,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[allow(non_snake_case)]
pub struct ReportStats {
    pub N_hforward: u64,
    pub N_hfail: u64,
    pub N_accept: u64,
    pub iterations: u64,
    pub r: usize,
    pub sigma: u32,
    pub m: usize,
    pub n: usize,
}

/// Wall-clock seconds per phase.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Timings {
    pub pack: f64,
    pub preprocess: f64,
    pub search: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchReport {
    pub matches: Vec<usize>,
    pub positions: PositionConvention,
    pub stats: ReportStats,
    pub timings: Timings,
}

impl SearchReport {
    pub fn exit_code(&self) -> i32 {
        if self.matches.is_empty() {
            super::EXIT_NO_MATCH
        } else {
            super::EXIT_MATCH
        }
    }

    pub fn write<W: Write>(&self, format: OutputFormat, mut out: W) -> Result<()> {
        match format {
            OutputFormat::Text => {
                for p in &self.matches {
                    writeln!(out, "{p}")?;
                }
            }
            OutputFormat::Json => {
                serde_json::to_writer_pretty(&mut out, self)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

/// Reads the pattern and text, searches, and writes the report to `out`.
pub fn cmd_search<W: Write>(
    pattern: &PatternSource,
    text: &Path,
    cfg: &RunConfig,
    out: W,
) -> Result<SearchReport> {
    let p = pattern.bytes()?;
    let t = fs::read(text)?;
    let report = search_bytes(&p, &t, cfg)?;
    report.write(cfg.format, out)?;
    Ok(report)
}

/// Search over in-memory inputs; no output is written.
pub fn search_bytes(pattern: &[u8], text: &[u8], cfg: &RunConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let alphabet = cfg.mapping.alphabet();

    let clock = Instant::now();
    let p_codes = cfg.mapping.map(pattern, cfg.strips())?;
    if p_codes.is_empty() {
        return Err(Error::EmptyPattern);
    }
    let t_codes = cfg.mapping.map(text, cfg.strips())?;
    let p = PackedString::pack(&p_codes, alphabet)?;
    let t = PackedString::pack(&t_codes, alphabet)?;
    let pack = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let pp = PreprocessedPattern::with_options(
        &p,
        &PreprocessOptions {
            t_budget: cfg.t_budget,
            forced_r: cfg.forced_r,
            ..Default::default()
        },
    )?;
    if let Some(path) = cfg.table_cache.as_deref() {
        load_cache(path, pp.table())?;
    }
    let preprocess = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let outcome = pp.search(&t)?;
    let search = clock.elapsed().as_secs_f64();

    if cfg.verify {
        let expected = naive::find_all(&p_codes, &t_codes);
        if expected != outcome.end_positions {
            return Err(Error::Disagreement(format!(
                "packed search found {} occurrences, naive scan found {} (first difference at {:?})",
                outcome.end_positions.len(),
                expected.len(),
                first_difference(&outcome.end_positions, &expected)
            )));
        }
    }
    if let Some(path) = cfg.table_cache.as_deref() {
        save_cache(path, pp.table())?;
    }

    let m = p.len();
    let matches = match cfg.positions {
        super::PositionConvention::End1 => outcome.end_positions,
        super::PositionConvention::Start0 => outcome.end_positions.iter().map(|e| e - m).collect(),
    };
    Ok(SearchReport {
        matches,
        positions: cfg.positions,
        stats: ReportStats {
            N_hforward: outcome.stats.hforward,
            N_hfail: outcome.stats.hfail,
            N_accept: outcome.stats.accept,
            iterations: outcome.iterations,
            r: pp.r(),
            sigma: alphabet.sigma(),
            m,
            n: t.len(),
        },
        timings: Timings {
            pack,
            preprocess,
            search,
        },
    })
}

fn first_difference(a: &[usize], b: &[usize]) -> Option<usize> {
    a.iter()
        .zip(b)
        .find(|(x, y)| x != y)
        .map(|(x, y)| *x.min(y))
        .or_else(|| a.get(b.len()).or_else(|| b.get(a.len())).copied())
}

fn load_cache(path: &Path, table: &Arc<NextTable>) -> Result<()> {
    if !path.exists() {
        return Ok(());
    }
    let cached = NextTable::read_cache(BufReader::new(File::open(path)?))?;
    if cached.r() != table.r() || cached.alphabet() != table.alphabet() {
        return Err(Error::CacheFormat(format!(
            "{} holds a table for r = {}, sigma = {}; this search uses r = {}, sigma = {}",
            path.display(),
            cached.r(),
            cached.alphabet().sigma(),
            table.r(),
            table.alphabet().sigma()
        )));
    }
    log::info!("loaded {} cached entries from {}", cached.len(), path.display());
    table.absorb(&cached)
}

fn save_cache(path: &Path, table: &NextTable) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        table.write_cache(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    log::info!("wrote {} entries to {}", table.len(), path.display());
    Ok(())
}
