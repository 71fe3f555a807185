//! CSV writers, checksummed output directories and the run manifest.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use lcv_bandit::simulator::RegretSummary;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ConfigFile;

/// Significant digits in summary files.
pub const SUMMARY_DIGITS: usize = 6;
/// Significant digits in per-run files; enough to round-trip any f64.
pub const EXACT_DIGITS: usize = 17;

pub const MANIFEST_NAME: &str = "manifest.json";

/// Formats `x` with `digits` significant digits, shortest form, `.` as the
/// decimal point; scientific notation outside `[1e-5, 10^digits)`.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_owned()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub base_seed: u64,
    /// Fully resolved configurations, one per experiment.
    pub configs: Vec<ConfigFile>,
    /// SHA-256 of each configuration's resolved TOML, in the same order.
    pub config_sha256: Vec<String>,
    pub files: Vec<FileRecord>,
    pub duration_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
    bytes: u64,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        self.bytes += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Output directory that checksums every file written through it.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileRecord>,
    started: Instant,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("cannot create output directory {}", root.display()))?;
        Ok(Self { root: root.to_owned(), files: Vec::new(), started: Instant::now() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `relative` through `fill` and records its checksum.
    pub fn write_with<F>(&mut self, relative: &str, fill: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        let path = self.root.join(relative);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
        }
        let file = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        let mut w = HashingWriter { inner: BufWriter::new(file), hasher: Sha256::new(), bytes: 0 };
        fill(&mut w).with_context(|| format!("while writing {}", path.display()))?;
        w.flush().with_context(|| format!("cannot flush {}", path.display()))?;
        self.files.push(FileRecord { path: relative.to_owned(), sha256: hex::encode(w.hasher.finalize()), bytes: w.bytes });
        Ok(())
    }

    /// Writes the manifest listing every file written so far.
    pub fn finish(self, command: &str, base_seed: u64, configs: Vec<ConfigFile>) -> Result<Manifest> {
        let config_sha256 = configs
            .iter()
            .map(|c| sha256_hex(toml::to_string(c).expect("resolved configs always serialize").as_bytes()))
            .collect();
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            base_seed,
            configs,
            config_sha256,
            files: self.files,
            duration_seconds: self.started.elapsed().as_secs_f64(),
        };
        let path = self.root.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(manifest)
    }
}

pub fn csv_writer(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// `policy,round,mean_regret,ci_low,ci_high`, one row per policy and recorded round.
pub fn write_regret_csv(w: &mut dyn Write, summary: &RegretSummary) -> Result<()> {
    let mut csv = csv_writer(w);
    csv.write_record(["policy", "round", "mean_regret", "ci_low", "ci_high"])?;
    for p in &summary.policies {
        for (round, band) in summary.rounds.iter().zip(&p.bands) {
            csv.write_record([
                p.name.clone(),
                round.to_string(),
                format_significant(band.mean, SUMMARY_DIGITS),
                format_significant(band.low, SUMMARY_DIGITS),
                format_significant(band.high, SUMMARY_DIGITS),
            ])?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// `policy,run,round,cum_regret`, one row per policy, run and recorded round.
pub fn write_runs_csv(w: &mut dyn Write, summary: &RegretSummary) -> Result<()> {
    let mut csv = csv_writer(w);
    csv.write_record(["policy", "run", "round", "cum_regret"])?;
    for p in &summary.policies {
        for (run, trajectory) in p.runs.iter().enumerate() {
            for (round, value) in summary.rounds.iter().zip(&trajectory.cumulative_pseudo_regret) {
                csv.write_record([
                    p.name.clone(),
                    run.to_string(),
                    round.to_string(),
                    format_significant(*value, EXACT_DIGITS),
                ])?;
            }
        }
    }
    csv.flush()?;
    Ok(())
}
