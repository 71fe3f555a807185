//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use lcv_bandit::simulator::{run_batch, sweep, RegretSummary};
use lcv_bandit::stats::{critical_value, t_quantile, ucb_critical_value, TQuantileQuery};

use crate::config::{parse_config_str, LoadedConfig};
use crate::output::{csv_writer, format_significant, write_regret_csv, write_runs_csv, Manifest, OutputDir, SUMMARY_DIGITS};
use crate::presets::PRESETS;

/// Horizon of the critical-value ratio curve.
pub const RATIO_HORIZON: u64 = 20_000;
/// Largest horizon of the quantile-bound curve.
pub const QUANTILE_MAX_HORIZON: u64 = 20_000;
/// Slope of the logarithmic bound on the squared critical value.
pub const QUANTILE_BOUND_SLOPE: f64 = 3.726;

fn write_summary(dir: &mut OutputDir, prefix: &str, summary: &RegretSummary, per_run: bool) -> Result<()> {
    dir.write_with(&format!("{prefix}regret.csv"), |w| write_regret_csv(w, summary))?;
    if per_run {
        dir.write_with(&format!("{prefix}runs.csv"), |w| write_runs_csv(w, summary))?;
    }
    Ok(())
}

/// Subdirectory name for one sweep value, e.g. `epsilon_0.15`.
pub fn sweep_dir_name(parameter: &str, value: f64) -> String {
    format!("{parameter}_{value}")
}

fn run_into(dir: &mut OutputDir, prefix: &str, config: &LoadedConfig, workers: usize) -> Result<Vec<RegretSummary>> {
    let summary = run_batch(&config.experiment, workers).context("simulation failed")?;
    write_summary(dir, prefix, &summary, config.file.per_run_csv)?;
    Ok(vec![summary])
}

fn sweep_into(dir: &mut OutputDir, prefix: &str, config: &LoadedConfig, workers: usize) -> Result<Vec<RegretSummary>> {
    let section = config.file.sweep.as_ref().context("the configuration has no [sweep] section")?;
    let results = sweep(&config.experiment, section.parameter, &section.values, workers).context("simulation failed")?;
    let mut out = Vec::with_capacity(results.len());
    for (value, summary) in results {
        let sub = format!("{prefix}{}/", sweep_dir_name(section.parameter.name(), value));
        write_summary(dir, &sub, &summary, config.file.per_run_csv)?;
        out.push(summary);
    }
    Ok(out)
}

pub fn cmd_run(config: &LoadedConfig, out: &Path, workers: usize) -> Result<Manifest> {
    let mut dir = OutputDir::create(out)?;
    run_into(&mut dir, "", config, workers)?;
    dir.finish("run", config.file.seed, vec![config.file.clone()])
}

pub fn cmd_sweep(config: &LoadedConfig, out: &Path, workers: usize) -> Result<Manifest> {
    let mut dir = OutputDir::create(out)?;
    sweep_into(&mut dir, "", config, workers)?;
    dir.finish("sweep", config.file.seed, vec![config.file.clone()])
}

#[derive(Debug, Clone, Default)]
pub struct FiguresOptions {
    /// Overrides applied to every preset, e.g. `runs=10`.
    pub overrides: Vec<String>,
    pub skip_experiments: bool,
}

/// Geometric grid of integers in `[lo, hi]`, both ends included.
pub fn log_grid(lo: u64, hi: u64, points: usize) -> Vec<u64> {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut grid: Vec<u64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1).max(1) as f64).exp().round() as u64)
        .map(|v| v.clamp(lo, hi))
        .collect();
    grid.dedup();
    grid
}

/// `S,ratio`: critical value with `S - 1` dof over the one with `T - 1` dof at
/// `T = 20000`, α = 2.
pub fn write_fig1(w: &mut dyn std::io::Write) -> Result<()> {
    let t = RATIO_HORIZON;
    let full: f64 = critical_value(t, t as i64 - 1, 2.0)?;
    let mut grid = log_grid(2, t, 300);
    grid.extend([51, t]);
    grid.sort_unstable();
    grid.dedup();
    let mut csv = csv_writer(w);
    csv.write_record(["S", "ratio"])?;
    for s in grid {
        let ratio = critical_value(t, s as i64 - 1, 2.0)? / full;
        csv.write_record([s.to_string(), format_significant(ratio, SUMMARY_DIGITS)])?;
    }
    csv.flush()?;
    Ok(())
}

/// `T,critical_value_sq,bound,critical_value_sq_single_cv`: squared critical
/// value with `T - 1` dof, `3.726 ln T`, and the squared single-CV critical
/// value with `T - 3` dof (empty while undefined).
pub fn write_fig2(w: &mut dyn std::io::Write) -> Result<()> {
    let mut csv = csv_writer(w);
    csv.write_record(["T", "critical_value_sq", "bound", "critical_value_sq_single_cv"])?;
    for t in log_grid(2, QUANTILE_MAX_HORIZON, 300) {
        let v: f64 = critical_value(t, t as i64 - 1, 2.0)?;
        let single = if t >= 4 {
            let c: f64 = ucb_critical_value(t, t as usize, 1, 2.0)?;
            format_significant(c * c, SUMMARY_DIGITS)
        } else {
            String::new()
        };
        csv.write_record([
            t.to_string(),
            format_significant(v * v, SUMMARY_DIGITS),
            format_significant(QUANTILE_BOUND_SLOPE * (t as f64).ln(), SUMMARY_DIGITS),
            single,
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn cmd_figures(out: &Path, options: &FiguresOptions, workers: usize) -> Result<Manifest> {
    let mut dir = OutputDir::create(out)?;
    dir.write_with("fig1_ratio.csv", write_fig1)?;
    dir.write_with("fig2_quantile.csv", write_fig2)?;
    let mut configs = Vec::new();
    if !options.skip_experiments {
        for (name, text) in PRESETS {
            let config =
                parse_config_str(text, &options.overrides).with_context(|| format!("preset '{name}'"))?;
            let prefix = format!("{name}/");
            if config.file.sweep.is_some() {
                sweep_into(&mut dir, &prefix, &config, workers)?;
            } else {
                run_into(&mut dir, &prefix, &config, workers)?;
            }
            configs.push(config.file);
        }
    }
    let seed = configs.first().map_or(0, |c| c.seed);
    dir.finish("figures", seed, configs)
}

pub const TABLE_PERCENTILES: [f64; 8] = [0.5, 0.75, 0.9, 0.95, 0.975, 0.99, 0.995, 0.999];
pub const TABLE_DOFS: [u64; 12] = [1, 2, 3, 4, 5, 10, 20, 30, 60, 100, 1000, 100_000];

/// Text table of t quantiles: one row per dof, one column per percentile.
pub fn quantile_table() -> Result<String> {
    let mut s = String::new();
    write!(s, "{:>8}", "dof")?;
    for p in TABLE_PERCENTILES {
        write!(s, "{p:>10}")?;
    }
    s.push('\n');
    for dof in TABLE_DOFS {
        write!(s, "{dof:>8}")?;
        for p in TABLE_PERCENTILES {
            let x: f64 = t_quantile(TQuantileQuery::new(p, dof)?);
            write!(s, "{x:>10.3}")?;
        }
        s.push('\n');
    }
    Ok(s)
}
