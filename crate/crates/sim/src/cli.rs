//! `hsr-sim` subcommands.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hsr_handover::harness::{simulate_run, RunConfig};

use crate::config::load_run_config;
use crate::error::Result;
use crate::output::{emit_histogram, emit_records, emit_stats, emit_trace, format_real, RecordRow};
use crate::runner::{monte_carlo, sweep, sweep_configs, thread_pool, ConfigResult, EnvChoice};

pub const RECORDS_FILE: &str = "records.csv";
pub const STATS_FILE: &str = "stats.csv";
pub const HISTOGRAM_FILE: &str = "start_points.csv";
pub const TRACE_FILE: &str = "trace.csv";

#[derive(Debug, Parser)]
#[command(
    name = "hsr-sim",
    version,
    about = "LTE hard-handover simulator for high-speed trains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo of one configuration; writes records, stats and the
    /// start-point histogram.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        exec: ExecArgs,
        /// Speed in km/h.
        #[arg(long)]
        speed: Option<f64>,
        /// viaduct, cutting, urban, or mixed for the configured layout.
        #[arg(long, value_parser = parse_env)]
        env: Option<EnvChoice>,
        /// A3 offset H0 in dB.
        #[arg(long, allow_negative_numbers = true)]
        offset_db: Option<f64>,
    },
    /// Monte Carlo over every combination of environment, speed and offset.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        exec: ExecArgs,
        /// Comma-separated speeds in km/h.
        #[arg(long, value_delimiter = ',', required = true)]
        speeds: Vec<f64>,
        /// Comma-separated A3 offsets in dB.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        offsets: Vec<f64>,
        /// Comma-separated environments (viaduct, cutting, urban, mixed).
        #[arg(long, value_delimiter = ',', value_parser = parse_env, default_value = "mixed")]
        envs: Vec<EnvChoice>,
    },
    /// Per-tick SINR and throughput trace of a single run.
    Trace {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Run index; selects the random streams exactly as in `simulate`.
        #[arg(long, default_value_t = 0)]
        run: u64,
        #[arg(long)]
        speed: Option<f64>,
        #[arg(long, value_parser = parse_env)]
        env: Option<EnvChoice>,
        #[arg(long, allow_negative_numbers = true)]
        offset_db: Option<f64>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// JSON configuration file; defaults are used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Time-to-trigger in ms.
    #[arg(long)]
    pub ttt_ms: Option<u32>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ExecArgs {
    /// Monte Carlo runs per configuration.
    #[arg(long)]
    pub runs: Option<u32>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_env(s: &str) -> std::result::Result<EnvChoice, String> {
    EnvChoice::parse(s).ok_or_else(|| format!("unknown environment {s:?}"))
}

impl ScenarioArgs {
    fn base_config(&self, runs: Option<u32>) -> Result<RunConfig> {
        let mut cfg = load_run_config(self.config.as_deref())?;
        if let Some(ms) = self.ttt_ms {
            cfg.handover.ttt = f64::from(ms) / 1000.0;
        }
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(runs) = runs {
            cfg.runs = runs;
        }
        Ok(cfg)
    }
}

fn single_config(
    base: RunConfig,
    speed: Option<f64>,
    env: Option<EnvChoice>,
    offset_db: Option<f64>,
) -> Result<RunConfig> {
    let mut cfg = env.unwrap_or(EnvChoice::AsConfigured).apply(base);
    if let Some(kmh) = speed {
        cfg = cfg.with_speed_kmh(kmh);
    }
    if let Some(h0) = offset_db {
        cfg = cfg.with_offset_db(h0);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_results(out: &Path, results: &[ConfigResult]) -> Result<()> {
    let rows: Vec<RecordRow> = results.iter().flat_map(ConfigResult::record_rows).collect();
    emit_records(&out.join(RECORDS_FILE), &rows)?;
    let stats: Vec<_> = results.iter().map(|r| r.stats.clone()).collect();
    emit_stats(&out.join(STATS_FILE), &stats)?;
    let with_interval: Vec<_> = results
        .iter()
        .map(|r| (r.stats.clone(), r.config.kinematics.snapshot_interval))
        .collect();
    emit_histogram(&out.join(HISTOGRAM_FILE), &with_interval)
}

fn summarize(result: &ConfigResult) -> String {
    let s = &result.stats;
    let opt = |x: Option<f64>| x.map(format_real).unwrap_or_else(|| "-".into());
    format!(
        "{} {} km/h H0={} dB: {} runs, {}/{} successful, start point {} m, delay {} ms",
        s.label.environment,
        format_real(s.label.speed_kmh),
        format_real(s.label.offset_db),
        s.runs,
        s.successes,
        s.attempts,
        opt(s.weighted_start_point),
        opt(s.mean_delay.map(|d| d * 1000.0)),
    )
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate {
            scenario,
            exec,
            speed,
            env,
            offset_db,
        } => {
            let cfg = single_config(scenario.base_config(exec.runs)?, *speed, *env, *offset_db)?;
            let pool = thread_pool(exec.threads)?;
            let result = monte_carlo(&cfg, &pool)?;
            write_results(&scenario.out, std::slice::from_ref(&result))?;
            println!("{}", summarize(&result));
        }
        Command::Sweep {
            scenario,
            exec,
            speeds,
            offsets,
            envs,
        } => {
            let template = scenario.base_config(exec.runs)?;
            let configs = sweep_configs(&template, envs, speeds, offsets)?;
            let pool = thread_pool(exec.threads)?;
            let results = sweep(&configs, &pool)?;
            write_results(&scenario.out, &results)?;
            for r in &results {
                println!("{}", summarize(r));
            }
        }
        Command::Trace {
            scenario,
            run,
            speed,
            env,
            offset_db,
        } => {
            let cfg = single_config(scenario.base_config(None)?, *speed, *env, *offset_db)?;
            let output = simulate_run(&cfg, *run)?;
            emit_trace(&scenario.out.join(TRACE_FILE), &output.trace, &cfg)?;
            let label = cfg.label();
            let rows: Vec<RecordRow> = output
                .records
                .iter()
                .map(|r| RecordRow::new(r, &label))
                .collect();
            emit_records(&scenario.out.join(RECORDS_FILE), &rows)?;
            println!(
                "run {run}: {} ticks, {} handover records",
                output.trace.len(),
                output.records.len()
            );
        }
    }
    Ok(())
}
