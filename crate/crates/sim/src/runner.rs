//! Parallel Monte Carlo on a rayon pool.
//!
//! Runs are independent given `(master_seed, run_index)`, so they are
//! farmed out to workers and the results collected back in run order; the
//! aggregate is then the same ordered fold as the sequential harness, which
//! makes every output byte independent of the thread count.

use hsr_handover::geometry::EnvironmentId;
use hsr_handover::handover::HandoverRecord;
use hsr_handover::harness::{aggregate, simulate_records, RunConfig, SweepStatistics};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{Result, SimError};
use crate::output::RecordRow;

/// Pool with `threads` workers, or rayon's default when `None`.
pub fn thread_pool(threads: Option<usize>) -> Result<ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(SimError::config("--threads must be >= 1"));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| SimError::config(format!("cannot start thread pool: {e}")))
}

/// Statistics and per-run records of one configuration.
#[derive(Debug, Clone)]
pub struct ConfigResult {
    pub config: RunConfig,
    pub stats: SweepStatistics,
    /// Records of each run, indexed by run.
    pub runs: Vec<Vec<HandoverRecord>>,
}

impl ConfigResult {
    pub fn record_rows(&self) -> Vec<RecordRow> {
        let label = self.config.label();
        self.runs
            .iter()
            .flatten()
            .map(|r| RecordRow::new(r, &label))
            .collect()
    }
}

pub fn monte_carlo(cfg: &RunConfig, pool: &ThreadPool) -> Result<ConfigResult> {
    cfg.validate()?;
    let runs: Vec<Vec<HandoverRecord>> = pool.install(|| {
        (0..cfg.runs as u64)
            .into_par_iter()
            .map(|i| simulate_records(cfg, i))
            .collect::<hsr_handover::Result<_>>()
    })?;
    let stats = aggregate(cfg, runs.iter().map(Vec::as_slice));
    Ok(ConfigResult {
        config: cfg.clone(),
        stats,
        runs,
    })
}

/// Environment selector of the CLI: one uniform environment or the layout
/// exactly as configured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvChoice {
    Uniform(EnvironmentId),
    AsConfigured,
}

impl EnvChoice {
    pub fn parse(s: &str) -> Option<Self> {
        if s == "mixed" {
            Some(EnvChoice::AsConfigured)
        } else {
            EnvironmentId::parse(s).map(EnvChoice::Uniform)
        }
    }

    pub fn apply(self, cfg: RunConfig) -> RunConfig {
        match self {
            EnvChoice::Uniform(env) => cfg.with_environment(Some(env)),
            EnvChoice::AsConfigured => cfg,
        }
    }
}

/// Cartesian sweep, environment-major then speed then offset.
pub fn sweep_configs(
    template: &RunConfig,
    envs: &[EnvChoice],
    speeds_kmh: &[f64],
    offsets_db: &[f64],
) -> Result<Vec<RunConfig>> {
    if envs.is_empty() || speeds_kmh.is_empty() || offsets_db.is_empty() {
        return Err(SimError::config(
            "sweep needs at least one environment, speed and offset",
        ));
    }
    let mut out = Vec::with_capacity(envs.len() * speeds_kmh.len() * offsets_db.len());
    for &env in envs {
        for &speed in speeds_kmh {
            for &offset in offsets_db {
                let cfg = env
                    .apply(template.clone())
                    .with_speed_kmh(speed)
                    .with_offset_db(offset);
                cfg.validate()?;
                out.push(cfg);
            }
        }
    }
    Ok(out)
}

pub fn sweep(configs: &[RunConfig], pool: &ThreadPool) -> Result<Vec<ConfigResult>> {
    configs.iter().map(|cfg| monte_carlo(cfg, pool)).collect()
}
