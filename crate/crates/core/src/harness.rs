//! End-to-end runs and Monte Carlo aggregation.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::channel::{
    mean_rx_power_dbm, AntennaPattern, EnvironmentProfile, FadingState, LinkBudget,
};
use crate::doppler::{
    doppler_spread_hz, effective_sinr_linear, ici_power_upper, rss_with_ici, snr_db_from_rx_power,
    IciParams, SignalQuality,
};
use crate::error::{Error, Result};
use crate::geometry::{
    kmh_to_mps, mps_to_kmh, sample_stride, DeploymentLayout, EnvironmentId, TrainKinematics,
};
use crate::handover::{
    handover_interruption_window, strongest_cell, CellId, HandoverConfig, HandoverFsm,
    HandoverRecord, Outcome, Tick, TickInput,
};
use crate::math::linear_to_db;
use crate::measurement::{L1Config, L1Filter, L3Config, L3Filter};
use crate::rng::link_rng;

pub const DEFAULT_RUNS: u32 = 500;
pub const DEFAULT_SEED: u64 = 0x5eed_2019;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profiles {
    pub viaduct: EnvironmentProfile,
    pub cutting: EnvironmentProfile,
    pub urban: EnvironmentProfile,
}

impl Default for Profiles {
    fn default() -> Self {
        Self {
            viaduct: EnvironmentProfile::viaduct(),
            cutting: EnvironmentProfile::cutting(),
            urban: EnvironmentProfile::urban(),
        }
    }
}

impl Profiles {
    pub fn get(&self, env: EnvironmentId) -> &EnvironmentProfile {
        match env {
            EnvironmentId::Viaduct => &self.viaduct,
            EnvironmentId::Cutting => &self.cutting,
            EnvironmentId::Urban => &self.urban,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub layout: DeploymentLayout,
    pub kinematics: TrainKinematics,
    pub profiles: Profiles,
    pub budget: LinkBudget,
    pub antenna: AntennaPattern,
    pub ici: IciParams,
    pub l1: L1Config,
    pub l3: L3Config,
    pub handover: HandoverConfig,
    pub runs: u32,
    pub master_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            layout: DeploymentLayout::default(),
            kinematics: TrainKinematics::default(),
            profiles: Profiles::default(),
            budget: LinkBudget::default(),
            antenna: AntennaPattern::default(),
            ici: IciParams::default(),
            l1: L1Config::default(),
            l3: L3Config::default(),
            handover: HandoverConfig::default(),
            runs: DEFAULT_RUNS,
            master_seed: DEFAULT_SEED,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        self.kinematics.validate()?;
        if self.kinematics.start_position > self.layout.track_length {
            return Err(Error::config("start_position beyond track end"));
        }
        for env in EnvironmentId::ALL {
            let profile = self.profiles.get(env);
            if profile.id != env {
                return Err(Error::config("profile id does not match its slot"));
            }
            profile.validate()?;
        }
        let b = &self.budget;
        if ![
            b.rrh_tx_power_dbm,
            b.ue_tx_power_dbm,
            b.penetration_loss_db,
            b.noise_power_dbm,
        ]
        .iter()
        .all(|v| v.is_finite())
        {
            return Err(Error::config("link budget values must be finite"));
        }
        if !(self.antenna.beamwidth_3db > 0.0) || !(self.antenna.side_floor_db >= 0.0) {
            return Err(Error::config(
                "antenna beamwidth must be > 0 and floor >= 0",
            ));
        }
        self.ici.validate()?;
        self.l1.validate()?;
        self.l3.validate()?;
        self.handover.validate(self.l1.sample_period)?;
        if self.runs < 1 {
            return Err(Error::config("runs must be >= 1"));
        }
        Ok(())
    }

    pub fn with_speed_kmh(mut self, kmh: f64) -> Self {
        self.kinematics.speed = kmh_to_mps(kmh);
        self
    }

    pub fn with_offset_db(mut self, h0: f64) -> Self {
        self.handover.hysteresis_h0 = h0;
        self
    }

    pub fn with_environment(mut self, env: Option<EnvironmentId>) -> Self {
        if let Some(env) = env {
            self.layout = self.layout.with_uniform_environment(env);
        }
        self
    }

    pub fn stride(&self) -> usize {
        sample_stride(&self.kinematics, self.l1.sample_period)
    }

    /// Distance travelled per sample tick on the snapshot grid.
    pub fn tick_step_m(&self) -> f64 {
        self.stride() as f64 * self.kinematics.snapshot_interval
    }

    pub fn tick_count(&self) -> usize {
        let span = self.layout.track_length - self.kinematics.start_position;
        libm::floor(span / self.tick_step_m() + 1e-9) as usize + 1
    }

    pub fn position_of_tick(&self, tick: Tick) -> f64 {
        self.kinematics.start_position + tick as f64 * self.tick_step_m()
    }

    pub fn ici_power(&self) -> f64 {
        let fd = doppler_spread_hz(self.kinematics.speed, self.ici.carrier_frequency);
        ici_power_upper(fd, &self.ici)
    }

    pub fn label(&self) -> ScenarioLabel {
        ScenarioLabel {
            speed_kmh: libm::round(mps_to_kmh(self.kinematics.speed) * 1e6) / 1e6,
            environment: environment_label(&self.layout),
            offset_db: self.handover.hysteresis_h0,
        }
    }
}

/// `"viaduct"`, `"cutting"` or `"urban"` for single-environment layouts,
/// `"mixed"` otherwise.
pub fn environment_label(layout: &DeploymentLayout) -> &'static str {
    let mut envs = layout.segments.iter().map(|s| s.environment);
    match envs.next() {
        Some(first) if envs.all(|e| e == first) => first.as_str(),
        _ => "mixed",
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioLabel {
    pub speed_kmh: f64,
    pub environment: &'static str,
    pub offset_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellTick {
    /// Downlink quality after ICI degradation.
    pub downlink: SignalQuality,
    /// Downlink SNR without ICI.
    pub snr_no_ici_db: f64,
    pub uplink_sinr_db: f64,
    pub l1_db: f64,
    pub l3_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickSample {
    pub tick: Tick,
    pub position: f64,
    pub environment: EnvironmentId,
    pub serving: Option<CellId>,
    pub interrupted: bool,
    /// Proxy throughput of the serving link; zero while interrupted.
    pub throughput_bps: f64,
    pub cells: Vec<CellTick>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutput {
    pub trace: Vec<TickSample>,
    pub records: Vec<HandoverRecord>,
}

/// One complete pass of the train along the track.
pub fn simulate_run(cfg: &RunConfig, run_index: u64) -> Result<RunOutput> {
    cfg.validate()?;
    run(cfg, run_index, true)
}

/// [`simulate_run`] without keeping the per-tick trace.
pub fn simulate_records(cfg: &RunConfig, run_index: u64) -> Result<Vec<HandoverRecord>> {
    cfg.validate()?;
    Ok(run(cfg, run_index, false)?.records)
}

fn run(cfg: &RunConfig, run_index: u64, keep_trace: bool) -> Result<RunOutput> {
    let cells = cfg.layout.rrhs.len();
    let seed = cfg.master_seed;
    // link ids: 2c for propagation, 2c+1 for measurement noise
    let mut fading: Vec<FadingState> = (0..cells)
        .map(|c| FadingState::new(link_rng(seed, run_index, 2 * c as u64)))
        .collect();
    let mut meas_rng: Vec<_> = (0..cells)
        .map(|c| link_rng(seed, run_index, 2 * c as u64 + 1))
        .collect();
    let mut l1: Vec<L1Filter> = (0..cells).map(|_| L1Filter::new(cfg.l1)).collect();
    let mut l3: Vec<L3Filter> = (0..cells).map(|_| L3Filter::new(cfg.l3)).collect();

    let p_ici = cfg.ici_power();
    let noise = cfg.budget.noise_power_dbm;
    let bandwidth = cfg.ici.bandwidth;

    let mut l3_now = vec![0.0; cells];
    let mut dl_now = vec![0.0; cells];
    let mut ul_now = vec![0.0; cells];
    let mut fsm: Option<HandoverFsm> = None;
    let mut out = RunOutput::default();
    let mut initial_serving = 0;

    for tick in 0..cfg.tick_count() as Tick {
        let position = cfg.position_of_tick(tick);
        let environment = cfg.layout.environment_at(position)?;
        let profile = cfg.profiles.get(environment);
        let mut cell_ticks = Vec::new();

        for c in 0..cells {
            let power = mean_rx_power_dbm(
                &cfg.budget,
                &cfg.layout.rrhs[c],
                &cfg.antenna,
                profile,
                position,
                &mut fading[c],
            )?;
            let pr_dl = snr_db_from_rx_power(power.downlink_dbm, noise);
            let pr_ul = snr_db_from_rx_power(power.uplink_dbm, noise);
            let downlink = SignalQuality::new(pr_dl, p_ici, bandwidth)?;
            let l1_db = l1[c].push(effective_sinr_linear(pr_dl, p_ici), &mut meas_rng[c])?;
            let l3_db = l3[c].push(l1_db);
            l3_now[c] = l3_db;
            dl_now[c] = downlink.effective_snr_db;
            ul_now[c] = rss_with_ici(pr_ul, p_ici)?;
            if keep_trace {
                cell_ticks.push(CellTick {
                    downlink,
                    snr_no_ici_db: linear_to_db(pr_dl),
                    uplink_sinr_db: ul_now[c],
                    l1_db,
                    l3_db,
                });
            }
        }

        let machine = match fsm.as_mut() {
            Some(m) => m,
            None => {
                initial_serving = strongest_cell(&l3_now).ok_or(Error::EmptyInput("cells"))?;
                fsm.insert(HandoverFsm::new(
                    cfg.handover,
                    cfg.l1.sample_period,
                    initial_serving,
                    tick,
                )?)
            }
        };
        let input = TickInput {
            l3_db: &l3_now,
            dl_snr_db: &dl_now,
            ul_snr_db: &ul_now,
        };
        if let Some(mut rec) = machine.step(tick, &input)? {
            rec.run_id = run_index;
            let trigger_pos = cfg.position_of_tick(rec.trigger_tick.unwrap_or(tick));
            rec.environment = cfg.layout.environment_at(trigger_pos)?;
            rec.start_position = rec.command_tick.map(|t| cfg.position_of_tick(t));
            out.records.push(rec);
        }

        if keep_trace {
            let serving = machine.serving();
            let throughput_bps = serving
                .map(|s| cell_ticks[s].downlink.throughput_bps)
                .unwrap_or(0.0);
            out.trace.push(TickSample {
                tick,
                position,
                environment,
                serving,
                interrupted: false,
                throughput_bps,
                cells: cell_ticks,
            });
        }
    }

    if out.records.is_empty() {
        let env = cfg.layout.environment_at(cfg.kinematics.start_position)?;
        out.records.push(HandoverRecord::not_triggered(
            run_index,
            initial_serving,
            env,
        ));
    }

    for rec in &out.records {
        if let Ok(window) = handover_interruption_window(rec) {
            for t in window {
                if let Some(sample) = out.trace.get_mut(t as usize) {
                    sample.interrupted = true;
                    sample.throughput_bps = 0.0;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepStatistics {
    pub label: ScenarioLabel,
    pub runs: u64,
    /// Records with an outcome other than `NotTriggered`.
    pub attempts: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// Mean start point in metres past the serving RRH, over forward
    /// successful handovers mapped to the snapshot grid.
    pub weighted_start_point: Option<f64>,
    pub mean_delay: Option<f64>,
    pub delay_in_samples: Option<u32>,
    /// Snapshot index (start point / snapshot interval) to probability.
    pub start_point_histogram: BTreeMap<i64, f64>,
}

/// Order-sensitive fold over per-run records.
#[derive(Debug, Clone, Default)]
pub struct StatsAccumulator {
    runs: u64,
    attempts: u64,
    successes: u64,
    delay_sum: f64,
    delay_count: u64,
    start_counts: BTreeMap<i64, u64>,
}

impl StatsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_run(&mut self, records: &[HandoverRecord], cfg: &RunConfig) {
        self.runs += 1;
        let interval = cfg.kinematics.snapshot_interval;
        for rec in records {
            if rec.outcome == Outcome::NotTriggered {
                continue;
            }
            self.attempts += 1;
            if rec.outcome != Outcome::Success {
                continue;
            }
            self.successes += 1;
            if let Some(delay) = rec.total_delay {
                self.delay_sum += delay;
                self.delay_count += 1;
            }
            if let Some(start) = rec.start_position {
                // ping-pong returns to the cell behind are not start points
                if rec.target_cell > rec.serving_cell {
                    let rel = start - cfg.layout.rrhs[rec.serving_cell].position_along_track;
                    let snapshot = libm::round(rel / interval) as i64;
                    *self.start_counts.entry(snapshot).or_insert(0) += 1;
                }
            }
        }
    }

    pub fn finish(&self, cfg: &RunConfig) -> SweepStatistics {
        let interval = cfg.kinematics.snapshot_interval;
        let total: u64 = self.start_counts.values().sum();
        let start_point_histogram: BTreeMap<i64, f64> = self
            .start_counts
            .iter()
            .map(|(&k, &n)| (k, n as f64 / total as f64))
            .collect();
        let weighted_start_point = (total > 0).then(|| {
            start_point_histogram
                .iter()
                .map(|(&k, &p)| k as f64 * interval * p)
                .sum()
        });
        let mean_delay = (self.delay_count > 0).then(|| self.delay_sum / self.delay_count as f64);
        SweepStatistics {
            label: cfg.label(),
            runs: self.runs,
            attempts: self.attempts,
            successes: self.successes,
            success_rate: if self.attempts > 0 {
                self.successes as f64 / self.attempts as f64
            } else {
                0.0
            },
            weighted_start_point,
            mean_delay,
            delay_in_samples: mean_delay.map(|d| libm::round(d / cfg.l1.sample_period) as u32),
            start_point_histogram,
        }
    }
}

/// Aggregate per-run record lists, in run order.
pub fn aggregate<'a, I>(cfg: &RunConfig, runs: I) -> SweepStatistics
where
    I: IntoIterator<Item = &'a [HandoverRecord]>,
{
    let mut acc = StatsAccumulator::new();
    for records in runs {
        acc.add_run(records, cfg);
    }
    acc.finish(cfg)
}

/// Sequential Monte Carlo over `cfg.runs` independent runs.
pub fn monte_carlo(cfg: &RunConfig) -> Result<SweepStatistics> {
    cfg.validate()?;
    let mut acc = StatsAccumulator::new();
    for run_index in 0..cfg.runs as u64 {
        let records = run(cfg, run_index, false)?.records;
        acc.add_run(&records, cfg);
    }
    Ok(acc.finish(cfg))
}

/// [`monte_carlo`] for each speed (km/h) with the template's seed.
pub fn speed_comparison(template: &RunConfig, speeds_kmh: &[f64]) -> Result<Vec<SweepStatistics>> {
    if speeds_kmh.is_empty() {
        return Err(Error::EmptyInput("speed list"));
    }
    speeds_kmh
        .iter()
        .map(|&kmh| monte_carlo(&template.clone().with_speed_kmh(kmh)))
        .collect()
}
