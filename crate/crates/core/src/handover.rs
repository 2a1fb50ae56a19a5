//! LTE hard-handover procedure driven by event A3.
//!
//! Per tick the state machine walks the procedure in order: A3 entering
//! condition held for the time-to-trigger, measurement report (uplink SNR
//! gate), preparation, handover command (downlink SNR gate), SIB reading and
//! RACH towards the target (both gates), and a fixed-delay re-establishment
//! when RACH fails.
//!
//! Delays are placed on the sample grid cumulatively from the report tick:
//! the command lands `ceil((prep + cmd) / T)` ticks after the report and
//! completion `ceil((prep + cmd + rach) / T)` ticks after it, so the default
//! 50 + 15 + 55 ms sums to exactly 3 samples.

use core::ops::Range;

use crate::error::{Error, Result};
use crate::geometry::EnvironmentId;
use crate::math::{is_tick_multiple, ticks_ceil};

pub type CellId = usize;
pub type Tick = u32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoverConfig {
    /// Aggregate A3 margin in dB (offset, Ofn, Ofs and CIO folded together).
    pub hysteresis_h0: f64,
    /// Time-to-trigger in seconds.
    pub ttt: f64,
    pub snr_gate_db: f64,
    pub preparation_delay: f64,
    pub command_delay: f64,
    pub sib_rach_delay: f64,
    pub reestablishment_delay: f64,
}

impl Default for HandoverConfig {
    fn default() -> Self {
        Self {
            hysteresis_h0: 2.0,
            ttt: 0.040,
            snr_gate_db: -10.0,
            preparation_delay: 0.050,
            command_delay: 0.015,
            sib_rach_delay: 0.055,
            reestablishment_delay: 0.200,
        }
    }
}

impl HandoverConfig {
    pub fn validate(&self, sample_period: f64) -> Result<()> {
        if !self.hysteresis_h0.is_finite() || !self.snr_gate_db.is_finite() {
            return Err(Error::config("hysteresis and snr gate must be finite"));
        }
        let delays = [
            self.ttt,
            self.preparation_delay,
            self.command_delay,
            self.sib_rach_delay,
            self.reestablishment_delay,
        ];
        if delays.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::config(
                "ttt and handover delays must be finite and >= 0",
            ));
        }
        if !is_tick_multiple(self.ttt, sample_period) {
            return Err(Error::config("ttt must be a multiple of the sample period"));
        }
        Ok(())
    }
}

/// Tick offsets derived from a [`HandoverConfig`] on a given sample grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProcedureTiming {
    pub ttt_ticks: Tick,
    /// Report to end of preparation.
    pub prepared_after: Tick,
    /// Report to handover command.
    pub command_after: Tick,
    /// Report to RACH completion.
    pub complete_after: Tick,
    pub reestablish_ticks: Tick,
}

impl ProcedureTiming {
    pub fn new(cfg: &HandoverConfig, sample_period: f64) -> Self {
        let prep = cfg.preparation_delay;
        let cmd = prep + cfg.command_delay;
        let done = cmd + cfg.sib_rach_delay;
        Self {
            ttt_ticks: ticks_ceil(cfg.ttt, sample_period),
            prepared_after: ticks_ceil(prep, sample_period),
            command_after: ticks_ceil(cmd, sample_period),
            complete_after: ticks_ceil(done, sample_period),
            reestablish_ticks: ticks_ceil(cfg.reestablishment_delay, sample_period),
        }
    }
}

/// Event A3 entering condition: `target − serving ≥ h0`.
pub fn a3_condition(l3_target: f64, l3_serving: f64, h0: f64) -> bool {
    l3_target - l3_serving >= h0
}

/// Strongest cell other than `serving`; ties go to the lowest id.
pub fn best_neighbor(l3: &[f64], serving: CellId) -> Option<(CellId, f64)> {
    let mut best: Option<(CellId, f64)> = None;
    for (cell, &value) in l3.iter().enumerate() {
        if cell == serving {
            continue;
        }
        if best.is_none_or(|(_, v)| value > v) {
            best = Some((cell, value));
        }
    }
    best
}

/// Strongest cell overall; ties go to the lowest id.
pub fn strongest_cell(l3: &[f64]) -> Option<CellId> {
    best_neighbor(l3, usize::MAX).map(|(c, _)| c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsmState {
    Monitoring,
    TttRunning { start_tick: Tick, target: CellId },
    ReportSent { tick: Tick, target: CellId },
    Preparing { ready_tick: Tick, target: CellId },
    CommandPending { command_tick: Tick, target: CellId },
    RachInProgress { done_tick: Tick, target: CellId },
    Connected { cell: CellId },
    Reestablishing { until_tick: Tick },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Success,
    FailUplinkReport,
    FailDownlinkCommand,
    FailRach,
    NotTriggered,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "Success",
            Outcome::FailUplinkReport => "FailUplinkReport",
            Outcome::FailDownlinkCommand => "FailDownlinkCommand",
            Outcome::FailRach => "FailRach",
            Outcome::NotTriggered => "NotTriggered",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Outcome::Success,
            Outcome::FailUplinkReport,
            Outcome::FailDownlinkCommand,
            Outcome::FailRach,
            Outcome::NotTriggered,
        ]
        .into_iter()
        .find(|o| o.as_str() == s)
    }
}

/// Outcome of one handover attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoverRecord {
    pub run_id: u64,
    pub serving_cell: CellId,
    pub target_cell: CellId,
    pub environment: EnvironmentId,
    pub trigger_tick: Option<Tick>,
    pub report_tick: Option<Tick>,
    pub command_tick: Option<Tick>,
    pub completion_tick: Option<Tick>,
    /// Tick at which a failed RACH is recovered by re-establishment.
    pub reattach_tick: Option<Tick>,
    /// Train position when the serving cell executes the handover command.
    pub start_position: Option<f64>,
    /// `completion − report` in seconds.
    pub total_delay: Option<f64>,
    pub outcome: Outcome,
}

impl HandoverRecord {
    fn attempt(serving: CellId, target: CellId, outcome: Outcome) -> Self {
        Self {
            run_id: 0,
            serving_cell: serving,
            target_cell: target,
            environment: EnvironmentId::Viaduct,
            trigger_tick: None,
            report_tick: None,
            command_tick: None,
            completion_tick: None,
            reattach_tick: None,
            start_position: None,
            total_delay: None,
            outcome,
        }
    }

    pub fn not_triggered(run_id: u64, serving: CellId, environment: EnvironmentId) -> Self {
        Self {
            run_id,
            environment,
            ..Self::attempt(serving, serving, Outcome::NotTriggered)
        }
    }
}

/// Postponement category of a handover decided at A and executed at B.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Postponement {
    /// A3 holds at neither position.
    NoHandover,
    /// A3 already holds at A, so execution happens at B.
    HandoverAtB,
    /// A3 only becomes true between A and B; execution slips.
    Postponed,
}

/// Classify the margins `h_a < h_b` observed at A and B against `h0`.
/// Equality with `h0` counts as satisfying A3.
pub fn classify_postponement(h_a: f64, h_b: f64, h0: f64) -> Result<Postponement> {
    if !(h_a < h_b) {
        return Err(Error::Precondition("classification needs h_a < h_b"));
    }
    Ok(if h0 <= h_a {
        Postponement::HandoverAtB
    } else if h0 <= h_b {
        Postponement::Postponed
    } else {
        Postponement::NoHandover
    })
}

/// Ticks during which user data is interrupted, half-open: from the
/// handover command up to the tick the UE is attached again.
pub fn handover_interruption_window(record: &HandoverRecord) -> Result<Range<Tick>> {
    let end = match record.outcome {
        Outcome::Success => record.completion_tick,
        Outcome::FailRach => record.reattach_tick,
        _ => {
            return Err(Error::Precondition(
                "interruption needs a Success or FailRach record",
            ))
        }
    };
    match (record.command_tick, end) {
        (Some(start), Some(end)) => Ok(start..end),
        _ => Err(Error::Precondition(
            "record lacks command or completion tick",
        )),
    }
}

/// Per-cell inputs for one tick. Slices are indexed by cell id.
#[derive(Debug, Clone, Copy)]
pub struct TickInput<'a> {
    pub l3_db: &'a [f64],
    pub dl_snr_db: &'a [f64],
    pub ul_snr_db: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct HandoverFsm {
    cfg: HandoverConfig,
    timing: ProcedureTiming,
    sample_period: f64,
    state: FsmState,
    serving: Option<CellId>,
    next_tick: Tick,
    // fields of the attempt in flight
    trigger_tick: Tick,
    report_tick: Tick,
    command_tick: Tick,
}

impl HandoverFsm {
    pub fn new(
        cfg: HandoverConfig,
        sample_period: f64,
        serving: CellId,
        first_tick: Tick,
    ) -> Result<Self> {
        cfg.validate(sample_period)?;
        Ok(Self {
            cfg,
            timing: ProcedureTiming::new(&cfg, sample_period),
            sample_period,
            state: FsmState::Connected { cell: serving },
            serving: Some(serving),
            next_tick: first_tick,
            trigger_tick: 0,
            report_tick: 0,
            command_tick: 0,
        })
    }

    pub fn state(&self) -> FsmState {
        self.state
    }

    pub fn serving(&self) -> Option<CellId> {
        self.serving
    }

    pub fn timing(&self) -> ProcedureTiming {
        self.timing
    }

    /// Advance to `tick`, which must follow the previous one.
    pub fn step(&mut self, tick: Tick, input: &TickInput<'_>) -> Result<Option<HandoverRecord>> {
        if tick != self.next_tick {
            return Err(Error::NonMonotonicTick {
                expected: self.next_tick,
                got: tick,
            });
        }
        let cells = input.l3_db.len();
        if input.dl_snr_db.len() != cells || input.ul_snr_db.len() != cells {
            return Err(Error::Precondition(
                "per-cell inputs must have equal length",
            ));
        }
        self.next_tick = tick + 1;

        let gate = self.cfg.snr_gate_db;
        let mut emitted = None;
        loop {
            match self.state {
                FsmState::Monitoring | FsmState::Connected { .. } => {
                    self.state = FsmState::Monitoring;
                    match self.a3_target(input) {
                        Some(target) => {
                            self.trigger_tick = tick;
                            self.state = FsmState::TttRunning {
                                start_tick: tick,
                                target,
                            };
                        }
                        None => break,
                    }
                }
                FsmState::TttRunning {
                    start_tick,
                    target: running,
                } => match self.a3_target(input) {
                    None => {
                        self.state = FsmState::Monitoring;
                        break;
                    }
                    // TTT is per neighbour: a new best neighbour restarts it
                    Some(target) if target != running => {
                        self.state = FsmState::Monitoring;
                    }
                    Some(target) => {
                        if tick - start_tick >= self.timing.ttt_ticks {
                            self.state = FsmState::ReportSent { tick, target };
                        } else {
                            self.state = FsmState::TttRunning { start_tick, target };
                            break;
                        }
                    }
                },
                FsmState::ReportSent {
                    tick: report,
                    target,
                } => {
                    let serving = self.serving_or_err()?;
                    self.report_tick = report;
                    if input.ul_snr_db[serving] < gate {
                        emitted = Some(self.record(serving, target, Outcome::FailUplinkReport));
                        self.state = FsmState::Monitoring;
                        break;
                    }
                    self.state = FsmState::Preparing {
                        ready_tick: report + self.timing.prepared_after,
                        target,
                    };
                }
                FsmState::Preparing { ready_tick, target } => {
                    if tick < ready_tick {
                        break;
                    }
                    self.state = FsmState::CommandPending {
                        command_tick: self.report_tick + self.timing.command_after,
                        target,
                    };
                }
                FsmState::CommandPending {
                    command_tick,
                    target,
                } => {
                    if tick < command_tick {
                        break;
                    }
                    let serving = self.serving_or_err()?;
                    self.command_tick = command_tick;
                    if input.dl_snr_db[serving] < gate {
                        emitted = Some(self.record(serving, target, Outcome::FailDownlinkCommand));
                        self.state = FsmState::Monitoring;
                        break;
                    }
                    self.state = FsmState::RachInProgress {
                        done_tick: self.report_tick + self.timing.complete_after,
                        target,
                    };
                }
                FsmState::RachInProgress { done_tick, target } => {
                    if tick < done_tick {
                        break;
                    }
                    let serving = self.serving_or_err()?;
                    let ok = input.ul_snr_db[target] >= gate && input.dl_snr_db[target] >= gate;
                    if ok {
                        emitted = Some(self.record(serving, target, Outcome::Success));
                        self.serving = Some(target);
                        self.state = FsmState::Connected { cell: target };
                        break;
                    }
                    let until_tick = done_tick + self.timing.reestablish_ticks;
                    emitted = Some(self.record(serving, target, Outcome::FailRach));
                    self.serving = None;
                    self.state = FsmState::Reestablishing { until_tick };
                }
                FsmState::Reestablishing { until_tick } => {
                    if tick < until_tick {
                        break;
                    }
                    let cell = strongest_cell(input.l3_db)
                        .ok_or(Error::EmptyInput("no cells to re-establish on"))?;
                    self.serving = Some(cell);
                    self.state = FsmState::Connected { cell };
                    break;
                }
            }
        }
        Ok(emitted)
    }

    fn serving_or_err(&self) -> Result<CellId> {
        self.serving
            .ok_or(Error::Precondition("procedure step without a serving cell"))
    }

    fn a3_target(&self, input: &TickInput<'_>) -> Option<CellId> {
        let serving = self.serving?;
        let (target, value) = best_neighbor(input.l3_db, serving)?;
        a3_condition(value, input.l3_db[serving], self.cfg.hysteresis_h0).then_some(target)
    }

    fn record(&self, serving: CellId, target: CellId, outcome: Outcome) -> HandoverRecord {
        let mut rec = HandoverRecord::attempt(serving, target, outcome);
        rec.trigger_tick = Some(self.trigger_tick);
        rec.report_tick = Some(self.report_tick);
        match outcome {
            Outcome::FailDownlinkCommand => rec.command_tick = Some(self.command_tick),
            Outcome::Success | Outcome::FailRach => {
                let done = self.report_tick + self.timing.complete_after;
                rec.command_tick = Some(self.command_tick);
                rec.completion_tick = Some(done);
                rec.total_delay = Some((done - self.report_tick) as f64 * self.sample_period);
                if outcome == Outcome::FailRach {
                    rec.reattach_tick = Some(done + self.timing.reestablish_ticks);
                }
            }
            _ => {}
        }
        rec
    }
}
