//! CSV artifacts: handover records, per-configuration statistics, the
//! start-point histogram and per-tick traces.
//!
//! All files are UTF-8 with LF line endings; reals are written with six
//! significant digits and a '.' decimal separator, missing values as empty
//! fields.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use hsr_handover::geometry::EnvironmentId;
use hsr_handover::handover::{HandoverRecord, Outcome, Tick};
use hsr_handover::harness::{RunConfig, ScenarioLabel, SweepStatistics, TickSample};

use crate::error::{Result, SimError};

pub const RECORDS_HEADER: [&str; 11] = [
    "run_id",
    "speed_kmh",
    "environment",
    "offset_db",
    "trigger_tick",
    "report_tick",
    "command_tick",
    "completion_tick",
    "start_position_m",
    "delay_ms",
    "outcome",
];

pub const STATS_HEADER: [&str; 10] = [
    "speed_kmh",
    "environment",
    "offset_db",
    "runs",
    "attempts",
    "successes",
    "success_rate",
    "weighted_start_point_m",
    "mean_delay_ms",
    "delay_samples",
];

pub const HISTOGRAM_HEADER: [&str; 6] = [
    "speed_kmh",
    "environment",
    "offset_db",
    "snapshot",
    "start_point_m",
    "probability",
];

/// Six significant digits, shortest representation, no exponent.
pub fn format_real(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

/// Value as it reads back after [`format_real`].
pub fn round_real(x: f64) -> f64 {
    format_real(x).parse().expect("formatted float parses")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

fn opt_int<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One row of the records CSV. Ticks and reals are optional because a
/// record stops filling in fields at the stage where it ended.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordRow {
    pub run_id: u64,
    pub speed_kmh: f64,
    pub environment: EnvironmentId,
    pub offset_db: f64,
    pub trigger_tick: Option<Tick>,
    pub report_tick: Option<Tick>,
    pub command_tick: Option<Tick>,
    pub completion_tick: Option<Tick>,
    pub start_position_m: Option<f64>,
    pub delay_ms: Option<f64>,
    pub outcome: Outcome,
}

impl RecordRow {
    pub fn new(record: &HandoverRecord, label: &ScenarioLabel) -> Self {
        Self {
            run_id: record.run_id,
            speed_kmh: label.speed_kmh,
            environment: record.environment,
            offset_db: label.offset_db,
            trigger_tick: record.trigger_tick,
            report_tick: record.report_tick,
            command_tick: record.command_tick,
            completion_tick: record.completion_tick,
            start_position_m: record.start_position,
            delay_ms: record.total_delay.map(|d| d * 1000.0),
            outcome: record.outcome,
        }
    }

    fn fields(&self) -> [String; 11] {
        [
            self.run_id.to_string(),
            format_real(self.speed_kmh),
            self.environment.as_str().to_string(),
            format_real(self.offset_db),
            opt_int(self.trigger_tick),
            opt_int(self.report_tick),
            opt_int(self.command_tick),
            opt_int(self.completion_tick),
            opt_real(self.start_position_m),
            opt_real(self.delay_ms),
            self.outcome.as_str().to_string(),
        ]
    }

    fn from_fields(row: &csv::StringRecord) -> Result<Self> {
        fn field(row: &csv::StringRecord, i: usize) -> &str {
            row.get(i).unwrap_or("")
        }
        fn bad(name: &'static str, value: &str) -> SimError {
            SimError::Parse {
                field: name,
                value: value.to_string(),
            }
        }
        fn num<T: std::str::FromStr>(row: &csv::StringRecord, i: usize) -> Result<T> {
            let s = field(row, i);
            s.parse().map_err(|_| bad(RECORDS_HEADER[i], s))
        }
        fn opt<T: std::str::FromStr>(row: &csv::StringRecord, i: usize) -> Result<Option<T>> {
            if field(row, i).is_empty() {
                Ok(None)
            } else {
                num(row, i).map(Some)
            }
        }
        if row.len() != RECORDS_HEADER.len() {
            return Err(bad("row", &format!("{} fields", row.len())));
        }
        let env = field(row, 2);
        let outcome = field(row, 10);
        Ok(Self {
            run_id: num(row, 0)?,
            speed_kmh: num(row, 1)?,
            environment: EnvironmentId::parse(env).ok_or_else(|| bad("environment", env))?,
            offset_db: num(row, 3)?,
            trigger_tick: opt(row, 4)?,
            report_tick: opt(row, 5)?,
            command_tick: opt(row, 6)?,
            completion_tick: opt(row, 7)?,
            start_position_m: opt(row, 8)?,
            delay_ms: opt(row, 9)?,
            outcome: Outcome::parse(outcome).ok_or_else(|| bad("outcome", outcome))?,
        })
    }
}

fn writer<W: Write>(sink: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| SimError::io(path, e))
}

/// Run `body` against a CSV writer on a fresh file at `path`.
fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut csv::Writer<BufWriter<File>>) -> csv::Result<()>,
{
    let mut w = writer(create(path)?);
    body(&mut w).map_err(|e| SimError::csv(path, e))?;
    w.flush().map_err(|e| SimError::io(path, e))
}

pub fn write_records<W: Write>(sink: W, rows: &[RecordRow]) -> csv::Result<()> {
    let mut w = writer(sink);
    w.write_record(RECORDS_HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(source: R) -> Result<Vec<RecordRow>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(source);
    let header = r.headers().map_err(|e| SimError::csv("<records>", e))?;
    if header.iter().ne(RECORDS_HEADER) {
        return Err(SimError::Parse {
            field: "header",
            value: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    r.records()
        .map(|row| {
            let row = row.map_err(|e| SimError::csv("<records>", e))?;
            RecordRow::from_fields(&row)
        })
        .collect()
}

pub fn emit_records(path: &Path, rows: &[RecordRow]) -> Result<()> {
    write_records(create(path)?, rows).map_err(|e| SimError::csv(path, e))
}

pub fn load_records(path: &Path) -> Result<Vec<RecordRow>> {
    let file = File::open(path).map_err(|e| SimError::io(path, e))?;
    read_records(std::io::BufReader::new(file))
}

fn stats_fields(s: &SweepStatistics) -> [String; 10] {
    [
        format_real(s.label.speed_kmh),
        s.label.environment.to_string(),
        format_real(s.label.offset_db),
        s.runs.to_string(),
        s.attempts.to_string(),
        s.successes.to_string(),
        format_real(s.success_rate),
        opt_real(s.weighted_start_point),
        opt_real(s.mean_delay.map(|d| d * 1000.0)),
        opt_int(s.delay_in_samples),
    ]
}

pub fn write_stats<W: Write>(sink: W, stats: &[SweepStatistics]) -> csv::Result<()> {
    let mut w = writer(sink);
    w.write_record(STATS_HEADER)?;
    for s in stats {
        w.write_record(stats_fields(s))?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_stats(path: &Path, stats: &[SweepStatistics]) -> Result<()> {
    write_stats(create(path)?, stats).map_err(|e| SimError::csv(path, e))
}

/// Long-format start-point histogram, one row per (configuration, snapshot),
/// each configuration paired with its snapshot interval in metres.
pub fn emit_histogram(path: &Path, stats: &[(SweepStatistics, f64)]) -> Result<()> {
    write_file(path, |w| {
        w.write_record(HISTOGRAM_HEADER)?;
        for (s, interval) in stats {
            for (&snapshot, &p) in &s.start_point_histogram {
                w.write_record([
                    format_real(s.label.speed_kmh),
                    s.label.environment.to_string(),
                    format_real(s.label.offset_db),
                    snapshot.to_string(),
                    format_real(snapshot as f64 * interval),
                    format_real(p),
                ])?;
            }
        }
        Ok(())
    })
}

/// Wide per-tick trace: run-level columns followed by five columns per cell.
pub fn trace_header(cells: usize) -> Vec<String> {
    let mut h: Vec<String> = [
        "tick",
        "time_s",
        "position_m",
        "environment",
        "serving",
        "interrupted",
        "throughput_bps",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for c in 0..cells {
        for col in ["snr_db", "sinr_db", "ul_sinr_db", "l1_db", "l3_db"] {
            h.push(format!("cell{c}_{col}"));
        }
    }
    h
}

fn trace_fields(sample: &TickSample, sample_period: f64) -> Vec<String> {
    let mut f = vec![
        sample.tick.to_string(),
        format_real(sample.tick as f64 * sample_period),
        format_real(sample.position),
        sample.environment.as_str().to_string(),
        opt_int(sample.serving),
        u8::from(sample.interrupted).to_string(),
        format_real(sample.throughput_bps),
    ];
    for cell in &sample.cells {
        f.extend([
            format_real(cell.snr_no_ici_db),
            format_real(cell.downlink.effective_snr_db),
            format_real(cell.uplink_sinr_db),
            format_real(cell.l1_db),
            format_real(cell.l3_db),
        ]);
    }
    f
}

pub fn emit_trace(path: &Path, trace: &[TickSample], cfg: &RunConfig) -> Result<()> {
    write_file(path, |w| {
        w.write_record(trace_header(cfg.layout.rrhs.len()))?;
        trace
            .iter()
            .try_for_each(|s| w.write_record(trace_fields(s, cfg.l1.sample_period)))
    })
}
