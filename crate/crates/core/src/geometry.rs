//! Trackside deployment, environment segmentation and train kinematics.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{Error, Result};

pub const DEFAULT_RRH_SPACING_M: f64 = 1732.0;
pub const DEFAULT_LATERAL_OFFSET_M: f64 = 100.0;
pub const DEFAULT_RRH_HEIGHT_M: f64 = 30.0;
pub const DEFAULT_MAX_GAIN_DB: f64 = 14.0;
pub const DEFAULT_SNAPSHOT_INTERVAL_M: f64 = 1.0;

pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}

pub fn mps_to_kmh(mps: f64) -> f64 {
    mps * 3.6
}

/// Propagation environment between two neighbouring radio heads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EnvironmentId {
    Viaduct,
    Cutting,
    Urban,
}

impl EnvironmentId {
    pub const ALL: [EnvironmentId; 3] = [Self::Viaduct, Self::Cutting, Self::Urban];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Viaduct => "viaduct",
            Self::Cutting => "cutting",
            Self::Urban => "urban",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "viaduct" => Some(Self::Viaduct),
            "cutting" => Some(Self::Cutting),
            "urban" => Some(Self::Urban),
            _ => None,
        }
    }
}

impl fmt::Display for EnvironmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A remote radio head beside the track. Its two beams point both ways
/// along the track, so the pattern is symmetric about the abeam direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrhSite {
    pub position_along_track: f64,
    pub lateral_offset: f64,
    pub height: f64,
    pub max_gain_db: f64,
}

impl RrhSite {
    pub fn at(position_along_track: f64) -> Self {
        Self {
            position_along_track,
            lateral_offset: DEFAULT_LATERAL_OFFSET_M,
            height: DEFAULT_RRH_HEIGHT_M,
            max_gain_db: DEFAULT_MAX_GAIN_DB,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lateral_offset > 0.0) {
            return Err(Error::config("rrh lateral_offset must be > 0"));
        }
        if !(self.height > 0.0) {
            return Err(Error::config("rrh height must be > 0"));
        }
        if !self.position_along_track.is_finite() || !self.max_gain_db.is_finite() {
            return Err(Error::config("rrh position and gain must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub environment: EnvironmentId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentLayout {
    pub rrhs: Vec<RrhSite>,
    pub rrh_spacing: f64,
    pub track_length: f64,
    pub segments: Vec<Segment>,
}

impl Default for DeploymentLayout {
    /// Three inter-RRH spans of 1732 m, viaduct then cutting then urban.
    fn default() -> Self {
        Self::with_spans(&EnvironmentId::ALL, DEFAULT_RRH_SPACING_M)
    }
}

impl DeploymentLayout {
    /// One radio head at every span boundary (so `spans.len() + 1` heads)
    /// and one environment per span.
    pub fn with_spans(spans: &[EnvironmentId], spacing: f64) -> Self {
        let rrhs = (0..=spans.len())
            .map(|i| RrhSite::at(i as f64 * spacing))
            .collect();
        let segments = spans
            .iter()
            .enumerate()
            .map(|(i, &environment)| Segment {
                start: i as f64 * spacing,
                end: (i + 1) as f64 * spacing,
                environment,
            })
            .collect();
        Self {
            rrhs,
            rrh_spacing: spacing,
            track_length: spans.len() as f64 * spacing,
            segments,
        }
    }

    /// Same sites and track as `self`, every segment relabelled `env`.
    pub fn with_uniform_environment(&self, env: EnvironmentId) -> Self {
        let mut out = self.clone();
        for seg in &mut out.segments {
            seg.environment = env;
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.rrhs.len() < 2 {
            return Err(Error::config("layout needs at least two rrhs"));
        }
        if !(self.rrh_spacing > 0.0) || !(self.track_length > 0.0) {
            return Err(Error::config("rrh_spacing and track_length must be > 0"));
        }
        for site in &self.rrhs {
            site.validate()?;
        }
        for pair in self.rrhs.windows(2) {
            let gap = pair[1].position_along_track - pair[0].position_along_track;
            if (gap - self.rrh_spacing).abs() > 1e-6 {
                return Err(Error::config(
                    "rrhs must be sorted with consecutive spacing equal to rrh_spacing",
                ));
            }
        }
        self.validate_tiling()?;
        // one environment per inter-RRH span
        for pair in self.rrhs.windows(2) {
            let lo = pair[0].position_along_track.max(0.0);
            let hi = pair[1].position_along_track.min(self.track_length);
            if hi <= lo {
                continue;
            }
            let mut envs = self
                .segments
                .iter()
                .filter(|s| s.start < hi && s.end > lo)
                .map(|s| s.environment);
            if let Some(first) = envs.next() {
                if envs.any(|e| e != first) {
                    return Err(Error::config(
                        "exactly one environment allowed between two consecutive rrhs",
                    ));
                }
            }
        }
        Ok(())
    }

    fn validate_tiling(&self) -> Result<()> {
        let Some(first) = self.segments.first() else {
            return Err(Error::config("layout has no segments"));
        };
        if first.start != 0.0 {
            return Err(Error::config("segments must start at 0"));
        }
        for seg in &self.segments {
            if !(seg.end > seg.start) {
                return Err(Error::config("segment end must exceed its start"));
            }
        }
        for pair in self.segments.windows(2) {
            if pair[0].end != pair[1].start {
                return Err(Error::config("segments must tile the track without gaps"));
            }
        }
        let last = self.segments[self.segments.len() - 1];
        if (last.end - self.track_length).abs() > 1e-9 {
            return Err(Error::config("segments must end at track_length"));
        }
        Ok(())
    }

    /// Environment of the segment containing `pos`. A boundary belongs to
    /// the segment that starts there; the track end belongs to the last one.
    pub fn environment_at(&self, pos: f64) -> Result<EnvironmentId> {
        if !(0.0..=self.track_length).contains(&pos) {
            return Err(Error::OutOfRange {
                position: pos,
                track_length: self.track_length,
            });
        }
        let idx = self.segments.partition_point(|s| s.start <= pos);
        idx.checked_sub(1)
            .map(|i| self.segments[i].environment)
            .ok_or(Error::OutOfRange {
                position: pos,
                track_length: self.track_length,
            })
    }

    /// Index of the radio head whose site is closest along the track.
    pub fn nearest_rrh(&self, pos: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, site) in self.rrhs.iter().enumerate() {
            let d = (site.position_along_track - pos).abs();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainKinematics {
    /// Constant speed in m/s.
    pub speed: f64,
    pub snapshot_interval: f64,
    pub start_position: f64,
}

impl Default for TrainKinematics {
    fn default() -> Self {
        Self {
            speed: kmh_to_mps(300.0),
            snapshot_interval: DEFAULT_SNAPSHOT_INTERVAL_M,
            start_position: 0.0,
        }
    }
}

impl TrainKinematics {
    pub fn from_kmh(kmh: f64) -> Self {
        Self {
            speed: kmh_to_mps(kmh),
            ..Self::default()
        }
    }

    /// Zero speed is accepted: the trace then sweeps the track one snapshot
    /// per tick without any Doppler, which is the static reference trace.
    pub fn validate(&self) -> Result<()> {
        if !(self.speed >= 0.0) || !self.speed.is_finite() {
            return Err(Error::config("speed must be finite and >= 0"));
        }
        if !(self.snapshot_interval > 0.0) {
            return Err(Error::config("snapshot_interval must be > 0"));
        }
        if !(self.start_position >= 0.0) {
            return Err(Error::config("start_position must be >= 0"));
        }
        Ok(())
    }
}

/// Train position at time `t`, clamped to the track.
pub fn position_at_time(k: &TrainKinematics, t: f64, track_length: f64) -> f64 {
    (k.start_position + k.speed * t).clamp(0.0, track_length)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub distance_3d: f64,
    /// Horizontal angle between the beam axis and the line to the train,
    /// in `[0, π]`; `π/2` when the train is abeam.
    pub bearing: f64,
}

pub fn link_geometry(site: &RrhSite, train_pos: f64) -> LinkGeometry {
    let along = train_pos - site.position_along_track;
    let distance_3d = libm::sqrt(
        along * along + site.lateral_offset * site.lateral_offset + site.height * site.height,
    );
    let bearing = libm::atan2(site.lateral_offset, along).clamp(0.0, PI);
    LinkGeometry {
        distance_3d,
        bearing,
    }
}

/// Snapshots advanced per measurement sample: `floor(speed·period/interval)`,
/// at least 1. Flooring yields strides 1/3/5 at 100/300/500 km/h with 1 m
/// snapshots and a 40 ms period.
pub fn sample_stride(k: &TrainKinematics, sample_period: f64) -> usize {
    let raw = k.speed * sample_period / k.snapshot_interval;
    // absorb float noise just below an integer, e.g. 2.9999999999
    let stride = libm::floor(raw + 1e-9);
    if stride < 1.0 {
        1
    } else {
        stride as usize
    }
}
