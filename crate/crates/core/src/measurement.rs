//! Layer-1 and Layer-3 measurement filtering.
//!
//! L1 samples the per-snapshot stream once per sample period, averages the
//! last `window / sample_period` samples in the linear domain, converts to
//! dB and adds clipped Gaussian noise in dB. L3 runs the recursive filter
//! `F[n] = (1-a)·F[n-1] + a·M[n]` over the L1 output.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::math::{is_tick_multiple, linear_to_db};

pub const DEFAULT_SAMPLE_PERIOD_S: f64 = 0.040;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Config {
    pub sample_period: f64,
    pub window: f64,
    pub meas_noise_sigma_db: f64,
    /// Noise is clipped to `±noise_cutoff·sigma`.
    pub noise_cutoff: f64,
}

impl Default for L1Config {
    fn default() -> Self {
        Self {
            sample_period: DEFAULT_SAMPLE_PERIOD_S,
            window: 0.200,
            meas_noise_sigma_db: 1.0,
            noise_cutoff: 3.0,
        }
    }
}

impl L1Config {
    pub fn window_samples(&self) -> usize {
        libm::round(self.window / self.sample_period) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_period > 0.0) || !(self.window > 0.0) {
            return Err(Error::config("sample_period and window must be > 0"));
        }
        if !is_tick_multiple(self.window, self.sample_period) {
            return Err(Error::config("window must be a multiple of sample_period"));
        }
        if !(self.meas_noise_sigma_db >= 0.0) || !(self.noise_cutoff >= 0.0) {
            return Err(Error::config(
                "measurement noise sigma and cutoff must be >= 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L3Config {
    pub filter_coefficient_a: f64,
}

impl L3Config {
    /// `a = 1/2^(k/4)` as in the usual filterCoefficient parameterization.
    pub fn from_filter_k(k: u32) -> Self {
        Self {
            filter_coefficient_a: libm::pow(0.5, k as f64 / 4.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.filter_coefficient_a;
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::config("l3 filter coefficient must be in (0, 1]"));
        }
        Ok(())
    }
}

impl Default for L3Config {
    fn default() -> Self {
        Self::from_filter_k(4)
    }
}

/// Clipped Gaussian measurement noise in dB.
pub fn measurement_noise_db<R: Rng + ?Sized>(cfg: &L1Config, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    let limit = cfg.noise_cutoff * cfg.meas_noise_sigma_db;
    (z * cfg.meas_noise_sigma_db).clamp(-limit, limit)
}

/// Streaming L1 filter fed one linear sample per tick.
#[derive(Debug, Clone)]
pub struct L1Filter {
    cfg: L1Config,
    window: VecDeque<f64>,
    capacity: usize,
}

impl L1Filter {
    pub fn new(cfg: L1Config) -> Self {
        let capacity = cfg.window_samples().max(1);
        Self {
            cfg,
            window: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    /// Noiseless windowed value in dB after pushing `linear`.
    pub fn push_noiseless(&mut self, linear: f64) -> Result<f64> {
        if !(linear > 0.0) {
            return Err(Error::Domain("l1 input must be > 0"));
        }
        if self.window.len() == self.capacity {
            self.window.pop_front();
        }
        self.window.push_back(linear);
        let mean = self.window.iter().sum::<f64>() / self.window.len() as f64;
        Ok(linear_to_db(mean))
    }

    pub fn push<R: Rng + ?Sized>(&mut self, linear: f64, rng: &mut R) -> Result<f64> {
        let clean = self.push_noiseless(linear)?;
        Ok(clean + measurement_noise_db(&self.cfg, rng))
    }
}

/// Batch L1 filter over a per-snapshot stream, sampling every `stride`
/// snapshots starting with the first one.
pub fn l1_filter<R: Rng + ?Sized>(
    raw_linear_stream: &[f64],
    cfg: &L1Config,
    stride: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if raw_linear_stream.is_empty() {
        return Err(Error::EmptyInput("l1 input stream"));
    }
    let mut filter = L1Filter::new(*cfg);
    raw_linear_stream
        .iter()
        .step_by(stride.max(1))
        .map(|&x| filter.push(x, rng))
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct L3Filter {
    a: f64,
    state: Option<f64>,
}

impl L3Filter {
    pub fn new(cfg: L3Config) -> Self {
        Self {
            a: cfg.filter_coefficient_a,
            state: None,
        }
    }

    pub fn push(&mut self, m: f64) -> f64 {
        let next = match self.state {
            None => m,
            Some(prev) => (1.0 - self.a) * prev + self.a * m,
        };
        self.state = Some(next);
        next
    }
}

pub fn l3_filter(l1_series: &[f64], cfg: &L3Config) -> Result<Vec<f64>> {
    if l1_series.is_empty() {
        return Err(Error::EmptyInput("l3 input series"));
    }
    let mut filter = L3Filter::new(*cfg);
    Ok(l1_series.iter().map(|&m| filter.push(m)).collect())
}

/// Filtered measurements of one cell on the sample grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeasurementSeries {
    pub cell_id: usize,
    pub l1: Vec<f64>,
    pub l3: Vec<f64>,
}
