//! Doppler spread, intercarrier-interference power bounds and the
//! ICI-degraded effective SINR.

use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::{db_to_linear, linear_to_db, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IciParams {
    pub alpha1: f64,
    pub alpha2: f64,
    /// Symbol duration in seconds.
    pub symbol_duration: f64,
    pub carrier_frequency: f64,
    /// Bandwidth used by the Shannon throughput proxy.
    pub bandwidth: f64,
}

impl Default for IciParams {
    fn default() -> Self {
        Self {
            alpha1: 0.5,
            alpha2: 0.375,
            symbol_duration: 1e-3,
            carrier_frequency: 3.5e9,
            bandwidth: 100e6,
        }
    }
}

impl IciParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha1 > 0.0 && self.alpha2 > 0.0) {
            return Err(Error::config("alpha1 and alpha2 must be > 0"));
        }
        if !(self.symbol_duration > 0.0) {
            return Err(Error::config("symbol_duration must be > 0"));
        }
        if !(self.carrier_frequency > 0.0) || !(self.bandwidth > 0.0) {
            return Err(Error::config("carrier_frequency and bandwidth must be > 0"));
        }
        Ok(())
    }

    fn normalized_spread(&self, fd: f64) -> f64 {
        2.0 * PI * fd * self.symbol_duration
    }
}

/// Maximum Doppler shift `v·fc/c`.
pub fn doppler_spread_hz(speed: f64, carrier_frequency: f64) -> f64 {
    speed * carrier_frequency / SPEED_OF_LIGHT
}

/// `(α1/12)(2π fd Ts)²`; this is the value the simulation uses.
pub fn ici_power_upper(fd: f64, p: &IciParams) -> f64 {
    let x = p.normalized_spread(fd);
    p.alpha1 / 12.0 * x * x
}

/// `(α1/12)(2π fd Ts)² − (α2/360)(2π fd Ts)⁴`, floored at zero.
pub fn ici_power_lower(fd: f64, p: &IciParams) -> f64 {
    let x = p.normalized_spread(fd);
    let x2 = x * x;
    (ici_power_upper(fd, p) - p.alpha2 / 360.0 * x2 * x2).max(0.0)
}

/// Linear form of [`rss_with_ici`]: `pr / (pr·p_ici + 1)`.
pub fn effective_sinr_linear(pr_linear: f64, p_ici: f64) -> f64 {
    pr_linear / (pr_linear * p_ici + 1.0)
}

/// `10·log10(pr / (pr·p_ici + 1))` with unit noise power, i.e. the
/// effective SINR in dB.
pub fn rss_with_ici(pr_linear: f64, p_ici: f64) -> Result<f64> {
    if !(pr_linear > 0.0) {
        return Err(Error::Domain("received power must be > 0"));
    }
    if !(p_ici >= 0.0) {
        return Err(Error::Domain("ICI power must be >= 0"));
    }
    Ok(linear_to_db(effective_sinr_linear(pr_linear, p_ici)))
}

/// Received power normalized to the noise power.
pub fn snr_db_from_rx_power(rx_dbm: f64, noise_dbm: f64) -> f64 {
    db_to_linear(rx_dbm - noise_dbm)
}

/// Shannon rate `B·log2(1 + snr)`.
pub fn throughput_proxy(effective_snr_db: f64, bandwidth: f64) -> f64 {
    bandwidth * libm::log2(1.0 + db_to_linear(effective_snr_db))
}

/// Degraded link quality at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalQuality {
    pub pr_linear: f64,
    pub p_ici: f64,
    pub effective_snr_db: f64,
    pub throughput_bps: f64,
}

impl SignalQuality {
    pub fn new(pr_linear: f64, p_ici: f64, bandwidth: f64) -> Result<Self> {
        let effective_snr_db = rss_with_ici(pr_linear, p_ici)?;
        Ok(Self {
            pr_linear,
            p_ici,
            effective_snr_db,
            throughput_bps: throughput_proxy(effective_snr_db, bandwidth),
        })
    }

    /// Same link during a hard-handover break: no data flows.
    pub fn interrupted(self) -> Self {
        Self {
            throughput_bps: 0.0,
            ..self
        }
    }
}
