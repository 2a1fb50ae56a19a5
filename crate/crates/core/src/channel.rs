//! Mean received power per link: log-distance path loss, a bidirectional
//! parabolic antenna pattern, spatially correlated log-normal shadowing and
//! Rician/Rayleigh small-scale fading.

use core::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{link_geometry, EnvironmentId, RrhSite};
use crate::math::{db_to_linear, linear_to_db, SPEED_OF_LIGHT};

pub const DEFAULT_CARRIER_HZ: f64 = 3.5e9;
pub const DEFAULT_SHADOW_SIGMA_DB: f64 = 6.0;
pub const DEFAULT_SHADOW_DECORRELATION_M: f64 = 50.0;
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Free-space loss at 1 m.
pub fn free_space_intercept_db(carrier_hz: f64) -> f64 {
    20.0 * libm::log10(4.0 * PI * carrier_hz / SPEED_OF_LIGHT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagation {
    Los,
    Nlos,
}

/// Probability that a link of a given length has line of sight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LosModel {
    Always,
    Never,
    /// `exp(-d / scale_m)`
    Exponential {
        scale_m: f64,
    },
}

impl LosModel {
    pub fn probability(&self, distance: f64) -> f64 {
        match *self {
            LosModel::Always => 1.0,
            LosModel::Never => 0.0,
            LosModel::Exponential { scale_m } => libm::exp(-distance / scale_m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentProfile {
    pub id: EnvironmentId,
    pub los_exponent: f64,
    pub nlos_exponent: f64,
    /// Path loss at the 1 m reference distance.
    pub pathloss_intercept_db: f64,
    /// Rician K factor of LOS links; `+inf` means a pure LOS ray.
    /// NLOS links are always Rayleigh.
    pub los_rician_k_db: f64,
    pub los_model: LosModel,
    pub shadow_sigma_db: f64,
    pub shadow_decorrelation_m: f64,
}

impl EnvironmentProfile {
    pub fn viaduct() -> Self {
        Self {
            id: EnvironmentId::Viaduct,
            los_exponent: 2.2,
            nlos_exponent: 2.2,
            pathloss_intercept_db: free_space_intercept_db(DEFAULT_CARRIER_HZ),
            los_rician_k_db: 10.0,
            los_model: LosModel::Always,
            shadow_sigma_db: DEFAULT_SHADOW_SIGMA_DB,
            shadow_decorrelation_m: DEFAULT_SHADOW_DECORRELATION_M,
        }
    }

    pub fn cutting() -> Self {
        Self {
            id: EnvironmentId::Cutting,
            los_exponent: 2.3,
            nlos_exponent: 2.7,
            los_rician_k_db: 5.0,
            los_model: LosModel::Exponential { scale_m: 200.0 },
            ..Self::viaduct()
        }
    }

    pub fn urban() -> Self {
        Self {
            id: EnvironmentId::Urban,
            los_exponent: 3.0,
            nlos_exponent: 3.0,
            los_model: LosModel::Never,
            ..Self::viaduct()
        }
    }

    pub fn for_environment(id: EnvironmentId) -> Self {
        match id {
            EnvironmentId::Viaduct => Self::viaduct(),
            EnvironmentId::Cutting => Self::cutting(),
            EnvironmentId::Urban => Self::urban(),
        }
    }

    pub fn exponent(&self, propagation: Propagation) -> f64 {
        match propagation {
            Propagation::Los => self.los_exponent,
            Propagation::Nlos => self.nlos_exponent,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.los_exponent > 0.0 && self.nlos_exponent > 0.0) {
            return Err(Error::config("path-loss exponents must be > 0"));
        }
        if !self.pathloss_intercept_db.is_finite() {
            return Err(Error::config("path-loss intercept must be finite"));
        }
        if self.los_rician_k_db.is_nan() {
            return Err(Error::config("rician K must be a number"));
        }
        if !(self.shadow_sigma_db >= 0.0) || !(self.shadow_decorrelation_m > 0.0) {
            return Err(Error::config(
                "shadow sigma must be >= 0 and decorrelation distance > 0",
            ));
        }
        if let LosModel::Exponential { scale_m } = self.los_model {
            if !(scale_m > 0.0) {
                return Err(Error::config("los scale must be > 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub rrh_tx_power_dbm: f64,
    pub ue_tx_power_dbm: f64,
    pub penetration_loss_db: f64,
    pub noise_power_dbm: f64,
}

impl LinkBudget {
    pub fn noise_floor_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
        THERMAL_NOISE_DBM_PER_HZ + 10.0 * libm::log10(bandwidth_hz) + noise_figure_db
    }
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            rrh_tx_power_dbm: 30.0,
            ue_tx_power_dbm: 23.0,
            penetration_loss_db: 20.0,
            noise_power_dbm: Self::noise_floor_dbm(
                DEFAULT_NOISE_BANDWIDTH_HZ,
                DEFAULT_NOISE_FIGURE_DB,
            ),
        }
    }
}

/// Six resource blocks, the smallest LTE measurement bandwidth.
pub const DEFAULT_NOISE_BANDWIDTH_HZ: f64 = 1.08e6;
pub const DEFAULT_NOISE_FIGURE_DB: f64 = 7.0;

/// Parabolic main lobe with a front-to-side floor, mirrored about the
/// abeam direction for the two opposite beams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaPattern {
    pub beamwidth_3db: f64,
    pub side_floor_db: f64,
}

impl Default for AntennaPattern {
    fn default() -> Self {
        Self {
            beamwidth_3db: 30.0_f64.to_radians(),
            side_floor_db: 25.0,
        }
    }
}

pub fn path_loss_db(
    profile: &EnvironmentProfile,
    distance: f64,
    propagation: Propagation,
) -> Result<f64> {
    if !(distance >= 1.0) {
        return Err(Error::Domain("path loss needs distance >= 1 m"));
    }
    Ok(
        profile.pathloss_intercept_db
            + 10.0 * profile.exponent(propagation) * libm::log10(distance),
    )
}

pub fn antenna_gain_db(site: &RrhSite, pattern: &AntennaPattern, bearing: f64) -> f64 {
    let theta = bearing.clamp(0.0, PI);
    let off_axis = theta.min(PI - theta);
    let ratio = off_axis / pattern.beamwidth_3db;
    site.max_gain_db - (12.0 * ratio * ratio).min(pattern.side_floor_db)
}

pub fn draw_propagation<R: Rng + ?Sized>(
    profile: &EnvironmentProfile,
    distance: f64,
    rng: &mut R,
) -> Propagation {
    match profile.los_model {
        LosModel::Always => Propagation::Los,
        LosModel::Never => Propagation::Nlos,
        model => {
            if rng.random::<f64>() < model.probability(distance) {
                Propagation::Los
            } else {
                Propagation::Nlos
            }
        }
    }
}

/// Unit-mean `|h|²` for the given propagation state.
pub fn fading_power_gain<R: Rng + ?Sized>(
    profile: &EnvironmentProfile,
    propagation: Propagation,
    rng: &mut R,
) -> f64 {
    let k = match propagation {
        Propagation::Los => db_to_linear(profile.los_rician_k_db),
        Propagation::Nlos => 0.0,
    };
    if k.is_infinite() {
        return 1.0;
    }
    let los = libm::sqrt(k / (k + 1.0));
    let scatter = libm::sqrt(1.0 / (2.0 * (k + 1.0)));
    let re = los + scatter * rng.sample::<f64, _>(StandardNormal);
    let im = scatter * rng.sample::<f64, _>(StandardNormal);
    re * re + im * im
}

/// `|h|²` with the LOS state drawn from the profile's LOS model.
pub fn small_scale_power_gain<R: Rng + ?Sized>(
    profile: &EnvironmentProfile,
    distance: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(distance >= 1.0) {
        return Err(Error::Domain("fading needs distance >= 1 m"));
    }
    let propagation = draw_propagation(profile, distance, rng);
    Ok(fading_power_gain(profile, propagation, rng))
}

/// Per-link random state: shadowing AR(1) memory plus the link's RNG stream.
#[derive(Debug, Clone)]
pub struct FadingState {
    last: Option<(f64, f64)>,
    rng: ChaCha8Rng,
}

impl FadingState {
    pub fn new(rng: ChaCha8Rng) -> Self {
        Self { last: None, rng }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Advance the shadowing process to `pos`:
/// `ρ·prev + sqrt(1-ρ²)·σ·N(0,1)` with `ρ = exp(-Δ/d_corr)`.
pub fn shadowing_db(
    state: &mut FadingState,
    profile: &EnvironmentProfile,
    pos: f64,
) -> Result<f64> {
    let sigma = profile.shadow_sigma_db;
    let value = match state.last {
        None => sigma * state.rng.sample::<f64, _>(StandardNormal),
        Some((last_pos, last_value)) => {
            let delta = pos - last_pos;
            if delta < 0.0 {
                return Err(Error::Precondition("shadowing positions must not decrease"));
            }
            if delta == 0.0 {
                return Ok(last_value);
            }
            let rho = libm::exp(-delta / profile.shadow_decorrelation_m);
            let innovation = sigma * state.rng.sample::<f64, _>(StandardNormal);
            rho * last_value + libm::sqrt(1.0 - rho * rho) * innovation
        }
    };
    state.last = Some((pos, value));
    Ok(value)
}

/// Every random and deterministic term of one link at one position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub propagation: Propagation,
    pub path_loss_db: f64,
    pub antenna_gain_db: f64,
    pub shadowing_db: f64,
    pub fading_gain: f64,
}

impl LinkSample {
    /// Received power for a transmitter of `tx_power_dbm` through this link.
    pub fn rx_power_dbm(&self, tx_power_dbm: f64, penetration_loss_db: f64) -> f64 {
        tx_power_dbm + self.antenna_gain_db - self.path_loss_db - penetration_loss_db
            + self.shadowing_db
            + linear_to_db(self.fading_gain)
    }
}

/// Downlink and uplink power of one link; both directions share the
/// propagation draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPower {
    pub sample: LinkSample,
    pub downlink_dbm: f64,
    pub uplink_dbm: f64,
}

pub fn sample_link(
    site: &RrhSite,
    pattern: &AntennaPattern,
    profile: &EnvironmentProfile,
    pos: f64,
    state: &mut FadingState,
) -> Result<LinkSample> {
    let geo = link_geometry(site, pos);
    let propagation = draw_propagation(profile, geo.distance_3d, &mut state.rng);
    let path_loss_db = path_loss_db(profile, geo.distance_3d, propagation)?;
    let shadowing_db = shadowing_db(state, profile, pos)?;
    let fading_gain = fading_power_gain(profile, propagation, &mut state.rng);
    Ok(LinkSample {
        propagation,
        path_loss_db,
        antenna_gain_db: antenna_gain_db(site, pattern, geo.bearing),
        shadowing_db,
        fading_gain,
    })
}

pub fn mean_rx_power_dbm(
    budget: &LinkBudget,
    site: &RrhSite,
    pattern: &AntennaPattern,
    profile: &EnvironmentProfile,
    pos: f64,
    state: &mut FadingState,
) -> Result<LinkPower> {
    let sample = sample_link(site, pattern, profile, pos, state)?;
    Ok(LinkPower {
        sample,
        downlink_dbm: sample.rx_power_dbm(budget.rrh_tx_power_dbm, budget.penetration_loss_db),
        uplink_dbm: sample.rx_power_dbm(budget.ue_tx_power_dbm, budget.penetration_loss_db),
    })
}
