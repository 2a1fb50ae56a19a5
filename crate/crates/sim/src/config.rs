//! JSON configuration file.
//!
//! Every key is optional; anything left out keeps the library default. The
//! file is layered onto [`RunConfig::default`] and the result validated, so
//! unknown keys and out-of-range values are both configuration errors.

use std::path::Path;

use hsr_handover::channel::{AntennaPattern, EnvironmentProfile, LinkBudget, LosModel};
use hsr_handover::geometry::{kmh_to_mps, DeploymentLayout, EnvironmentId};
use hsr_handover::harness::RunConfig;
use hsr_handover::measurement::L3Config;
use serde::Deserialize;

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub layout: LayoutSection,
    #[serde(default)]
    pub kinematics: KinematicsSection,
    #[serde(default)]
    pub profiles: ProfilesSection,
    #[serde(default)]
    pub budget: BudgetSection,
    #[serde(default)]
    pub ici: IciSection,
    #[serde(default)]
    pub l1: L1Section,
    #[serde(default)]
    pub l3: L3Section,
    #[serde(default)]
    pub handover: HandoverSection,
    pub runs: Option<u32>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSection {
    pub rrh_spacing_m: Option<f64>,
    /// Environment of each inter-RRH span, in track order.
    pub spans: Option<Vec<EnvironmentName>>,
    pub lateral_offset_m: Option<f64>,
    pub height_m: Option<f64>,
    pub max_gain_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvironmentName {
    Viaduct,
    Cutting,
    Urban,
}

impl From<EnvironmentName> for EnvironmentId {
    fn from(name: EnvironmentName) -> Self {
        match name {
            EnvironmentName::Viaduct => EnvironmentId::Viaduct,
            EnvironmentName::Cutting => EnvironmentId::Cutting,
            EnvironmentName::Urban => EnvironmentId::Urban,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinematicsSection {
    pub speed_kmh: Option<f64>,
    pub speed_mps: Option<f64>,
    pub snapshot_interval_m: Option<f64>,
    pub start_position_m: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilesSection {
    pub viaduct: Option<ProfileSection>,
    pub cutting: Option<ProfileSection>,
    pub urban: Option<ProfileSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub los_exponent: Option<f64>,
    pub nlos_exponent: Option<f64>,
    pub pathloss_intercept_db: Option<f64>,
    pub los_rician_k_db: Option<f64>,
    pub los_model: Option<LosModelSection>,
    pub shadow_sigma_db: Option<f64>,
    pub shadow_decorrelation_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LosModelSection {
    Always,
    Never,
    Exponential { scale_m: f64 },
}

impl From<LosModelSection> for LosModel {
    fn from(m: LosModelSection) -> Self {
        match m {
            LosModelSection::Always => LosModel::Always,
            LosModelSection::Never => LosModel::Never,
            LosModelSection::Exponential { scale_m } => LosModel::Exponential { scale_m },
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub rrh_tx_power_dbm: Option<f64>,
    pub ue_tx_power_dbm: Option<f64>,
    pub penetration_loss_db: Option<f64>,
    /// Explicit noise power; excludes the bandwidth/figure pair.
    pub noise_power_dbm: Option<f64>,
    pub noise_bandwidth_hz: Option<f64>,
    pub noise_figure_db: Option<f64>,
    pub antenna_beamwidth_deg: Option<f64>,
    pub antenna_side_floor_db: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IciSection {
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub symbol_duration_s: Option<f64>,
    pub carrier_frequency_hz: Option<f64>,
    pub bandwidth_hz: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct L1Section {
    pub sample_period_ms: Option<f64>,
    pub window_ms: Option<f64>,
    pub noise_sigma_db: Option<f64>,
    pub noise_cutoff: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct L3Section {
    pub filter_coefficient_a: Option<f64>,
    /// `a = 1/2^(k/4)`; excludes `filter_coefficient_a`.
    pub filter_k: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandoverSection {
    pub offset_db: Option<f64>,
    pub ttt_ms: Option<f64>,
    pub snr_gate_db: Option<f64>,
    pub preparation_delay_ms: Option<f64>,
    pub command_delay_ms: Option<f64>,
    pub sib_rach_delay_ms: Option<f64>,
    pub reestablishment_delay_ms: Option<f64>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn ms(value: Option<f64>) -> Option<f64> {
    value.map(|v| v / 1000.0)
}

impl ProfileSection {
    fn apply(&self, p: &mut EnvironmentProfile) {
        set(&mut p.los_exponent, self.los_exponent);
        set(&mut p.nlos_exponent, self.nlos_exponent);
        set(&mut p.pathloss_intercept_db, self.pathloss_intercept_db);
        set(&mut p.los_rician_k_db, self.los_rician_k_db);
        set(&mut p.los_model, self.los_model.map(Into::into));
        set(&mut p.shadow_sigma_db, self.shadow_sigma_db);
        set(&mut p.shadow_decorrelation_m, self.shadow_decorrelation_m);
    }
}

impl ConfigFile {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_json(&text).map_err(|source| SimError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Layer the file onto the defaults and validate the result.
    pub fn to_run_config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();

        let l = &self.layout;
        if l.rrh_spacing_m.is_some() || l.spans.is_some() {
            let spans: Vec<EnvironmentId> = match &l.spans {
                Some(s) => s.iter().map(|&e| e.into()).collect(),
                None => cfg.layout.segments.iter().map(|s| s.environment).collect(),
            };
            if spans.is_empty() {
                return Err(SimError::config("layout.spans must not be empty"));
            }
            let spacing = l.rrh_spacing_m.unwrap_or(cfg.layout.rrh_spacing);
            cfg.layout = DeploymentLayout::with_spans(&spans, spacing);
        }
        for site in &mut cfg.layout.rrhs {
            set(&mut site.lateral_offset, l.lateral_offset_m);
            set(&mut site.height, l.height_m);
            set(&mut site.max_gain_db, l.max_gain_db);
        }

        let k = &self.kinematics;
        match (k.speed_kmh, k.speed_mps) {
            (Some(_), Some(_)) => {
                return Err(SimError::config(
                    "kinematics: give speed_kmh or speed_mps, not both",
                ))
            }
            (Some(kmh), None) => cfg.kinematics.speed = kmh_to_mps(kmh),
            (None, Some(mps)) => cfg.kinematics.speed = mps,
            (None, None) => {}
        }
        set(&mut cfg.kinematics.snapshot_interval, k.snapshot_interval_m);
        set(&mut cfg.kinematics.start_position, k.start_position_m);

        let p = &self.profiles;
        for (section, profile) in [
            (&p.viaduct, &mut cfg.profiles.viaduct),
            (&p.cutting, &mut cfg.profiles.cutting),
            (&p.urban, &mut cfg.profiles.urban),
        ] {
            if let Some(section) = section {
                section.apply(profile);
            }
        }

        let b = &self.budget;
        set(&mut cfg.budget.rrh_tx_power_dbm, b.rrh_tx_power_dbm);
        set(&mut cfg.budget.ue_tx_power_dbm, b.ue_tx_power_dbm);
        set(&mut cfg.budget.penetration_loss_db, b.penetration_loss_db);
        if b.noise_bandwidth_hz.is_some() || b.noise_figure_db.is_some() {
            if b.noise_power_dbm.is_some() {
                return Err(SimError::config(
                    "budget: noise_power_dbm excludes noise_bandwidth_hz/noise_figure_db",
                ));
            }
            let bw = b
                .noise_bandwidth_hz
                .unwrap_or(hsr_handover::channel::DEFAULT_NOISE_BANDWIDTH_HZ);
            if bw.is_nan() || bw <= 0.0 {
                return Err(SimError::config("budget.noise_bandwidth_hz must be > 0"));
            }
            let nf = b
                .noise_figure_db
                .unwrap_or(hsr_handover::channel::DEFAULT_NOISE_FIGURE_DB);
            cfg.budget.noise_power_dbm = LinkBudget::noise_floor_dbm(bw, nf);
        }
        set(&mut cfg.budget.noise_power_dbm, b.noise_power_dbm);
        let default_antenna = AntennaPattern::default();
        cfg.antenna.beamwidth_3db = b
            .antenna_beamwidth_deg
            .map_or(default_antenna.beamwidth_3db, f64::to_radians);
        set(&mut cfg.antenna.side_floor_db, b.antenna_side_floor_db);

        let i = &self.ici;
        set(&mut cfg.ici.alpha1, i.alpha1);
        set(&mut cfg.ici.alpha2, i.alpha2);
        set(&mut cfg.ici.symbol_duration, i.symbol_duration_s);
        set(&mut cfg.ici.carrier_frequency, i.carrier_frequency_hz);
        set(&mut cfg.ici.bandwidth, i.bandwidth_hz);

        let m = &self.l1;
        set(&mut cfg.l1.sample_period, ms(m.sample_period_ms));
        set(&mut cfg.l1.window, ms(m.window_ms));
        set(&mut cfg.l1.meas_noise_sigma_db, m.noise_sigma_db);
        set(&mut cfg.l1.noise_cutoff, m.noise_cutoff);

        match (self.l3.filter_coefficient_a, self.l3.filter_k) {
            (Some(_), Some(_)) => {
                return Err(SimError::config(
                    "l3: give filter_coefficient_a or filter_k, not both",
                ))
            }
            (Some(a), None) => cfg.l3.filter_coefficient_a = a,
            (None, Some(k)) => cfg.l3 = L3Config::from_filter_k(k),
            (None, None) => {}
        }

        let h = &self.handover;
        set(&mut cfg.handover.hysteresis_h0, h.offset_db);
        set(&mut cfg.handover.ttt, ms(h.ttt_ms));
        set(&mut cfg.handover.snr_gate_db, h.snr_gate_db);
        set(
            &mut cfg.handover.preparation_delay,
            ms(h.preparation_delay_ms),
        );
        set(&mut cfg.handover.command_delay, ms(h.command_delay_ms));
        set(&mut cfg.handover.sib_rach_delay, ms(h.sib_rach_delay_ms));
        set(
            &mut cfg.handover.reestablishment_delay,
            ms(h.reestablishment_delay_ms),
        );

        set(&mut cfg.runs, self.runs);
        set(&mut cfg.master_seed, self.seed);

        cfg.validate()?;
        Ok(cfg)
    }
}

/// Load `path`, or the defaults when no file is given.
pub fn load_run_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => ConfigFile::load(p)?.to_run_config(),
        None => Ok(RunConfig::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = ConfigFile::from_json("{}")
            .unwrap()
            .to_run_config()
            .unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn shipped_example_spells_out_the_defaults() {
        let text = include_str!("../../../configs/example.json");
        let cfg = ConfigFile::from_json(text).unwrap().to_run_config().unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn fields_override_defaults() {
        let text = r#"{
            "layout": {"spans": ["urban", "urban"], "rrh_spacing_m": 1000},
            "kinematics": {"speed_kmh": 100},
            "profiles": {"cutting": {"los_model": {"kind": "exponential", "scale_m": 50}}},
            "budget": {"noise_power_dbm": -100},
            "l1": {"noise_sigma_db": 0},
            "l3": {"filter_k": 0},
            "handover": {"offset_db": 4, "ttt_ms": 80},
            "runs": 7,
            "seed": 42
        }"#;
        let cfg = ConfigFile::from_json(text)
            .unwrap()
            .to_run_config()
            .unwrap();
        assert_eq!(cfg.layout.rrhs.len(), 3);
        assert_eq!(cfg.layout.track_length, 2000.0);
        assert_eq!(cfg.label().environment, "urban");
        assert!((cfg.kinematics.speed - 100.0 / 3.6).abs() < 1e-12);
        assert_eq!(
            cfg.profiles.cutting.los_model,
            LosModel::Exponential { scale_m: 50.0 }
        );
        assert_eq!(cfg.budget.noise_power_dbm, -100.0);
        assert_eq!(cfg.l1.meas_noise_sigma_db, 0.0);
        assert_eq!(cfg.l3.filter_coefficient_a, 1.0);
        assert_eq!(cfg.handover.hysteresis_h0, 4.0);
        assert!((cfg.handover.ttt - 0.08).abs() < 1e-15);
        assert_eq!((cfg.runs, cfg.master_seed), (7, 42));
    }

    #[test]
    fn bad_documents_are_config_errors() {
        for text in [
            r#"{"runs": 0}"#,
            r#"{"kinematics": {"speed_kmh": -5}}"#,
            r#"{"kinematics": {"speed_kmh": 5, "speed_mps": 5}}"#,
            r#"{"handover": {"ttt_ms": 50}}"#,
            r#"{"l3": {"filter_coefficient_a": 0.5, "filter_k": 4}}"#,
            r#"{"layout": {"spans": []}}"#,
        ] {
            let err = ConfigFile::from_json(text)
                .unwrap()
                .to_run_config()
                .unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}: {err}");
        }
        assert!(ConfigFile::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(ConfigFile::from_json(r#"{"layout": {"spans": ["tunnel"]}}"#).is_err());
    }
}
