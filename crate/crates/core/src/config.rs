//! Structured text configuration: a `[system]` section, one `[[device]]`
//! section per device, and an optional `[scenario]` section for the runner.
//!
//! Units in files are field-level conventions: dBm for powers and noise,
//! joules for energy, Kbits for throughput targets, kHz for bandwidth,
//! meters for positions, dB for the reference path gain. Everything is
//! converted to linear SI units at parse time.

use serde::Deserialize;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{BaselineSpec, Scenario, SweepVariable};
use crate::system::{Budget, SystemConfig};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    system: RawSystem,
    device: Vec<RawDevice>,
    scenario: Option<RawScenario>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    bandwidth_khz: f64,
    noise_dbm: f64,
    irs_elements: usize,
    #[serde(default = "default_ref_gain_db")]
    ref_gain_db: f64,
    alpha_direct: f64,
    alpha_cascaded: f64,
    bs_pos: [f64; 3],
    irs_pos: [f64; 3],
    #[serde(default)]
    seed: u64,
}

fn default_ref_gain_db() -> f64 {
    -30.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    pos: [f64; 3],
    target_kbits: f64,
    power_dbm: Option<f64>,
    energy_j: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    comment: String,
    /// One of: target_kbits, energy_j, alpha_cascaded, irs_elements,
    /// device_count. Omit for a single-point run.
    sweep: Option<String>,
    /// 1-based device index for target/energy sweeps (default 2).
    sweep_device: Option<usize>,
    #[serde(default)]
    values: Vec<f64>,
    #[serde(default = "default_draws")]
    draws: usize,
    baselines: Vec<String>,
}

fn default_draws() -> usize {
    50
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn system_from_raw(raw: &RawFile) -> Result<SystemConfig> {
    if raw.device.is_empty() {
        return Err(Error::InvalidConfig("no [[device]] sections".into()));
    }
    let powered = raw.device.iter().filter(|d| d.power_dbm.is_some()).count();
    let energized = raw.device.iter().filter(|d| d.energy_j.is_some()).count();
    let budget = if powered == raw.device.len() && energized == 0 {
        Budget::Power(
            raw.device
                .iter()
                .map(|d| dbm_to_watts(d.power_dbm.unwrap()))
                .collect(),
        )
    } else if energized == raw.device.len() && powered == 0 {
        Budget::Energy(raw.device.iter().map(|d| d.energy_j.unwrap()).collect())
    } else {
        return Err(Error::InvalidConfig(
            "every device needs power_dbm, or every device needs energy_j".into(),
        ));
    };
    let cfg = SystemConfig {
        bandwidth_hz: raw.system.bandwidth_khz * 1e3,
        noise_power: dbm_to_watts(raw.system.noise_dbm),
        irs_elements: raw.system.irs_elements,
        ref_gain: db_to_linear(raw.system.ref_gain_db),
        alpha_direct: raw.system.alpha_direct,
        alpha_cascaded: raw.system.alpha_cascaded,
        bs_pos: raw.system.bs_pos,
        irs_pos: raw.system.irs_pos,
        device_pos: raw.device.iter().map(|d| d.pos).collect(),
        budget,
        targets_bits: raw.device.iter().map(|d| d.target_kbits * 1e3).collect(),
        rng_seed: raw.system.seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn scenario_from_raw(raw: RawFile) -> Result<Scenario> {
    let template = system_from_raw(&raw)?;
    let Some(s) = raw.scenario else {
        return Err(Error::InvalidConfig("missing [scenario] section".into()));
    };
    let device = s.sweep_device.unwrap_or(2);
    if device == 0 {
        return Err(Error::InvalidConfig("sweep_device is 1-based".into()));
    }
    let (sweep, values) = match s.sweep.as_deref() {
        None | Some("none") => (SweepVariable::None, Vec::new()),
        Some("target_kbits") => (
            SweepVariable::TargetBits { device: device - 1 },
            s.values.iter().map(|v| v * 1e3).collect(),
        ),
        Some("energy_j") => (
            SweepVariable::EnergyJoules { device: device - 1 },
            s.values.clone(),
        ),
        Some("alpha_cascaded") => (SweepVariable::AlphaCascaded, s.values.clone()),
        Some("irs_elements") => (SweepVariable::IrsElements, s.values.clone()),
        Some("device_count") => (SweepVariable::DeviceCount, s.values.clone()),
        Some(other) => {
            return Err(Error::InvalidConfig(format!(
                "unknown sweep variable '{other}'"
            )))
        }
    };
    let baselines = s
        .baselines
        .iter()
        .map(|b| BaselineSpec::parse(b))
        .collect::<Result<Vec<_>>>()?;
    let scenario = Scenario {
        name: s.name,
        comment: s.comment,
        seed_base: template.rng_seed,
        template,
        sweep,
        values,
        draws: s.draws,
        baselines,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn parse_raw(text: &str) -> Result<RawFile> {
    toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
}

/// Parse a system instance (the `[scenario]` section, if any, is ignored).
pub fn parse_system(text: &str) -> Result<SystemConfig> {
    system_from_raw(&parse_raw(text)?)
}

/// Parse a full scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    scenario_from_raw(parse_raw(text)?)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_system(path: &Path) -> Result<SystemConfig> {
    parse_system(&read(path)?)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    parse_scenario(&read(path)?)
}
