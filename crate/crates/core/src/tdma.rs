//! Closed-form one-device-per-slot solutions for both budget regimes.
//!
//! Under this protocol each device transmits alone with its own aligned
//! beam, so the per-device optimum decouples: maximum power in the power
//! regime, and a Lambert-W expression for the duration in the energy regime.
//! These solutions seed the ordering rule and warm-start the hybrid solver.

use crate::error::{Error, Result};
use crate::numerics::lambert_w_m1;
use crate::system::{aligned_beam, snr_gain, BeamVector, Budget, ChannelRealization, SystemConfig};

const LN_2: f64 = std::f64::consts::LN_2;

/// Per-device solution, indexed by original device index.
#[derive(Debug, Clone)]
pub struct TdmaSolution {
    /// Aligned beam per device.
    pub beams: Vec<BeamVector>,
    /// Slot duration per device, seconds.
    pub durations: Vec<f64>,
    /// Transmit power per device, watts.
    pub powers: Vec<f64>,
    /// SNR gain per device under its own beam, 1/W.
    pub gains: Vec<f64>,
    pub sum_delay: f64,
}

impl TdmaSolution {
    /// Completion time of each order position under a given order.
    pub fn completion_times(&self, order: &[usize]) -> Vec<f64> {
        let mut acc = 0.0;
        order
            .iter()
            .map(|k| {
                acc += self.durations[*k];
                acc
            })
            .collect()
    }
}

/// Duration solving `tau * log2(1 + (energy/tau) * gain) = target` via the
/// lower Lambert-W branch. Errors when the target is unreachable at any
/// duration, i.e. when `energy * gain <= target * ln 2`.
pub fn energy_limited_duration(
    target_bits_hz: f64,
    energy: f64,
    gain: f64,
    device: usize,
) -> Result<f64> {
    if target_bits_hz == 0.0 {
        return Ok(0.0);
    }
    let budget = energy * gain;
    let need = target_bits_hz * LN_2;
    let xi = -need / budget;
    if xi <= -1.0 {
        return Err(Error::InfeasibleEnergy {
            device,
            energy,
            required: need / gain,
        });
    }
    let w = lambert_w_m1(xi * xi.exp())?;
    Ok(-budget * need / (budget * w + need))
}

/// Power-limited optimum: transmit at peak power for the interference-free
/// duration that exactly meets the target.
pub fn tdma_power_limited(
    config: &SystemConfig,
    channels: &ChannelRealization,
) -> Result<TdmaSolution> {
    config.validate()?;
    let Budget::Power(p_max) = &config.budget else {
        return Err(Error::InvalidConfig(
            "tdma_power_limited requires the power regime".into(),
        ));
    };
    let k_count = config.device_count();
    let mut beams = Vec::with_capacity(k_count);
    let mut durations = Vec::with_capacity(k_count);
    let mut gains = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let v = aligned_beam(&channels.composite[k]);
        let gain = snr_gain(&channels.composite[k], &v, config.noise_power)?;
        let tau = config.normalized_target(k) / (1.0 + p_max[k] * gain).log2();
        beams.push(v);
        gains.push(gain);
        durations.push(tau);
    }
    let sum_delay = durations.iter().sum();
    Ok(TdmaSolution {
        beams,
        durations,
        powers: p_max.clone(),
        gains,
        sum_delay,
    })
}

/// Energy-limited optimum: each device spends its whole budget over the
/// Lambert-W duration.
pub fn tdma_energy_limited(
    config: &SystemConfig,
    channels: &ChannelRealization,
) -> Result<TdmaSolution> {
    config.validate()?;
    let Budget::Energy(energies) = &config.budget else {
        return Err(Error::InvalidConfig(
            "tdma_energy_limited requires the energy regime".into(),
        ));
    };
    let k_count = config.device_count();
    let mut beams = Vec::with_capacity(k_count);
    let mut durations = Vec::with_capacity(k_count);
    let mut powers = Vec::with_capacity(k_count);
    let mut gains = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let v = aligned_beam(&channels.composite[k]);
        let gain = snr_gain(&channels.composite[k], &v, config.noise_power)?;
        let tau = energy_limited_duration(config.normalized_target(k), energies[k], gain, k)?;
        powers.push(energies[k] / tau);
        beams.push(v);
        gains.push(gain);
        durations.push(tau);
    }
    let sum_delay = durations.iter().sum();
    Ok(TdmaSolution {
        beams,
        durations,
        powers,
        gains,
        sum_delay,
    })
}

/// Energy needed by device `k` in the infinite-duration limit; the strict
/// lower bound of feasible budgets.
pub fn minimum_required_energy(
    config: &SystemConfig,
    channels: &ChannelRealization,
    k: usize,
) -> Result<f64> {
    let v = aligned_beam(&channels.composite[k]);
    let gain = snr_gain(&channels.composite[k], &v, config.noise_power)?;
    Ok(config.normalized_target(k) * LN_2 / gain)
}
