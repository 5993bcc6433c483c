//! Analytic protocol-selection thresholds and the regime classifier.
//!
//! For a fixed device order, the hybrid protocol collapses to single-slot
//! (all-simultaneous) transmission when later devices' targets are small
//! enough (power regime) or their energy budgets large enough (energy
//! regime), and to one-device-per-slot transmission when energy budgets are
//! small enough. The boundaries have closed forms evaluated at the beams the
//! collapsing protocol would use, and the solver driver consults them before
//! running the full alternating optimization.

use crate::error::{Error, Result};
use crate::system::{snr_gain, BeamVector, Budget, ChannelRealization, SystemConfig};
use crate::tdma::{energy_limited_duration, TdmaSolution};

/// Which protocol the optimum collapses to, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    PureNoma,
    PureTdma,
    Hybrid,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::PureNoma => "pure-noma",
            Regime::PureTdma => "pure-tdma",
            Regime::Hybrid => "hybrid",
        };
        f.write_str(s)
    }
}

/// One threshold comparison for a device at order position > 0.
#[derive(Debug, Clone)]
pub struct ThresholdComparison {
    /// Order position (0-based, always >= 1).
    pub position: usize,
    /// Original device index.
    pub device: usize,
    /// Device's own value: target bits (power regime) or energy J.
    pub own: f64,
    /// Single-slot collapse threshold: target bits or energy J.
    pub noma_threshold: f64,
    /// Per-slot collapse threshold, energy regime only.
    pub tdma_threshold: Option<f64>,
}

/// Classifier output: the regime and the comparisons that decided it.
#[derive(Debug, Clone)]
pub struct RegimeReport {
    pub regime: Regime,
    pub comparisons: Vec<ThresholdComparison>,
}

fn order_gains(
    config: &SystemConfig,
    channels: &ChannelRealization,
    order: &[usize],
    beam: &BeamVector,
) -> Result<Vec<f64>> {
    order
        .iter()
        .map(|k| snr_gain(&channels.composite[*k], beam, config.noise_power))
        .collect()
}

/// Largest target (bits) device at order position `position` can finish
/// within the first slot when every device transmits at peak power under
/// beam `v1`. Above it the hybrid optimum beats single-slot transmission.
pub fn noma_throughput_threshold(
    config: &SystemConfig,
    channels: &ChannelRealization,
    order: &[usize],
    v1: &BeamVector,
    position: usize,
) -> Result<f64> {
    let Budget::Power(p_max) = &config.budget else {
        return Err(Error::InvalidConfig(
            "throughput threshold applies to the power regime".into(),
        ));
    };
    if position == 0 {
        return Err(Error::InvalidConfig(
            "threshold is defined for order positions after the first".into(),
        ));
    }
    let gains = order_gains(config, channels, order, v1)?;
    let mut interference = 0.0;
    for q in 0..position {
        interference += p_max[order[q]] * gains[q];
    }
    let own = p_max[order[position]] * gains[position];
    let first = order[0];
    let first_rate = (1.0 + p_max[first] * gains[0]).log2();
    Ok((1.0 + own / (1.0 + interference)).log2() * config.targets_bits[first] / first_rate)
}

/// Smallest energy (J) with which device at order position `position` can
/// meet its target inside the first device's single-slot duration; above it
/// single-slot transmission is optimal for that device.
pub fn noma_energy_threshold(
    config: &SystemConfig,
    channels: &ChannelRealization,
    order: &[usize],
    v1: &BeamVector,
    position: usize,
) -> Result<f64> {
    let Budget::Energy(energies) = &config.budget else {
        return Err(Error::InvalidConfig(
            "energy threshold applies to the energy regime".into(),
        ));
    };
    if position == 0 {
        return Err(Error::InvalidConfig(
            "threshold is defined for order positions after the first".into(),
        ));
    }
    let gains = order_gains(config, channels, order, v1)?;
    let first = order[0];
    let slot = energy_limited_duration(
        config.normalized_target(first),
        energies[first],
        gains[0],
        first,
    )?;
    let own_target = config.normalized_target(order[position]);
    let prior_targets: f64 = (0..position)
        .map(|q| config.normalized_target(order[q]))
        .sum();
    Ok(slot / gains[position] * ((own_target / slot).exp2() - 1.0) * (prior_targets / slot).exp2())
}

/// Energy (J) below which device at order position `position` is better off
/// saving everything for its own slot. Uses the most favorable earlier slot
/// per the dual-variable comparison.
pub fn tdma_energy_threshold(
    config: &SystemConfig,
    channels: &ChannelRealization,
    order: &[usize],
    tdma: &TdmaSolution,
    position: usize,
) -> Result<f64> {
    if config.budget.is_power() {
        return Err(Error::InvalidConfig(
            "per-slot threshold applies to the energy regime".into(),
        ));
    }
    if position == 0 {
        return Err(Error::InvalidConfig(
            "threshold is defined for order positions after the first".into(),
        ));
    }
    let device = order[position];
    // pick the earlier slot i minimizing (1 + p_i gamma_i(v_i)) / gamma_k(v_i)
    let mut best = (f64::INFINITY, 0usize);
    for q in 0..position {
        let d_q = order[q];
        let own = 1.0 + tdma.powers[d_q] * tdma.gains[d_q];
        let cross = snr_gain(&channels.composite[device], &tdma.beams[d_q], config.noise_power)?;
        let ratio = own / cross;
        if ratio < best.0 {
            best = (ratio, q);
        }
    }
    let i = best.1;
    let d_i = order[i];
    let g_i = tdma.durations[d_i];
    let l_i = config.normalized_target(d_i);
    let l_k = config.normalized_target(device);
    let gamma_k_vi = snr_gain(&channels.composite[device], &tdma.beams[d_i], config.noise_power)?;
    let gamma_k_vk = tdma.gains[device];
    let numerator = l_k * ((l_i / g_i).exp2() / gamma_k_vi - 1.0 / gamma_k_vk);
    let denominator = (gamma_k_vk / gamma_k_vi).log2() + l_i / g_i;
    Ok(numerator / denominator)
}

/// Classify whether the hybrid optimum collapses, given the beams the
/// collapsing protocols would use. `noma_v1` is the optimized single-slot
/// beam when the single-slot problem is feasible.
pub fn classify_regime(
    config: &SystemConfig,
    channels: &ChannelRealization,
    order: &[usize],
    noma_v1: Option<&BeamVector>,
    tdma: &TdmaSolution,
) -> Result<RegimeReport> {
    let k_count = config.device_count();
    if k_count == 1 {
        // single device: every protocol is the same single slot
        return Ok(RegimeReport {
            regime: Regime::PureTdma,
            comparisons: Vec::new(),
        });
    }
    let mut comparisons = Vec::with_capacity(k_count - 1);
    match &config.budget {
        Budget::Power(_) => {
            let mut all_noma = noma_v1.is_some();
            for position in 1..k_count {
                let device = order[position];
                let threshold = match noma_v1 {
                    Some(v1) => {
                        noma_throughput_threshold(config, channels, order, v1, position)?
                    }
                    None => 0.0,
                };
                let own = config.targets_bits[device];
                if own > threshold {
                    all_noma = false;
                }
                comparisons.push(ThresholdComparison {
                    position,
                    device,
                    own,
                    noma_threshold: threshold,
                    tdma_threshold: None,
                });
            }
            Ok(RegimeReport {
                regime: if all_noma {
                    Regime::PureNoma
                } else {
                    Regime::Hybrid
                },
                comparisons,
            })
        }
        Budget::Energy(energies) => {
            let mut all_noma = noma_v1.is_some();
            let mut all_tdma = true;
            for position in 1..k_count {
                let device = order[position];
                let e_no = match noma_v1 {
                    Some(v1) => noma_energy_threshold(config, channels, order, v1, position)?,
                    None => f64::INFINITY,
                };
                let e_td = tdma_energy_threshold(config, channels, order, tdma, position)?;
                let own = energies[device];
                if own < e_no {
                    all_noma = false;
                }
                if own > e_td {
                    all_tdma = false;
                }
                comparisons.push(ThresholdComparison {
                    position,
                    device,
                    own,
                    noma_threshold: e_no,
                    tdma_threshold: Some(e_td),
                });
            }
            let regime = if all_noma {
                Regime::PureNoma
            } else if all_tdma {
                Regime::PureTdma
            } else {
                Regime::Hybrid
            };
            Ok(RegimeReport { regime, comparisons })
        }
    }
}
