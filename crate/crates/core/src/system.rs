//! System model: geometry, fading channels, composite channels, beams, and
//! per-slot achievable rates.
//!
//! All quantities are linear (watts, hertz, meters); unit conversions happen
//! at config parse time. Device `k`'s composite channel `b_k` stacks the
//! per-element cascaded coefficients with the direct coefficient in the last
//! entry, so that pairing it with a unit-modulus beam vector gives the
//! effective scalar channel seen by the base station.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Per-device transmit budget. Exactly one regime is active for a system.
#[derive(Debug, Clone, PartialEq)]
pub enum Budget {
    /// Peak transmit power per device, watts.
    Power(Vec<f64>),
    /// Initial energy per device, joules.
    Energy(Vec<f64>),
}

impl Budget {
    pub fn len(&self) -> usize {
        match self {
            Budget::Power(v) | Budget::Energy(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_power(&self) -> bool {
        matches!(self, Budget::Power(_))
    }
}

/// Static description of one uplink instance: geometry, budgets, targets.
#[derive(Debug, Clone)]
pub struct SystemConfig {
    /// Transmission bandwidth B in Hz.
    pub bandwidth_hz: f64,
    /// Noise power at the base station, watts.
    pub noise_power: f64,
    /// Number of reflecting elements N.
    pub irs_elements: usize,
    /// Path-loss power gain at 1 m reference distance (linear).
    pub ref_gain: f64,
    /// Path-loss exponent of the direct device-BS links.
    pub alpha_direct: f64,
    /// Path-loss exponent of the device-IRS and IRS-BS links.
    pub alpha_cascaded: f64,
    pub bs_pos: [f64; 3],
    pub irs_pos: [f64; 3],
    pub device_pos: Vec<[f64; 3]>,
    pub budget: Budget,
    /// Throughput targets L_k in bits.
    pub targets_bits: Vec<f64>,
    pub rng_seed: u64,
}

impl SystemConfig {
    pub fn device_count(&self) -> usize {
        self.device_pos.len()
    }

    /// Normalized target in bits/Hz for device `k` (original index).
    pub fn normalized_target(&self, k: usize) -> f64 {
        self.targets_bits[k] / self.bandwidth_hz
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.device_count();
        if k == 0 {
            return Err(Error::InvalidConfig("at least one device required".into()));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::InvalidConfig("bandwidth must be positive".into()));
        }
        if !(self.noise_power > 0.0) {
            return Err(Error::InvalidConfig("noise power must be positive".into()));
        }
        if !(self.ref_gain > 0.0) {
            return Err(Error::InvalidConfig("reference gain must be positive".into()));
        }
        if self.budget.len() != k {
            return Err(Error::InvalidConfig(format!(
                "budget count {} does not match device count {}",
                self.budget.len(),
                k
            )));
        }
        if self.targets_bits.len() != k {
            return Err(Error::InvalidConfig(format!(
                "target count {} does not match device count {}",
                self.targets_bits.len(),
                k
            )));
        }
        if self.targets_bits.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::InvalidConfig("all targets must be positive".into()));
        }
        let budget_ok = match &self.budget {
            Budget::Power(p) => p.iter().all(|v| *v > 0.0),
            Budget::Energy(e) => e.iter().all(|v| *v > 0.0),
        };
        if !budget_ok {
            return Err(Error::InvalidConfig("all budgets must be positive".into()));
        }
        Ok(())
    }

    /// Copy of the config with the IRS removed, for baselines without a
    /// surface. Fading seeds are per-component, so the direct channels of the
    /// stripped instance match the original draw for draw-paired comparisons.
    pub fn without_irs(&self) -> SystemConfig {
        let mut c = self.clone();
        c.irs_elements = 0;
        c
    }
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// One fading draw for a system instance.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// Direct channels h_d, one per device.
    pub direct: Vec<Complex64>,
    /// Device-IRS channels h_r, one length-N vector per device.
    pub irs_device: Vec<Vec<Complex64>>,
    /// IRS-BS channel g, length N.
    pub irs_bs: Vec<Complex64>,
    /// Composite channels b, one length-(N+1) vector per device:
    /// entries 0..N are conj(g_n) * h_{r,n}, entry N is h_d.
    pub composite: Vec<Vec<Complex64>>,
}

impl ChannelRealization {
    pub fn device_count(&self) -> usize {
        self.direct.len()
    }

    pub fn irs_elements(&self) -> usize {
        self.irs_bs.len()
    }
}

/// Unit-modulus IRS beam vector of length N+1; the last entry is pinned to 1
/// and stands for the direct path.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamVector {
    entries: Vec<Complex64>,
}

impl BeamVector {
    /// Build from raw entries, checking the unit-modulus invariant.
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidConfig("beam vector cannot be empty".into()));
        }
        let n = entries.len() - 1;
        for (i, e) in entries.iter().take(n).enumerate() {
            if (e.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "beam entry {i} has modulus {} (must be 1)",
                    e.norm()
                )));
            }
        }
        if entries[n] != Complex64::new(1.0, 0.0) {
            return Err(Error::InvalidConfig(
                "last beam entry must be exactly 1".into(),
            ));
        }
        Ok(Self { entries })
    }

    /// All-ones beam (zero phase shifts) for an IRS with `n` elements.
    pub fn uniform(n: usize) -> Self {
        Self {
            entries: vec![Complex64::new(1.0, 0.0); n + 1],
        }
    }

    /// Beam from explicit element phases (radians); the direct entry is 1.
    pub fn from_phases(phases: &[f64]) -> Self {
        let mut entries: Vec<Complex64> = phases
            .iter()
            .map(|t| Complex64::from_polar(1.0, *t))
            .collect();
        entries.push(Complex64::new(1.0, 0.0));
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Replace element `n` (n < N) with a unit-modulus value.
    pub(crate) fn set_element(&mut self, n: usize, value: Complex64) {
        debug_assert!(n + 1 < self.entries.len());
        debug_assert!((value.norm() - 1.0).abs() < 1e-9);
        self.entries[n] = value;
    }
}

// Distinct sub-streams per channel component; an element's fading draw does
// not depend on N, so a smaller surface sees a prefix of a larger one under
// the same seed.
const STREAM_DIRECT: u64 = 0x68645f6368616e00;
const STREAM_IRS_DEVICE: u64 = 0x68725f6368616e00;
const STREAM_IRS_BS: u64 = 0x675f6368616e0000;

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn mixed(seed: u64, stream: u64, a: u64, b: u64, draw: u64) -> u64 {
    let mut s = splitmix64(seed ^ stream);
    s = splitmix64(s ^ a.wrapping_mul(0xD1342543DE82EF95));
    s = splitmix64(s ^ b.wrapping_mul(0x2545F4914F6CDD1D));
    splitmix64(s ^ draw)
}

fn unit_open(v: u64) -> f64 {
    // uniform in (0, 1]: never 0 so the log below is finite
    ((v >> 11) as f64 + 1.0) * (1.0 / 9007199254740992.0)
}

/// One CN(0,1) sample (unit-variance circularly-symmetric complex Gaussian),
/// fully determined by (seed, stream, indices).
fn standard_complex(seed: u64, stream: u64, a: u64, b: u64) -> Complex64 {
    let u1 = unit_open(mixed(seed, stream, a, b, 0));
    let u2 = unit_open(mixed(seed, stream, a, b, 1));
    let r = (-u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    Complex64::new(r * theta.cos(), r * theta.sin())
}

/// Distance-law amplitude: sqrt(ref_gain * d^(-alpha)).
fn path_amplitude(ref_gain: f64, d: f64, alpha: f64) -> f64 {
    (ref_gain * d.powf(-alpha)).sqrt()
}

/// Draw Rayleigh-faded channels for every link from the config's geometry and
/// seed. Deterministic: the same config yields bit-identical realizations.
pub fn generate_channels(config: &SystemConfig) -> Result<ChannelRealization> {
    config.validate()?;
    let k_count = config.device_count();
    let n = config.irs_elements;
    let seed = config.rng_seed;

    let bs_irs_dist = distance(config.bs_pos, config.irs_pos);
    if n > 0 && bs_irs_dist == 0.0 {
        return Err(Error::InvalidGeometry(
            "BS and IRS positions coincide".into(),
        ));
    }

    let mut direct = Vec::with_capacity(k_count);
    let mut irs_device = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let d_direct = distance(config.bs_pos, config.device_pos[k]);
        if d_direct == 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "device {k} coincides with the BS"
            )));
        }
        let amp_d = path_amplitude(config.ref_gain, d_direct, config.alpha_direct);
        direct.push(amp_d * standard_complex(seed, STREAM_DIRECT, k as u64, 0));

        let mut hr = Vec::with_capacity(n);
        if n > 0 {
            let d_ri = distance(config.irs_pos, config.device_pos[k]);
            if d_ri == 0.0 {
                return Err(Error::InvalidGeometry(format!(
                    "device {k} coincides with the IRS"
                )));
            }
            let amp_r = path_amplitude(config.ref_gain, d_ri, config.alpha_cascaded);
            for e in 0..n {
                hr.push(amp_r * standard_complex(seed, STREAM_IRS_DEVICE, k as u64, e as u64));
            }
        }
        irs_device.push(hr);
    }

    let amp_g = if n > 0 {
        path_amplitude(config.ref_gain, bs_irs_dist, config.alpha_cascaded)
    } else {
        0.0
    };
    let irs_bs: Vec<Complex64> = (0..n)
        .map(|e| amp_g * standard_complex(seed, STREAM_IRS_BS, 0, e as u64))
        .collect();

    let composite = (0..k_count)
        .map(|k| {
            let mut b: Vec<Complex64> = (0..n)
                .map(|e| irs_bs[e].conj() * irs_device[k][e])
                .collect();
            b.push(direct[k]);
            b
        })
        .collect();

    Ok(ChannelRealization {
        direct,
        irs_device,
        irs_bs,
        composite,
    })
}

/// Effective scalar channel `b^H v` of a device under beam `v`.
pub fn effective_channel(b: &[Complex64], v: &BeamVector) -> Result<Complex64> {
    if b.len() != v.len() {
        return Err(Error::LengthMismatch {
            expected: b.len(),
            got: v.len(),
        });
    }
    Ok(b.iter()
        .zip(v.entries())
        .map(|(bi, vi)| bi.conj() * vi)
        .sum())
}

/// SNR gain of a device under beam `v`: |b^H v|^2 / noise (1/W).
pub fn snr_gain(b: &[Complex64], v: &BeamVector, noise_power: f64) -> Result<f64> {
    let e = effective_channel(b, v)?;
    Ok(e.norm_sqr() / noise_power)
}

/// Beam that phase-aligns every reflected path with the direct path, so the
/// effective channel magnitude reaches its maximum sum  |b^H v| = sum |b_n|.
/// Zero entries take phase 0 by convention.
pub fn aligned_beam(b: &[Complex64]) -> BeamVector {
    let n = b.len() - 1;
    let direct_phase = b[n].arg();
    let entries: Vec<Complex64> = b
        .iter()
        .take(n)
        .map(|bn| Complex64::from_polar(1.0, bn.arg() - direct_phase))
        .chain(std::iter::once(Complex64::new(1.0, 0.0)))
        .collect();
    BeamVector { entries }
}

/// Achievable rate of the device in order position `position` during slot
/// `slot` (both 0-based, slot <= position), in bits/s.
///
/// `order[q]` is the original index of the q-th ordered device and
/// `slot_powers[q]` its transmit power in this slot; entries below `slot` are
/// ignored. Decoding cancels every later-ordered device first, so the
/// interference comes from order positions slot..position-1 only, and the
/// device's own slot (slot == position) is interference-free.
pub fn achievable_rate(
    config: &SystemConfig,
    channels: &ChannelRealization,
    order: &[usize],
    slot_powers: &[f64],
    slot: usize,
    position: usize,
    beam: &BeamVector,
) -> Result<f64> {
    if slot > position {
        return Err(Error::SlotOrderViolation {
            slot,
            position,
        });
    }
    let own_gain = snr_gain(&channels.composite[order[position]], beam, config.noise_power)?;
    let own = slot_powers[position] * own_gain;
    let mut interference = 0.0;
    for q in slot..position {
        let g = snr_gain(&channels.composite[order[q]], beam, config.noise_power)?;
        interference += slot_powers[q] * g;
    }
    Ok(config.bandwidth_hz * (1.0 + own / (1.0 + interference)).log2())
}
