//! Shared instance builders for the integration suites.

use irs_hma::system::{Budget, SystemConfig};

pub fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Uniform in [0, 1).
pub fn uniform(state: &mut u64) -> f64 {
    (splitmix(state) >> 11) as f64 * (1.0 / 9007199254740992.0)
}

pub fn base_config(devices: Vec<[f64; 3]>, budget: Budget, targets_bits: Vec<f64>) -> SystemConfig {
    SystemConfig {
        bandwidth_hz: 500e3,
        noise_power: 1e-11,
        irs_elements: 16,
        ref_gain: 1e-3,
        alpha_direct: 3.6,
        alpha_cascaded: 2.2,
        bs_pos: [0.0, 0.0, 0.0],
        irs_pos: [30.0, 0.0, 5.0],
        device_pos: devices,
        budget,
        targets_bits,
        rng_seed: 0,
    }
}

/// Random power-regime instance with 2..=4 devices spread along the axis.
pub fn random_power_instance(seed: u64, max_devices: usize) -> SystemConfig {
    let mut state = seed.wrapping_mul(0xA24BAED4963EE407).wrapping_add(1);
    let k = 2 + (splitmix(&mut state) as usize) % (max_devices - 1);
    let mut devices = Vec::with_capacity(k);
    let mut targets = Vec::with_capacity(k);
    let mut powers = Vec::with_capacity(k);
    for _ in 0..k {
        let x = 10.0 + 40.0 * uniform(&mut state);
        let y = -6.0 + 12.0 * uniform(&mut state);
        devices.push([x, y, 0.0]);
        targets.push((50.0 + 350.0 * uniform(&mut state)) * 1e3);
        powers.push(10f64.powf((2.0 + 6.0 * uniform(&mut state) - 30.0) / 10.0));
    }
    let mut cfg = base_config(devices, Budget::Power(powers), targets);
    cfg.irs_elements = 8 + (splitmix(&mut state) as usize) % 9;
    cfg.rng_seed = splitmix(&mut state);
    cfg
}

/// Random asymmetric two-device power instance: distinctly different
/// distances and targets so the better decode order is not a coin toss.
pub fn asymmetric_pair(seed: u64) -> SystemConfig {
    let mut state = seed.wrapping_mul(0xD6E8FEB86659FD93).wrapping_add(3);
    let near = 12.0 + 10.0 * uniform(&mut state);
    let far = near + 12.0 + 18.0 * uniform(&mut state);
    let devices = vec![[near, 0.0, 0.0], [far, 0.0, 0.0]];
    let targets = vec![
        (60.0 + 240.0 * uniform(&mut state)) * 1e3,
        (60.0 + 240.0 * uniform(&mut state)) * 1e3,
    ];
    let p = 10f64.powf((5.0 - 30.0) / 10.0);
    let mut cfg = base_config(devices, Budget::Power(vec![p, p]), targets);
    cfg.irs_elements = 8;
    cfg.rng_seed = splitmix(&mut state);
    cfg
}
