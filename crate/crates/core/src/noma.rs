//! Single-slot solver: every device transmits simultaneously and the base
//! station decodes by successive interference cancellation.
//!
//! For a fixed beam the minimum duration is found by bisection: the unique
//! powers meeting every target with equality are an explicit recursion in
//! the decode order, and each of them (and each energy) is strictly
//! decreasing in the duration. The beam is then improved by the shared
//! fractional-programming machinery, alternating until the delay stalls.

use crate::error::{Error, Result};
use crate::hma::{fp, Schedule, SolveOptions};
use crate::system::{
    aligned_beam, snr_gain, BeamVector, Budget, ChannelRealization, SystemConfig,
};

const LN_2: f64 = std::f64::consts::LN_2;

/// Single-slot solution for a fixed order.
#[derive(Debug, Clone)]
pub struct NomaSolution {
    /// `order[q]` is the original index of the q-th ordered device.
    pub order: Vec<usize>,
    /// The single slot duration, seconds.
    pub duration: f64,
    /// Transmit power per order position, watts.
    pub powers: Vec<f64>,
    /// The slot beam.
    pub beam: BeamVector,
    /// Delay after each alternating round.
    pub delay_trace: Vec<f64>,
}

impl NomaSolution {
    pub fn delay(&self) -> f64 {
        self.duration
    }
}

/// The unique powers meeting every target with equality at duration `tau`,
/// in order position indexing. `gains[q]` is the SNR gain of the q-th
/// ordered device under the slot beam, `targets[q]` its normalized target.
/// Entries may overflow to infinity for tiny durations; the caller compares
/// against budgets.
pub fn recursive_powers(tau: f64, gains: &[f64], targets: &[f64]) -> Vec<f64> {
    let mut powers = Vec::with_capacity(gains.len());
    // 1 + sum of decoded interference grows by 2^(target/tau) per device
    let mut cumulative = 1.0_f64;
    for (gain, target) in gains.iter().zip(targets) {
        let growth = (target / tau).exp2();
        powers.push((growth - 1.0) * cumulative / gain);
        cumulative *= growth;
    }
    powers
}

fn budget_feasible(
    budget: &Budget,
    order: &[usize],
    powers: &[f64],
    tau: f64,
) -> bool {
    match budget {
        Budget::Power(p_max) => powers
            .iter()
            .zip(order)
            .all(|(p, k)| *p <= p_max[*k] * (1.0 + 1e-12)),
        Budget::Energy(energy) => powers
            .iter()
            .zip(order)
            .all(|(p, k)| p * tau <= energy[*k] * (1.0 + 1e-12)),
    }
}

/// Minimum single-slot duration for a fixed beam, by bisection on the
/// budget feasibility boundary.
pub fn noma_min_delay_fixed_beam(
    config: &SystemConfig,
    channels: &ChannelRealization,
    order: &[usize],
    beam: &BeamVector,
) -> Result<NomaSolution> {
    let k_count = order.len();
    let gains: Vec<f64> = order
        .iter()
        .map(|k| snr_gain(&channels.composite[*k], beam, config.noise_power))
        .collect::<Result<_>>()?;
    let targets: Vec<f64> = order
        .iter()
        .map(|k| config.normalized_target(*k))
        .collect();

    // interference-free lower bound per device; also the energy gate
    let mut lo = 0.0_f64;
    for q in 0..k_count {
        if gains[q] <= 0.0 {
            return Err(Error::InfeasibleEnergy {
                device: order[q],
                energy: 0.0,
                required: f64::INFINITY,
            });
        }
        let bound = match &config.budget {
            Budget::Power(p_max) => targets[q] / (1.0 + p_max[order[q]] * gains[q]).log2(),
            Budget::Energy(energy) => {
                let e = energy[order[q]];
                let required = targets[q] * LN_2 / gains[q];
                if e <= required {
                    return Err(Error::InfeasibleEnergy {
                        device: order[q],
                        energy: e,
                        required,
                    });
                }
                crate::tdma::energy_limited_duration(targets[q], e, gains[q], order[q])?
            }
        };
        lo = lo.max(bound);
    }

    let feasible = |tau: f64| {
        let p = recursive_powers(tau, &gains, &targets);
        budget_feasible(&config.budget, order, &p, tau)
    };

    if feasible(lo) {
        let powers = recursive_powers(lo, &gains, &targets);
        return Ok(NomaSolution {
            order: order.to_vec(),
            duration: lo,
            powers,
            beam: beam.clone(),
            delay_trace: vec![lo],
        });
    }

    let mut hi = lo.max(1e-12);
    let mut bracketed = false;
    for _ in 0..80 {
        hi *= 2.0;
        if feasible(hi) {
            bracketed = true;
            break;
        }
    }
    if !bracketed {
        return Err(Error::Internal(
            "single-slot bisection failed to bracket a feasible duration".into(),
        ));
    }

    // the bisection premise: powers and energies decrease in the duration
    assert_monotone_premise(&gains, &targets, lo.max(1e-12), hi)?;

    let mut lo = lo;
    let tol = (1e-10 * (hi - lo)).max(1e-12);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let powers = recursive_powers(hi, &gains, &targets);
    Ok(NomaSolution {
        order: order.to_vec(),
        duration: hi,
        powers,
        beam: beam.clone(),
        delay_trace: vec![hi],
    })
}

/// Spot-check that every power and every energy is decreasing across the
/// bracket before trusting bisection on the feasibility boundary.
fn assert_monotone_premise(gains: &[f64], targets: &[f64], lo: f64, hi: f64) -> Result<()> {
    let samples = 9;
    let mut prev_p: Option<Vec<f64>> = None;
    for s in 0..samples {
        let tau = lo + (hi - lo) * s as f64 / (samples - 1) as f64;
        let p = recursive_powers(tau, gains, targets);
        if let Some(prev) = &prev_p {
            for q in 0..p.len() {
                if p[q].is_finite() && prev[q].is_finite() {
                    let more_power = p[q] > prev[q] * (1.0 + 1e-9);
                    let prev_tau = lo + (hi - lo) * (s - 1) as f64 / (samples - 1) as f64;
                    let more_energy = p[q] * tau > prev[q] * prev_tau * (1.0 + 1e-9);
                    if more_power || more_energy {
                        return Err(Error::Internal(format!(
                            "single-slot monotonicity premise failed at position {q}"
                        )));
                    }
                }
            }
        }
        prev_p = Some(p);
    }
    Ok(())
}

/// Alternate the fixed-beam duration solve with beam optimization until the
/// delay stalls. The beam starts aligned to the weakest device's channel.
pub fn solve_noma(
    config: &SystemConfig,
    channels: &ChannelRealization,
    order: &[usize],
) -> Result<NomaSolution> {
    solve_noma_with(config, channels, order, 1e-6, 1e-6, 50)
}

pub(crate) fn solve_noma_ordered(
    config: &SystemConfig,
    channels: &ChannelRealization,
    order: &[usize],
    options: &SolveOptions,
) -> Result<NomaSolution> {
    solve_noma_with(config, channels, order, 1e-6, options.fp_tol, 50)
}

pub fn solve_noma_with(
    config: &SystemConfig,
    channels: &ChannelRealization,
    order: &[usize],
    ao_tol: f64,
    fp_tol: f64,
    max_rounds: usize,
) -> Result<NomaSolution> {
    config.validate()?;
    // start aligned to the weakest device under per-device alignment
    let weakest = order
        .iter()
        .map(|k| {
            let v = aligned_beam(&channels.composite[*k]);
            snr_gain(&channels.composite[*k], &v, config.noise_power).map(|g| (*k, g))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(k, _)| k)
        .unwrap();
    let start = aligned_beam(&channels.composite[weakest]);

    let mut best = alternate_from(config, channels, order, start, ao_tol, fp_tol, max_rounds)?;
    if channels.irs_elements() == 0 {
        return Ok(best);
    }

    // the alternation is a local search; restart it from each device's
    // aligned beam when that start already beats the incumbent
    for k in order {
        if *k == weakest {
            continue;
        }
        let alt = aligned_beam(&channels.composite[*k]);
        let probe = noma_min_delay_fixed_beam(config, channels, order, &alt)?;
        if probe.duration < best.duration {
            let candidate =
                alternate_from(config, channels, order, alt, ao_tol, fp_tol, max_rounds)?;
            if candidate.duration < best.duration {
                best = candidate;
            }
        }
    }
    Ok(best)
}

fn alternate_from(
    config: &SystemConfig,
    channels: &ChannelRealization,
    order: &[usize],
    start: BeamVector,
    ao_tol: f64,
    fp_tol: f64,
    max_rounds: usize,
) -> Result<NomaSolution> {
    let mut beam = start;
    let mut best = noma_min_delay_fixed_beam(config, channels, order, &beam)?;
    let mut trace = vec![best.duration];
    if channels.irs_elements() == 0 {
        best.delay_trace = trace;
        return Ok(best);
    }
    let mut stall = 0;
    for _ in 0..max_rounds {
        let schedule = Schedule::from_noma(&best);
        let beams = vec![beam.clone(); order.len()];
        let (new_beams, _) = fp::optimize_beams(
            config,
            channels,
            &schedule,
            beams,
            &fp::BeamStep::default(),
            fp_tol,
            60,
        )?;
        beam = new_beams.into_iter().next().unwrap();
        // a sum-slack beam step may trade one device's margin for another's;
        // the refreshed power recursion can then need more time, so keep the
        // best duration seen and give the wandering beam a few rounds to
        // find its way back before stopping
        let candidate = noma_min_delay_fixed_beam(config, channels, order, &beam)?;
        let prev = *trace.last().unwrap();
        let improved = prev - candidate.duration;
        if candidate.duration <= prev {
            best = candidate;
        }
        trace.push(best.duration);
        if improved < ao_tol * prev {
            stall += 1;
            if stall >= 4 {
                break;
            }
        } else {
            stall = 0;
        }
    }
    best.delay_trace = trace;
    Ok(best)
}
