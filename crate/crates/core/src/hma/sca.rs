//! Successive convex approximation of the time/power allocation.
//!
//! At a local point the concave interference terms on the right side of the
//! throughput constraints are replaced by their first-order expansions,
//! which upper-bound them: the convexified feasible set is contained in the
//! original one, so every subproblem solution stays feasible and the delay
//! descends monotonically. In the power regime the last-ordered device's
//! energies are pinned to maximum-power transmission and eliminated.

use crate::error::{Error, Result};
use crate::numerics::convex::{
    solve_structured_convex, PerspectiveTerm, QosConstraint, SolverSettings,
    StructuredConvexProblem, SumBound, TauLinkedBound,
};
use crate::system::{snr_gain, BeamVector, Budget, ChannelRealization, SystemConfig};

use super::{fp, Schedule};

const LN_2: f64 = std::f64::consts::LN_2;

/// Inner-loop controls for the convexified allocation rounds.
#[derive(Debug, Clone)]
pub struct ScaSettings {
    /// Stop when the fractional delay decrease per round falls below.
    pub tol: f64,
    pub max_rounds: usize,
    pub convex: SolverSettings,
    /// Optional upper bounds on slot durations (studies of restricted
    /// schedules); empty means uncapped.
    pub duration_caps: Vec<Option<f64>>,
}

impl Default for ScaSettings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_rounds: 25,
            convex: SolverSettings::default(),
            duration_caps: Vec::new(),
        }
    }
}

/// First-order expansion pieces of `f(tau, z) = tau log2(1 + sum g_j z_j / tau)`
/// at `(tau_hat, z_hat)`: value and partial derivatives.
fn linearize(tau_hat: f64, z_hat: &[f64], gains: &[f64], floor: f64) -> (f64, f64, Vec<f64>) {
    let tau = tau_hat.max(floor);
    let s: f64 = z_hat.iter().zip(gains).map(|(z, g)| z * g).sum();
    let u = s / tau;
    let value = tau * (1.0 + u).log2();
    let d_tau = (1.0 + u).log2() - u / ((1.0 + u) * LN_2);
    let d_z: Vec<f64> = gains.iter().map(|g| g / ((1.0 + u) * LN_2)).collect();
    (value, d_tau, d_z)
}

/// Tangent upper bound of the interference term, evaluated at `(tau, z)`
/// with the expansion anchored at `(tau_hat, z_hat)`. An empty gain list is
/// the empty interference sum, identically zero.
pub fn taylor_bound(
    tau_hat: f64,
    z_hat: &[f64],
    gains: &[f64],
    tau: f64,
    z: &[f64],
    floor: f64,
) -> f64 {
    if gains.is_empty() {
        return 0.0;
    }
    let (value, d_tau, d_z) = linearize(tau_hat, z_hat, gains, floor);
    value
        + d_tau * (tau - tau_hat.max(floor))
        + d_z
            .iter()
            .zip(z.iter().zip(z_hat))
            .map(|(d, (zi, zh))| d * (zi - zh))
            .sum::<f64>()
}

/// Variable layout of one subproblem: which (position, slot) pairs are free.
struct ZLayout {
    index: Vec<Vec<Option<usize>>>,
    count: usize,
    /// Power pinned to the cap for the last position (power regime).
    pinned_power: Option<f64>,
}

fn layout(config: &SystemConfig, order: &[usize]) -> ZLayout {
    let k_count = order.len();
    let pinned_power = match &config.budget {
        Budget::Power(p_max) => Some(p_max[order[k_count - 1]]),
        Budget::Energy(_) => None,
    };
    let mut index = Vec::with_capacity(k_count);
    let mut count = 0;
    for k in 0..k_count {
        let mut row = Vec::with_capacity(k + 1);
        for _i in 0..=k {
            if pinned_power.is_some() && k == k_count - 1 {
                row.push(None);
            } else {
                row.push(Some(count));
                count += 1;
            }
        }
        index.push(row);
    }
    ZLayout {
        index,
        count,
        pinned_power,
    }
}

/// SNR gain of each ordered device under each slot beam, `gains[q][i]`.
fn gain_matrix(
    config: &SystemConfig,
    channels: &ChannelRealization,
    order: &[usize],
    beams: &[BeamVector],
) -> Result<Vec<Vec<f64>>> {
    order
        .iter()
        .map(|k| {
            beams
                .iter()
                .map(|v| snr_gain(&channels.composite[*k], v, config.noise_power))
                .collect()
        })
        .collect()
}

fn build_subproblem(
    config: &SystemConfig,
    gains: &[Vec<f64>],
    local: &Schedule,
    layout: &ZLayout,
    floor: f64,
    duration_caps: &[Option<f64>],
) -> StructuredConvexProblem {
    let k_count = local.device_count();
    let order = &local.order;
    let mut qos = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let mut terms = Vec::with_capacity(k + 1);
        let mut linear_tau: Vec<(usize, f64)> = Vec::new();
        let mut linear_z: Vec<(usize, f64)> = Vec::new();
        let target = config.normalized_target(order[k]);
        let mut constant = -target;
        for i in 0..=k {
            // joint term over the devices decoded in slot i down to position k
            let mut z_terms = Vec::new();
            let mut inside = 0.0;
            for j in i..=k {
                match layout.index[j][i] {
                    Some(idx) => z_terms.push((idx, gains[j][i])),
                    None => inside += layout.pinned_power.unwrap() * gains[j][i],
                }
            }
            if i == k {
                terms.push(PerspectiveTerm {
                    slot: k,
                    z_terms,
                    inside_const: inside,
                });
                continue;
            }
            terms.push(PerspectiveTerm {
                slot: i,
                z_terms,
                inside_const: inside,
            });
            // subtract the expansion of the interference term (positions i..k-1)
            let g_row: Vec<f64> = (i..k).map(|j| gains[j][i]).collect();
            if g_row.is_empty() {
                continue;
            }
            let z_hat: Vec<f64> = (i..k).map(|j| local.energies[j][i]).collect();
            let (value, d_tau, d_z) = linearize(local.durations[i], &z_hat, &g_row, floor);
            linear_tau.push((i, -d_tau));
            let mut offset = value - d_tau * local.durations[i].max(floor);
            for ((j, d), zh) in (i..k).zip(&d_z).zip(&z_hat) {
                let idx = layout.index[j][i].expect("interferers are never pinned");
                linear_z.push((idx, -d));
                offset -= d * zh;
            }
            constant -= offset;
        }
        qos.push(QosConstraint {
            terms,
            linear_tau,
            linear_z,
            constant,
            scale: target,
        });
    }

    let mut tau_linked = Vec::new();
    let mut sum_bounds = Vec::new();
    match &config.budget {
        Budget::Power(p_max) => {
            for k in 0..k_count {
                for i in 0..=k {
                    if let Some(idx) = layout.index[k][i] {
                        tau_linked.push(TauLinkedBound {
                            z: idx,
                            slot: i,
                            coeff: p_max[order[k]],
                        });
                    }
                }
            }
        }
        Budget::Energy(energy) => {
            for k in 0..k_count {
                let zs: Vec<usize> = (0..=k)
                    .map(|i| layout.index[k][i].expect("energy regime pins nothing"))
                    .collect();
                sum_bounds.push(SumBound {
                    zs,
                    limit: energy[order[k]],
                });
            }
        }
    }

    let mut tau_caps = vec![None; k_count];
    for (slot, cap) in duration_caps.iter().enumerate().take(k_count) {
        tau_caps[slot] = *cap;
    }
    StructuredConvexProblem {
        slots: k_count,
        z_vars: layout.count,
        qos,
        tau_linked,
        sum_bounds,
        tau_caps,
        objective_tau: None,
        total_cap: None,
    }
}

/// Re-linearized convex solves at the converged point: among schedules whose
/// total stays at the achieved delay, minimize the weighted completion sum
/// `sum_i (K - i) tau_i`. Removes degenerate early-slot stretch without
/// giving up any delay: every accepted round keeps the total at or below
/// the incumbent's and every device feasible.
pub fn completion_polish(
    config: &SystemConfig,
    channels: &ChannelRealization,
    beams: &[BeamVector],
    schedule: &Schedule,
    settings: &ScaSettings,
) -> Result<Schedule> {
    let order = &schedule.order;
    let k_count = order.len();
    let layout = layout(config, order);
    let gains = gain_matrix(config, channels, order, beams)?;
    let total = schedule.sum_delay();
    let weights: Vec<f64> = (0..k_count).map(|i| (k_count - i) as f64).collect();
    let weight = |s: &Schedule| -> f64 {
        s.durations
            .iter()
            .zip(&weights)
            .map(|(t, w)| w * t)
            .sum()
    };

    let mut current = schedule.clone();
    for _round in 0..10 {
        let mut prob = build_subproblem(
            config,
            &gains,
            &current,
            &layout,
            settings.convex.tau_floor,
            &settings.duration_caps,
        );
        prob.total_cap = Some(total * (1.0 + 1e-9));
        prob.objective_tau = Some(weights.clone());
        let (tau0, z0) = flatten(&current, &layout);
        let (tau, z, report) = match solve_structured_convex(&prob, &tau0, &z0, &settings.convex) {
            Ok(out) => out,
            Err(Error::Infeasible { .. }) => break,
            Err(e) => return Err(e),
        };
        if !report.converged {
            break;
        }
        let mut candidate = unflatten(&tau, &z, &layout, order);
        // the optimizer uses the whole allowance; scale back onto the
        // incumbent total (throughputs scale with it, within tolerance)
        let sum = candidate.sum_delay();
        if sum > total {
            let c = total / sum;
            if c < 1.0 - 1e-6 {
                break;
            }
            for t in candidate.durations.iter_mut() {
                *t *= c;
            }
            for row in candidate.energies.iter_mut() {
                for e in row.iter_mut() {
                    *e *= c;
                }
            }
        }
        let shortfall = qos_shortfall(config, channels, &candidate, beams)?;
        if shortfall > 100.0 * settings.convex.feas_tol {
            break;
        }
        let prev = weight(&current);
        let next = weight(&candidate);
        if next < prev {
            current = candidate;
        }
        if prev - next < 1e-6 * prev.max(1e-12) {
            break;
        }
    }
    Ok(current)
}

fn flatten(local: &Schedule, layout: &ZLayout) -> (Vec<f64>, Vec<f64>) {
    let mut z = vec![0.0; layout.count];
    for (k, row) in layout.index.iter().enumerate() {
        for (i, slot) in row.iter().enumerate() {
            if let Some(idx) = slot {
                z[*idx] = local.energies[k][i].max(0.0);
            }
        }
    }
    (local.durations.clone(), z)
}

fn unflatten(
    tau: &[f64],
    z: &[f64],
    layout: &ZLayout,
    order: &[usize],
) -> Schedule {
    let k_count = order.len();
    let mut energies = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let mut row = Vec::with_capacity(k + 1);
        for i in 0..=k {
            let e = match layout.index[k][i] {
                Some(idx) => z[idx].max(0.0),
                None => layout.pinned_power.unwrap() * tau[i],
            };
            row.push(e);
        }
        energies.push(row);
    }
    Schedule {
        order: order.to_vec(),
        durations: tau.to_vec(),
        energies,
    }
}

/// Worst relative throughput shortfall of a schedule under given beams;
/// zero when every device meets its target.
pub fn qos_shortfall(
    config: &SystemConfig,
    channels: &ChannelRealization,
    schedule: &Schedule,
    beams: &[BeamVector],
) -> Result<f64> {
    let throughput = fp::normalized_throughputs(config, channels, schedule, beams)?;
    let mut worst = 0.0_f64;
    for (k, got) in throughput.iter().enumerate() {
        let want = config.normalized_target(schedule.order[k]);
        worst = worst.max((want - got) / want);
    }
    Ok(worst)
}

/// Iterate convexified allocation rounds from a feasible warm schedule until
/// the delay decrease stalls. Returns the improved schedule and the number
/// of rounds run.
pub fn sca_resource_allocation(
    config: &SystemConfig,
    channels: &ChannelRealization,
    beams: &[BeamVector],
    warm: &Schedule,
    settings: &ScaSettings,
) -> Result<(Schedule, usize)> {
    let order = &warm.order;
    let layout = layout(config, order);
    let gains = gain_matrix(config, channels, order, beams)?;
    let floor = settings.convex.tau_floor;

    let mut current = warm.clone();
    // a beam step may leave the warm point marginally short on some device;
    // in that case the first feasible candidate is accepted at any delay
    let mut restoring = qos_shortfall(config, channels, &current, beams)? > settings.convex.feas_tol;
    let mut rounds = 0;
    loop {
        let prob = build_subproblem(config, &gains, &current, &layout, floor, &settings.duration_caps);
        let (tau0, z0) = flatten(&current, &layout);
        let solved = solve_structured_convex(&prob, &tau0, &z0, &settings.convex);
        let (tau, z, _report) = match solved {
            Ok(out) => out,
            Err(Error::Infeasible { max_slack }) => {
                if rounds == 0 {
                    return Err(Error::Internal(format!(
                        "convex subproblem infeasible at a feasible warm start (slack {max_slack})"
                    )));
                }
                break;
            }
            Err(e) => return Err(e),
        };
        rounds += 1;
        let candidate = unflatten(&tau, &z, &layout, order);
        // the restriction is inside the original set; verify independently
        let shortfall = qos_shortfall(config, channels, &candidate, beams)?;
        if shortfall > 100.0 * settings.convex.feas_tol {
            break;
        }
        let prev = current.sum_delay();
        let next = candidate.sum_delay();
        if next <= prev || restoring {
            current = candidate;
            restoring = false;
        }
        if prev - next < settings.tol * prev.max(1e-12) || rounds >= settings.max_rounds {
            break;
        }
    }
    Ok((current, rounds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{aligned_beam, generate_channels};
    use crate::tdma;

    fn power_setup(n: usize, seed: u64) -> (SystemConfig, ChannelRealization) {
        let cfg = SystemConfig {
            bandwidth_hz: 500e3,
            noise_power: 1e-11,
            irs_elements: n,
            ref_gain: 1e-3,
            alpha_direct: 3.6,
            alpha_cascaded: 2.2,
            bs_pos: [0.0, 0.0, 0.0],
            irs_pos: [30.0, 0.0, 5.0],
            device_pos: vec![[20.0, 0.0, 0.0], [40.0, 0.0, 0.0]],
            budget: crate::system::Budget::Power(vec![3.16e-3, 3.16e-3]),
            targets_bits: vec![200e3, 100e3],
            rng_seed: seed,
        };
        let ch = generate_channels(&cfg).unwrap();
        (cfg, ch)
    }

    #[test]
    fn taylor_bound_is_tangent_and_dominates() {
        let gains = [2.0, 0.7, 1.3];
        let z_hat = [0.3, 0.1, 0.2];
        let tau_hat = 0.4;
        let exact = |tau: f64, z: &[f64]| {
            let s: f64 = z.iter().zip(&gains).map(|(z, g)| z * g).sum();
            tau * (1.0 + s / tau).log2()
        };
        let at_anchor = taylor_bound(tau_hat, &z_hat, &gains, tau_hat, &z_hat, 1e-9);
        assert!((at_anchor - exact(tau_hat, &z_hat)).abs() < 1e-12);

        for trial in 0..10_000u64 {
            let u = |i: u64| crate::system::tests::test_uniform(77, trial, i);
            let tau = 0.01 + 2.0 * u(0);
            let z = [u(1), u(2), u(3)];
            let bound = taylor_bound(tau_hat, &z_hat, &gains, tau, &z, 1e-9);
            let truth = exact(tau, &z);
            assert!(
                bound >= truth - 1e-9 * truth.abs().max(1.0),
                "bound {bound} below exact {truth} at trial {trial}"
            );
        }
    }

    #[test]
    fn empty_interference_bound_is_zero() {
        assert_eq!(taylor_bound(0.5, &[], &[], 1.0, &[], 1e-9), 0.0);
    }

    #[test]
    fn single_device_collapses_to_per_slot_form() {
        let (mut cfg, _) = power_setup(4, 3);
        cfg.device_pos.truncate(1);
        cfg.targets_bits.truncate(1);
        cfg.budget = crate::system::Budget::Power(vec![3.16e-3]);
        let ch = generate_channels(&cfg).unwrap();
        let tdma_sol = tdma::tdma_power_limited(&cfg, &ch).unwrap();
        let warm = Schedule::from_tdma(&tdma_sol, &[0]);
        let beams = vec![aligned_beam(&ch.composite[0])];
        let (out, _) =
            sca_resource_allocation(&cfg, &ch, &beams, &warm, &ScaSettings::default()).unwrap();
        assert!(
            (out.sum_delay() - tdma_sol.sum_delay).abs() <= 1e-5 * tdma_sol.sum_delay,
            "sca {} vs closed form {}",
            out.sum_delay(),
            tdma_sol.sum_delay
        );
    }

    #[test]
    fn descent_is_monotone_and_feasible() {
        let (cfg, ch) = power_setup(8, 5);
        let tdma_sol = tdma::tdma_power_limited(&cfg, &ch).unwrap();
        let snr = crate::hma::tdma_snr(&tdma_sol);
        let order = crate::hma::propose_order(&snr);
        let warm = Schedule::from_tdma(&tdma_sol, &order);
        let beams: Vec<BeamVector> = order
            .iter()
            .map(|k| tdma_sol.beams[*k].clone())
            .collect();
        let (out, rounds) =
            sca_resource_allocation(&cfg, &ch, &beams, &warm, &ScaSettings::default()).unwrap();
        assert!(rounds >= 1);
        assert!(out.sum_delay() <= warm.sum_delay() * (1.0 + 1e-12));
        // the hybrid schedule strictly beats one-device-per-slot here
        assert!(out.sum_delay() < warm.sum_delay() * (1.0 - 1e-4));
        let shortfall = qos_shortfall(&cfg, &ch, &out, &beams).unwrap();
        assert!(shortfall <= 1e-8, "shortfall {shortfall}");
        out.validate(&cfg, 1e-8).unwrap();
        // last ordered device pinned at peak power in every slot
        let last = out.device_count() - 1;
        let crate::system::Budget::Power(p_max) = &cfg.budget else {
            unreachable!()
        };
        for i in 0..out.device_count() {
            let p = out.power(last, i);
            assert!(
                (p - p_max[out.order[last]]).abs() <= 1e-12 * p_max[out.order[last]],
                "slot {i} power {p}"
            );
        }
    }

    #[test]
    fn energy_regime_descent() {
        let cfg = SystemConfig {
            bandwidth_hz: 500e3,
            noise_power: 1e-11,
            irs_elements: 8,
            ref_gain: 1e-3,
            alpha_direct: 3.6,
            alpha_cascaded: 2.2,
            bs_pos: [0.0, 0.0, 0.0],
            irs_pos: [30.0, 0.0, 5.0],
            device_pos: vec![[20.0, 0.0, 0.0], [40.0, 0.0, 0.0]],
            budget: crate::system::Budget::Energy(vec![0.1, 0.05]),
            targets_bits: vec![2000e3, 200e3],
            rng_seed: 31,
        };
        let ch = generate_channels(&cfg).unwrap();
        let tdma_sol = tdma::tdma_energy_limited(&cfg, &ch).unwrap();
        let snr = crate::hma::tdma_snr(&tdma_sol);
        let order = crate::hma::propose_order(&snr);
        let warm = Schedule::from_tdma(&tdma_sol, &order);
        let beams: Vec<BeamVector> = order
            .iter()
            .map(|k| tdma_sol.beams[*k].clone())
            .collect();
        let (out, _) =
            sca_resource_allocation(&cfg, &ch, &beams, &warm, &ScaSettings::default()).unwrap();
        assert!(out.sum_delay() <= warm.sum_delay() * (1.0 + 1e-12));
        let shortfall = qos_shortfall(&cfg, &ch, &out, &beams).unwrap();
        assert!(shortfall <= 1e-8);
        out.validate(&cfg, 1e-8).unwrap();
    }
}
