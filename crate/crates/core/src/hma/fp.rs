//! Fractional-programming beam optimization.
//!
//! The per-device throughput is a sum of log-of-ratio terms in the beams.
//! Two auxiliary sets make it tractable: per-(device, slot) SINR values and
//! complex ratio terms from the quadratic transform. With both held fixed
//! the surrogate is a concave quadratic in each slot's beam and lower-bounds
//! the true throughput everywhere, touching it at the update point, so beams
//! that keep every surrogate above its target keep the schedule feasible.
//!
//! The unit-modulus maximization runs as cyclic per-element phase updates.
//! Callers choose between the plain sum-of-slacks ascent and a guarded,
//! delay-weighted variant whose element moves are damped until no device's
//! surrogate dips below its target allowance.

use num_complex::Complex64;

use crate::error::Result;
use crate::system::{effective_channel, BeamVector, ChannelRealization, SystemConfig};

use super::Schedule;

const LN_2: f64 = std::f64::consts::LN_2;

/// Quadratic-transform auxiliaries, lower-triangular over (position, slot).
#[derive(Debug, Clone)]
pub struct FpAuxiliaries {
    /// SINR terms, dimensionless.
    pub sinr: Vec<Vec<f64>>,
    /// Complex ratio terms.
    pub ratio: Vec<Vec<Complex64>>,
}

/// Controls for one beam pass.
#[derive(Debug, Clone, Default)]
pub struct BeamStep {
    /// Use one beam for every slot.
    pub shared: bool,
    /// Per-position weights on the surrogate sum (delay sensitivities).
    pub weights: Option<Vec<f64>>,
    /// Per-position (target, allowed dip): element moves are damped and
    /// rejected rather than let any surrogate fall below target - dip.
    pub guard: Option<Vec<(f64, f64)>>,
}

/// Effective channel of every ordered device under every slot beam:
/// `pairings[q][i] = b_{order[q]}^H v_i`.
pub(crate) fn channel_pairings(
    channels: &ChannelRealization,
    order: &[usize],
    beams: &[BeamVector],
) -> Result<Vec<Vec<Complex64>>> {
    order
        .iter()
        .map(|k| {
            beams
                .iter()
                .map(|v| effective_channel(&channels.composite[*k], v))
                .collect()
        })
        .collect()
}

/// Refresh both auxiliary sets at the current schedule and beams.
pub fn fp_auxiliary_update(
    config: &SystemConfig,
    channels: &ChannelRealization,
    schedule: &Schedule,
    beams: &[BeamVector],
) -> Result<FpAuxiliaries> {
    let k_count = schedule.device_count();
    let pair = channel_pairings(channels, &schedule.order, beams)?;
    let noise = config.noise_power;
    let mut sinr = Vec::with_capacity(k_count);
    let mut ratio = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let mut s_row = Vec::with_capacity(k + 1);
        let mut r_row = Vec::with_capacity(k + 1);
        for i in 0..=k {
            let tau = schedule.durations[i];
            let p_own = schedule.power(k, i);
            if tau <= 0.0 || p_own <= 0.0 {
                s_row.push(0.0);
                r_row.push(Complex64::new(0.0, 0.0));
                continue;
            }
            let own = p_own * pair[k][i].norm_sqr();
            let mut interference = 0.0;
            for j in i..k {
                interference += schedule.power(j, i) * pair[j][i].norm_sqr();
            }
            let chi = own / (noise + interference);
            let denom = noise + interference + own;
            let iota = (tau * (1.0 + chi) * p_own).sqrt() * pair[k][i] / denom;
            s_row.push(chi);
            r_row.push(iota);
        }
        sinr.push(s_row);
        ratio.push(r_row);
    }
    Ok(FpAuxiliaries { sinr, ratio })
}

/// Surrogate throughput of each device (bits/Hz) at given auxiliaries and
/// beams. Equals the true normalized throughput right after an auxiliary
/// update and never exceeds it.
pub fn surrogate_throughputs(
    config: &SystemConfig,
    channels: &ChannelRealization,
    schedule: &Schedule,
    beams: &[BeamVector],
    aux: &FpAuxiliaries,
) -> Result<Vec<f64>> {
    let k_count = schedule.device_count();
    let pair = channel_pairings(channels, &schedule.order, beams)?;
    let noise = config.noise_power;
    let mut totals = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let mut total = 0.0;
        for i in 0..=k {
            let tau = schedule.durations[i];
            let p_own = schedule.power(k, i);
            if tau <= 0.0 || p_own <= 0.0 {
                continue;
            }
            let chi = aux.sinr[k][i];
            let iota = aux.ratio[k][i];
            let alpha = (tau * (1.0 + chi) * p_own).sqrt();
            let mut quad = noise;
            for j in i..=k {
                quad += schedule.power(j, i) * pair[j][i].norm_sqr();
            }
            total += tau * (1.0 + chi).log2() - tau * chi / LN_2
                + 2.0 * (iota.conj() * alpha * pair[k][i]).re / LN_2
                - iota.norm_sqr() * quad / LN_2;
        }
        totals.push(total);
    }
    Ok(totals)
}

/// True normalized throughput of each device (bits/Hz) under the schedule
/// and beams, straight from the rate expression.
pub fn normalized_throughputs(
    config: &SystemConfig,
    channels: &ChannelRealization,
    schedule: &Schedule,
    beams: &[BeamVector],
) -> Result<Vec<f64>> {
    let k_count = schedule.device_count();
    let pair = channel_pairings(channels, &schedule.order, beams)?;
    let noise = config.noise_power;
    let mut totals = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let mut total = 0.0;
        for i in 0..=k {
            let tau = schedule.durations[i];
            if tau <= 0.0 {
                continue;
            }
            let own = schedule.power(k, i) * pair[k][i].norm_sqr();
            let mut interference = 0.0;
            for j in i..k {
                interference += schedule.power(j, i) * pair[j][i].norm_sqr();
            }
            total += tau * (1.0 + own / (noise + interference)).log2();
        }
        totals.push(total);
    }
    Ok(totals)
}

/// State of one slot's surrogate: per-device transform coefficients, powers,
/// and the cached pairings `d_j = b_j^H v`.
struct SlotState {
    slot: usize,
    /// For positions slot..K: (alpha*iota, |iota|^2, power, constant part).
    alpha_iota: Vec<Complex64>,
    iota_sq: Vec<f64>,
    power: Vec<f64>,
    constant: Vec<f64>,
    pairings: Vec<Complex64>,
}

impl SlotState {
    fn build(
        config: &SystemConfig,
        channels: &ChannelRealization,
        schedule: &Schedule,
        aux: &FpAuxiliaries,
        beam: &BeamVector,
        slot: usize,
    ) -> Result<SlotState> {
        let k_count = schedule.device_count();
        let tau = schedule.durations[slot];
        let mut alpha_iota = Vec::new();
        let mut iota_sq = Vec::new();
        let mut power = Vec::new();
        let mut constant = Vec::new();
        let mut pairings = Vec::new();
        for k in slot..k_count {
            let p = schedule.power(k, slot);
            let chi = aux.sinr[k][slot];
            let iota = aux.ratio[k][slot];
            let alpha = if tau > 0.0 && p > 0.0 {
                (tau * (1.0 + chi) * p).sqrt()
            } else {
                0.0
            };
            alpha_iota.push(alpha * iota);
            iota_sq.push(iota.norm_sqr());
            power.push(p);
            constant.push(if tau > 0.0 && p > 0.0 {
                tau * (1.0 + chi).log2() - tau * chi / LN_2
            } else {
                0.0
            });
            pairings.push(effective_channel(
                &channels.composite[schedule.order[k]],
                beam,
            )?);
        }
        let _ = config;
        Ok(SlotState {
            slot,
            alpha_iota,
            iota_sq,
            power,
            constant,
            pairings,
        })
    }

    /// Surrogate value of device at order position `k` in this slot.
    fn device_value(&self, noise: f64, k: usize) -> f64 {
        let r = k - self.slot;
        if self.iota_sq[r] == 0.0 && self.alpha_iota[r] == Complex64::new(0.0, 0.0) {
            return self.constant[r];
        }
        let mut quad = noise;
        for j in 0..=r {
            quad += self.power[j] * self.pairings[j].norm_sqr();
        }
        self.constant[r] + 2.0 * (self.alpha_iota[r].conj() * self.pairings[r]).re / LN_2
            - self.iota_sq[r] * quad / LN_2
    }

    /// Per-device surrogate deltas if element `e` of the slot beam moved by
    /// `new_v - old_v`. Entries indexed by order position slot..K.
    fn move_deltas(
        &self,
        channels: &ChannelRealization,
        order: &[usize],
        noise: f64,
        e: usize,
        old_v: Complex64,
        new_v: Complex64,
        deltas: &mut [f64],
    ) {
        let _ = noise;
        let count = self.pairings.len();
        // pairing changes and running prefix of quad changes over positions
        let mut quad_prefix = 0.0;
        for r in 0..count {
            let b_e = channels.composite[order[self.slot + r]][e];
            let d_old = self.pairings[r];
            let d_new = d_old + b_e.conj() * (new_v - old_v);
            quad_prefix += self.power[r] * (d_new.norm_sqr() - d_old.norm_sqr());
            let lin = 2.0 * (self.alpha_iota[r].conj() * (d_new - d_old)).re / LN_2;
            deltas[self.slot + r] = lin - self.iota_sq[r] * quad_prefix / LN_2;
        }
    }

    fn apply_move(
        &mut self,
        channels: &ChannelRealization,
        order: &[usize],
        e: usize,
        old_v: Complex64,
        new_v: Complex64,
    ) {
        for (r, d) in self.pairings.iter_mut().enumerate() {
            let b_e = channels.composite[order[self.slot + r]][e];
            *d += b_e.conj() * (new_v - old_v);
        }
    }

    /// Unconstrained best direction for element `e` of this slot's beam.
    fn element_direction(
        &self,
        channels: &ChannelRealization,
        order: &[usize],
        weights: Option<&[f64]>,
        e: usize,
        current: Complex64,
    ) -> Complex64 {
        let count = self.pairings.len();
        // beta_j = p_j * sum_{k >= j} w_k |iota_k|^2 via a suffix sum
        let mut dir = Complex64::new(0.0, 0.0);
        let mut iota_suffix = 0.0;
        for r in (0..count).rev() {
            let w = weights.map(|w| w[self.slot + r]).unwrap_or(1.0);
            iota_suffix += w * self.iota_sq[r];
            let b_e = channels.composite[order[self.slot + r]][e];
            dir += w * self.alpha_iota[r] * b_e;
            let beta = self.power[r] * iota_suffix;
            if beta > 0.0 {
                let rest = self.pairings[r] - b_e.conj() * current;
                dir -= beta * b_e * rest;
            }
        }
        dir
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % std::f64::consts::TAU;
    if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    }
    if a < -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    }
    a
}

/// One beam pass at fixed auxiliaries. Returns the new beams and the
/// (weighted) surrogate total they achieve.
pub fn beamforming_update(
    config: &SystemConfig,
    channels: &ChannelRealization,
    schedule: &Schedule,
    aux: &FpAuxiliaries,
    beams: &[BeamVector],
    step: &BeamStep,
) -> Result<(Vec<BeamVector>, f64)> {
    let k_count = schedule.device_count();
    let order = &schedule.order;
    let noise = config.noise_power;
    let n = channels.irs_elements();
    let weights = step.weights.as_deref();

    let mut new_beams: Vec<BeamVector> = if step.shared {
        vec![beams[0].clone(); k_count]
    } else {
        beams.to_vec()
    };
    let mut slots: Vec<SlotState> = (0..k_count)
        .map(|i| SlotState::build(config, channels, schedule, aux, &new_beams[i], i))
        .collect::<Result<_>>()?;

    let weighted_total = |slots: &[SlotState]| -> f64 {
        let mut total = 0.0;
        for s in slots {
            for k in s.slot..k_count {
                let w = weights.map(|w| w[k]).unwrap_or(1.0);
                total += w * s.device_value(noise, k);
            }
        }
        total
    };
    let device_totals = |slots: &[SlotState]| -> Vec<f64> {
        let mut totals = vec![0.0; k_count];
        for s in slots {
            for k in s.slot..k_count {
                totals[k] += s.device_value(noise, k);
            }
        }
        totals
    };

    if n > 0 {
        let mut surplus: Vec<f64> = device_totals(&slots);
        if let Some(guard) = &step.guard {
            for (s, (target, _)) in surplus.iter_mut().zip(guard) {
                *s -= target;
            }
        }
        let mut prev_total = weighted_total(&slots);
        let mut full = vec![0.0; k_count];
        let mut scratch = vec![0.0; k_count];
        let damps: &[f64] = if step.guard.is_some() {
            &[1.0, 0.5, 0.25, 0.125]
        } else {
            &[1.0]
        };
        let groups: Vec<Vec<usize>> = if step.shared {
            vec![(0..k_count).collect()]
        } else {
            (0..k_count).map(|i| vec![i]).collect()
        };
        for _sweep in 0..100 {
            for e in 0..n {
                for group in &groups {
                    let current = new_beams[group[0]].entries()[e];
                    let mut dir = Complex64::new(0.0, 0.0);
                    for i in group {
                        dir += slots[*i].element_direction(channels, order, weights, e, current);
                    }
                    if dir.norm() <= 1e-300 {
                        continue;
                    }
                    let theta_old = current.arg();
                    let swing = wrap_angle(dir.arg() - theta_old);
                    'damps: for damp in damps {
                        let cand = Complex64::from_polar(1.0, theta_old + damp * swing);
                        for d in full.iter_mut() {
                            *d = 0.0;
                        }
                        for i in group {
                            slots[*i].move_deltas(
                                channels, order, noise, e, current, cand, &mut scratch,
                            );
                            for k in *i..k_count {
                                full[k] += scratch[k];
                                scratch[k] = 0.0;
                            }
                        }
                        let weighted_gain: f64 = (0..k_count)
                            .map(|k| weights.map(|w| w[k]).unwrap_or(1.0) * full[k])
                            .sum();
                        if weighted_gain <= 0.0 {
                            // the full jump maximizes this element; a smaller
                            // step cannot beat a non-positive best gain
                            break 'damps;
                        }
                        if let Some(guard) = &step.guard {
                            let ok = (0..k_count)
                                .all(|k| full[k] >= 0.0 || surplus[k] + full[k] >= -guard[k].1);
                            if !ok {
                                continue 'damps;
                            }
                            for k in 0..k_count {
                                surplus[k] += full[k];
                            }
                        }
                        for i in group {
                            slots[*i].apply_move(channels, order, e, current, cand);
                            new_beams[*i].set_element(e, cand);
                        }
                        break 'damps;
                    }
                }
            }
            let total = weighted_total(&slots);
            debug_assert!(total >= prev_total - 1e-9 * prev_total.abs().max(1.0));
            if (total - prev_total).abs() < 1e-8 * prev_total.abs().max(1.0) {
                break;
            }
            prev_total = total;
        }
    }
    Ok((new_beams, weighted_total(&slots)))
}

/// Alternate auxiliary refreshes and beam passes until the surrogate total
/// stalls. Returns the optimized beams and the number of rounds.
pub fn optimize_beams(
    config: &SystemConfig,
    channels: &ChannelRealization,
    schedule: &Schedule,
    beams: Vec<BeamVector>,
    step: &BeamStep,
    tol: f64,
    max_rounds: usize,
) -> Result<(Vec<BeamVector>, usize)> {
    let mut beams = beams;
    let mut prev_total = f64::NEG_INFINITY;
    let mut rounds = 0;
    for _ in 0..max_rounds {
        let aux = fp_auxiliary_update(config, channels, schedule, &beams)?;
        let (next, total) = beamforming_update(config, channels, schedule, &aux, &beams, step)?;
        beams = next;
        rounds += 1;
        if total - prev_total < tol * total.abs().max(1.0) {
            break;
        }
        prev_total = total;
    }
    Ok((beams, rounds))
}
