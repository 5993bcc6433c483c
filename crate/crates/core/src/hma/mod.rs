//! The hybrid-protocol optimizer: device ordering, successive convex
//! approximation for time/power allocation, fractional-programming
//! beamforming, and the driver that ties them together with the
//! threshold shortcuts.

pub mod fp;
pub mod sca;

use crate::error::{Error, Result};
use crate::noma::{self, NomaSolution};
use crate::system::{
    aligned_beam, snr_gain, BeamVector, Budget, ChannelRealization, SystemConfig,
};
use crate::tdma::{self, TdmaSolution};
use crate::thresholds::{classify_regime, Regime, RegimeReport};

/// Slot durations and per-device slot energies under a fixed order.
///
/// `energies[k]` holds `z_{k,i} = tau_i * p_{k,i}` for slots `i <= k`,
/// where `k` is the order position. Powers are derived.
#[derive(Debug, Clone)]
pub struct Schedule {
    /// `order[q]` is the original index of the q-th ordered device.
    pub order: Vec<usize>,
    /// Slot durations, seconds.
    pub durations: Vec<f64>,
    /// Lower-triangular slot energies, joules.
    pub energies: Vec<Vec<f64>>,
}

impl Schedule {
    pub fn device_count(&self) -> usize {
        self.order.len()
    }

    /// Transmit power of order position `k` in slot `i` (watts).
    pub fn power(&self, k: usize, i: usize) -> f64 {
        let tau = self.durations[i];
        if tau <= 0.0 {
            return 0.0;
        }
        self.energies[k][i] / tau
    }

    pub fn sum_delay(&self) -> f64 {
        self.durations.iter().sum()
    }

    /// Completion time of each order position: the end of its own slot.
    pub fn completion_times(&self) -> Vec<f64> {
        let mut acc = 0.0;
        (0..self.device_count())
            .map(|k| {
                acc += self.durations[k];
                acc
            })
            .collect()
    }

    /// Total energy spent by order position `k`.
    pub fn spent_energy(&self, k: usize) -> f64 {
        self.energies[k].iter().sum()
    }

    /// One-device-per-slot schedule from a per-device solution.
    pub fn from_tdma(tdma: &TdmaSolution, order: &[usize]) -> Schedule {
        let durations: Vec<f64> = order.iter().map(|k| tdma.durations[*k]).collect();
        let energies = order
            .iter()
            .enumerate()
            .map(|(q, k)| {
                let mut row = vec![0.0; q + 1];
                row[q] = tdma.durations[*k] * tdma.powers[*k];
                row
            })
            .collect();
        Schedule {
            order: order.to_vec(),
            durations,
            energies,
        }
    }

    /// Single-slot schedule from an all-simultaneous solution.
    pub fn from_noma(sol: &NomaSolution) -> Schedule {
        let k_count = sol.order.len();
        let mut durations = vec![0.0; k_count];
        durations[0] = sol.duration;
        let energies = (0..k_count)
            .map(|k| {
                let mut row = vec![0.0; k + 1];
                row[0] = sol.duration * sol.powers[k];
                row
            })
            .collect();
        Schedule {
            order: sol.order.clone(),
            durations,
            energies,
        }
    }

    /// Check the structural invariants against a config (budgets, shapes).
    pub fn validate(&self, config: &SystemConfig, tol: f64) -> Result<()> {
        let k_count = self.device_count();
        if self.durations.len() != k_count || self.energies.len() != k_count {
            return Err(Error::Internal("schedule shape mismatch".into()));
        }
        for (k, row) in self.energies.iter().enumerate() {
            if row.len() != k + 1 {
                return Err(Error::Internal("schedule triangle mismatch".into()));
            }
        }
        if self.durations.iter().any(|t| *t < -tol) {
            return Err(Error::Internal("negative slot duration".into()));
        }
        match &config.budget {
            Budget::Power(p_max) => {
                for k in 0..k_count {
                    let cap = p_max[self.order[k]];
                    for i in 0..=k {
                        if self.energies[k][i] < -tol * cap {
                            return Err(Error::Internal("negative slot energy".into()));
                        }
                        if self.power(k, i) > cap * (1.0 + tol) {
                            return Err(Error::Internal(format!(
                                "power cap exceeded at ({k},{i})"
                            )));
                        }
                    }
                }
            }
            Budget::Energy(energy) => {
                for k in 0..k_count {
                    let cap = energy[self.order[k]];
                    if self.spent_energy(k) > cap * (1.0 + tol) {
                        return Err(Error::Internal(format!("energy cap exceeded at {k}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-device SNR under the one-device-per-slot solution; the ordering key.
pub fn tdma_snr(tdma: &TdmaSolution) -> Vec<f64> {
    tdma.powers
        .iter()
        .zip(&tdma.gains)
        .map(|(p, g)| p * g)
        .collect()
}

/// Ascending-SNR order; ties broken by original index.
pub fn propose_order(snr: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..snr.len()).collect();
    order.sort_by(|a, b| snr[*a].partial_cmp(&snr[*b]).unwrap().then(a.cmp(b)));
    order
}

/// Closed-form delay difference between the two orders of a two-device
/// power-limited system under aligned per-device beams: positive means
/// putting device 1 (index 1) first is better.
pub fn two_device_order_gap(
    config: &SystemConfig,
    channels: &ChannelRealization,
) -> Result<f64> {
    let Budget::Power(p_max) = &config.budget else {
        return Err(Error::InvalidConfig(
            "order gap is defined for the power regime".into(),
        ));
    };
    if config.device_count() != 2 {
        return Err(Error::InvalidConfig(format!(
            "order gap needs exactly 2 devices, got {}",
            config.device_count()
        )));
    }
    let v: Vec<BeamVector> = (0..2).map(|k| aligned_beam(&channels.composite[k])).collect();
    let g = |k: usize, beam: &BeamVector| snr_gain(&channels.composite[k], beam, config.noise_power);
    let g00 = g(0, &v[0])?;
    let g01 = g(0, &v[1])?;
    let g10 = g(1, &v[0])?;
    let g11 = g(1, &v[1])?;
    let l0 = config.normalized_target(0);
    let l1 = config.normalized_target(1);
    let numerator = l1 * (1.0 + p_max[0] * g01 / (1.0 + p_max[1] * g11)).log2()
        - l0 * (1.0 + p_max[1] * g10 / (1.0 + p_max[0] * g00)).log2();
    let denominator = (1.0 + p_max[0] * g00).log2() * (1.0 + p_max[1] * g11).log2();
    Ok(numerator / denominator)
}

/// How slot beams are treated during the alternating optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamMode {
    /// A separate beam per slot, optimized.
    Dynamic,
    /// One beam shared by every slot, optimized.
    Static,
    /// Beams fixed at their initial (aligned per-slot) values.
    Frozen,
}

/// How the device order is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderPolicy {
    /// Ascending SNR under the one-device-per-slot solution.
    Proposed,
    /// Descending SNR.
    Descending,
    /// Deterministic shuffle from the given seed.
    Random(u64),
    /// Caller-supplied order.
    Given(Vec<usize>),
    /// Try every permutation (device count capped) and keep the best.
    Exhaustive,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub beam_mode: BeamMode,
    pub order: OrderPolicy,
    /// Stop the outer loop when the fractional delay decrease falls below.
    pub outer_tol: f64,
    pub max_outer: usize,
    /// Surrogate-objective tolerance of the inner beam loop.
    pub fp_tol: f64,
    pub sca: sca::ScaSettings,
    /// Run the alternating loop even when a threshold shortcut applies.
    pub skip_shortcuts: bool,
    /// Tighten the final allocation after the outer loop converges.
    pub polish: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            beam_mode: BeamMode::Dynamic,
            order: OrderPolicy::Proposed,
            outer_tol: 1e-4,
            max_outer: 50,
            fp_tol: 1e-6,
            sca: sca::ScaSettings::default(),
            skip_shortcuts: false,
            polish: true,
        }
    }
}

/// Per-iteration diagnostics of the alternating loop.
#[derive(Debug, Clone, Default)]
pub struct AoTrace {
    /// Sum delay after the warm start and after each outer iteration.
    pub delays: Vec<f64>,
    pub fp_rounds: Vec<usize>,
    pub sca_rounds: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub regime: Regime,
    pub order: Vec<usize>,
    pub sum_delay: f64,
    pub outer_iterations: usize,
    pub converged: bool,
    pub trace: AoTrace,
    /// Worst relative shortfall of the throughput constraints, from the
    /// independent checker.
    pub qos_residual: f64,
    pub thresholds: RegimeReport,
}

#[derive(Debug, Clone)]
pub struct HmaSolution {
    pub schedule: Schedule,
    pub beams: Vec<BeamVector>,
    pub report: SolveReport,
}

fn ordered(policy: &OrderPolicy, snr: &[f64]) -> Vec<usize> {
    match policy {
        OrderPolicy::Proposed => propose_order(snr),
        OrderPolicy::Descending => {
            let mut o = propose_order(snr);
            o.reverse();
            o
        }
        OrderPolicy::Random(seed) => {
            let mut o: Vec<usize> = (0..snr.len()).collect();
            // Fisher-Yates with a splitmix stream
            let mut state = *seed ^ 0x51f15eed;
            for i in (1..o.len()).rev() {
                state = state
                    .wrapping_add(0x9E3779B97F4A7C15)
                    .wrapping_mul(0xBF58476D1CE4E5B9);
                let j = (state >> 16) as usize % (i + 1);
                o.swap(i, j);
            }
            o
        }
        OrderPolicy::Given(o) => o.clone(),
        OrderPolicy::Exhaustive => propose_order(snr), // handled by the driver
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for sub in permutations(k - 1) {
        for pos in 0..=sub.len() {
            let mut p = sub.clone();
            p.insert(pos, k - 1);
            out.push(p);
        }
    }
    out
}

/// One-device-per-slot reference solution under the requested beam mode.
/// In static mode every device is evaluated under the shared beam.
pub(crate) fn reference_tdma(
    config: &SystemConfig,
    channels: &ChannelRealization,
    mode: BeamMode,
) -> Result<TdmaSolution> {
    let mut sol = match &config.budget {
        Budget::Power(_) => tdma::tdma_power_limited(config, channels)?,
        Budget::Energy(_) => tdma::tdma_energy_limited(config, channels)?,
    };
    if mode != BeamMode::Static {
        return Ok(sol);
    }
    // shared beam: align to the weakest device's channel
    let weakest = sol
        .gains
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(k, _)| k)
        .unwrap();
    let shared = aligned_beam(&channels.composite[weakest]);
    for k in 0..config.device_count() {
        let gain = snr_gain(&channels.composite[k], &shared, config.noise_power)?;
        sol.gains[k] = gain;
        sol.beams[k] = shared.clone();
        match &config.budget {
            Budget::Power(p_max) => {
                sol.durations[k] = config.normalized_target(k) / (1.0 + p_max[k] * gain).log2();
            }
            Budget::Energy(energy) => {
                sol.durations[k] =
                    tdma::energy_limited_duration(config.normalized_target(k), energy[k], gain, k)?;
                sol.powers[k] = energy[k] / sol.durations[k];
            }
        }
    }
    sol.sum_delay = sol.durations.iter().sum();
    Ok(sol)
}

/// Solve the hybrid-protocol delay minimization end to end.
///
/// Pipeline: reference one-device-per-slot solve, ascending-SNR ordering,
/// single-slot solve, threshold classification with its shortcut branches,
/// and otherwise the alternating loop (inner beam optimization to
/// convergence, then the convexified allocation) until the fractional delay
/// decrease drops below the outer tolerance.
pub fn solve_hma(
    config: &SystemConfig,
    channels: &ChannelRealization,
    options: &SolveOptions,
) -> Result<HmaSolution> {
    config.validate()?;

    if let OrderPolicy::Exhaustive = options.order {
        let k = config.device_count();
        if k > 8 {
            return Err(Error::InvalidConfig(
                "exhaustive ordering is capped at 8 devices".into(),
            ));
        }
        let mut best: Option<HmaSolution> = None;
        for perm in permutations(k) {
            let mut opts = options.clone();
            opts.order = OrderPolicy::Given(perm);
            let sol = solve_hma(config, channels, &opts)?;
            if best
                .as_ref()
                .map(|b| sol.report.sum_delay < b.report.sum_delay)
                .unwrap_or(true)
            {
                best = Some(sol);
            }
        }
        return Ok(best.unwrap());
    }

    // (P2) feasibility gate: every device must be able to reach its target
    if let Budget::Energy(energy) = &config.budget {
        for k in 0..config.device_count() {
            let required = tdma::minimum_required_energy(config, channels, k)?;
            if energy[k] <= required {
                return Err(Error::InfeasibleEnergy {
                    device: k,
                    energy: energy[k],
                    required,
                });
            }
        }
    }

    let tdma_sol = reference_tdma(config, channels, options.beam_mode)?;
    let snr = tdma_snr(&tdma_sol);
    let order = ordered(&options.order, &snr);

    let noma_sol = match noma::solve_noma_ordered(config, channels, &order, options) {
        Ok(sol) => Some(sol),
        Err(Error::InfeasibleEnergy { .. }) => None,
        Err(e) => return Err(e),
    };

    let thresholds = classify_regime(
        config,
        channels,
        &order,
        noma_sol.as_ref().map(|s| &s.beam),
        &tdma_sol,
    )?;

    if !options.skip_shortcuts {
        match thresholds.regime {
            // the collapse argument presumes the single-slot solve found a
            // good beam; when it did not even beat the per-slot solution,
            // fall through to the full loop instead of trusting it
            Regime::PureNoma
                if noma_sol
                    .as_ref()
                    .is_some_and(|s| s.duration <= tdma_sol.sum_delay) =>
            {
                let sol = noma_sol.expect("pure-noma classification requires a solution");
                let mut schedule = Schedule::from_noma(&sol);
                pin_last_row(config, &mut schedule);
                return Ok(finish_shortcut(
                    config,
                    channels,
                    schedule,
                    noma_beams(&sol, config.device_count()),
                    thresholds,
                    sol.delay_trace.clone(),
                ));
            }
            Regime::PureNoma => {}
            Regime::PureTdma => {
                let schedule = Schedule::from_tdma(&tdma_sol, &order);
                let beams: Vec<BeamVector> =
                    order.iter().map(|k| tdma_sol.beams[*k].clone()).collect();
                return Ok(finish_shortcut(
                    config,
                    channels,
                    schedule,
                    beams,
                    thresholds,
                    vec![tdma_sol.sum_delay],
                ));
            }
            Regime::Hybrid => {}
        }
    }

    // ---- alternating optimization.
    //
    // Two descent paths share the machinery. The stepped path descends from
    // the one-device-per-slot warm start, first with the beams held (so the
    // fixed-beam optimum is always reached), then continuing with beam
    // passes: the final delay can only improve on the fixed-beam result.
    // The flat path restarts from the single-slot point when that point
    // beats the stepped result; descent from it keeps the result at or
    // below the single-slot delay. The better path wins.
    let tdma_beams: Vec<BeamVector> = order.iter().map(|k| tdma_sol.beams[*k].clone()).collect();
    let stepped_warm = Schedule::from_tdma(&tdma_sol, &order);

    let mut run = descend(
        config,
        channels,
        options,
        stepped_warm,
        tdma_beams.clone(),
        BeamMode::Frozen,
        AoTrace::default(),
    )?;
    if options.beam_mode != BeamMode::Frozen {
        let frozen_point = run.schedule.clone();
        run = descend(
            config,
            channels,
            options,
            frozen_point,
            tdma_beams.clone(),
            options.beam_mode,
            run.trace,
        )?;
    }

    // single-slot restart, under a beam compatible with the mode
    let single_slot = match options.beam_mode {
        BeamMode::Dynamic | BeamMode::Static => noma_sol.clone(),
        BeamMode::Frozen => {
            match noma::noma_min_delay_fixed_beam(config, channels, &order, &tdma_beams[0]) {
                Ok(sol) => Some(sol),
                Err(Error::InfeasibleEnergy { .. }) => None,
                Err(e) => return Err(e),
            }
        }
    };
    // a duration-capped study may exclude the single-slot point outright
    let caps_allow_single_slot = options
        .sca
        .duration_caps
        .first()
        .copied()
        .flatten()
        .map(|cap| single_slot.as_ref().is_some_and(|s| s.duration <= cap))
        .unwrap_or(true);
    if let Some(single) = single_slot.filter(|_| caps_allow_single_slot) {
        if single.duration < run.schedule.sum_delay() {
            let mut flat_warm = Schedule::from_noma(&single);
            pin_last_row(config, &mut flat_warm);
            let mut flat_beams = tdma_beams.clone();
            match options.beam_mode {
                BeamMode::Static => flat_beams = vec![single.beam.clone(); order.len()],
                _ => flat_beams[0] = single.beam.clone(),
            }
            let mut flat_trace = AoTrace::default();
            flat_trace.delays.push(single.duration);
            let flat = descend(
                config,
                channels,
                options,
                flat_warm,
                flat_beams,
                options.beam_mode,
                flat_trace,
            )?;
            if flat.schedule.sum_delay() < run.schedule.sum_delay() {
                run = flat;
            }
        }
    }

    // among equal-delay schedules, prefer earlier per-device completions
    let mut schedule =
        sca::completion_polish(config, channels, &run.beams, &run.schedule, &options.sca)?;
    pin_last_row(config, &mut schedule);
    tighten_powers(config, channels, &run.beams, &mut schedule)?;

    let qos_residual = sca::qos_shortfall(config, channels, &schedule, &run.beams)?;
    let report = SolveReport {
        regime: thresholds.regime,
        order: schedule.order.clone(),
        sum_delay: schedule.sum_delay(),
        outer_iterations: run.outer,
        converged: run.converged,
        trace: run.trace,
        qos_residual,
        thresholds,
    };
    Ok(HmaSolution {
        schedule,
        beams: run.beams,
        report,
    })
}

struct Descent {
    schedule: Schedule,
    beams: Vec<BeamVector>,
    trace: AoTrace,
    outer: usize,
    converged: bool,
}

/// Monotone alternating descent from a feasible warm point: beam passes
/// (unless the mode holds them) followed by the convexified allocation,
/// until the fractional delay decrease stalls, plus a tight final polish.
fn descend(
    config: &SystemConfig,
    channels: &ChannelRealization,
    options: &SolveOptions,
    warm: Schedule,
    warm_beams: Vec<BeamVector>,
    mode: BeamMode,
    mut trace: AoTrace,
) -> Result<Descent> {
    let mut schedule = warm;
    let mut beams = warm_beams;
    if trace.delays.is_empty() {
        trace.delays.push(schedule.sum_delay());
    }
    let feas_gate = 100.0 * options.sca.convex.feas_tol;
    let mut converged = false;
    let mut outer = 0;
    let mut beams_stalled = false;
    while outer < options.max_outer {
        outer += 1;
        let prev = schedule.sum_delay();
        let mut fp_rounds = 0;
        let mut sca_rounds = 0;
        let mut stepped = false;
        if mode != BeamMode::Frozen && !beams_stalled {
            let step = beam_step(config, channels, &schedule, &beams, mode)?;
            let (cand_beams, rounds) = fp::optimize_beams(
                config,
                channels,
                &schedule,
                beams.clone(),
                &step,
                options.fp_tol,
                60,
            )?;
            fp_rounds = rounds;
            // the beam pass may shave one device's margin; the allocation
            // step restores it, and the pair is accepted only if the
            // restored delay does not regress
            let (cand_schedule, rounds) = sca::sca_resource_allocation(
                config,
                channels,
                &cand_beams,
                &schedule,
                &options.sca,
            )?;
            let feasible =
                sca::qos_shortfall(config, channels, &cand_schedule, &cand_beams)? <= feas_gate;
            if feasible && cand_schedule.sum_delay() <= prev * (1.0 + 1e-12) {
                beams = cand_beams;
                schedule = cand_schedule;
                sca_rounds = rounds;
                stepped = true;
            } else {
                // a rejected beam pass would only be re-derived; stop trying
                beams_stalled = true;
            }
        }
        if !stepped {
            let (next, rounds) =
                sca::sca_resource_allocation(config, channels, &beams, &schedule, &options.sca)?;
            sca_rounds = rounds;
            if next.sum_delay() <= prev {
                schedule = next;
            }
        }
        let delay = schedule.sum_delay();
        trace.delays.push(delay);
        trace.fp_rounds.push(fp_rounds);
        trace.sca_rounds.push(sca_rounds);
        if prev - delay < options.outer_tol * prev.max(1e-12) {
            converged = true;
            break;
        }
    }

    if options.polish {
        let mut tight = options.sca.clone();
        tight.tol = (options.sca.tol * 1e-4).max(1e-12);
        tight.max_rounds = options.sca.max_rounds.max(30);
        let (polished, rounds) =
            sca::sca_resource_allocation(config, channels, &beams, &schedule, &tight)?;
        if polished.sum_delay() <= schedule.sum_delay() {
            schedule = polished;
        }
        trace.delays.push(schedule.sum_delay());
        trace.fp_rounds.push(0);
        trace.sca_rounds.push(rounds);
    }

    Ok(Descent {
        schedule,
        beams,
        trace,
        outer,
        converged,
    })
}

fn noma_beams(sol: &NomaSolution, k_count: usize) -> Vec<BeamVector> {
    vec![sol.beam.clone(); k_count]
}

/// Scale each device's slot energies down until its throughput constraint
/// is met with equality, in ascending order positions so every trim only
/// adds slack downstream. The delay is untouched; the pinned last device
/// keeps its cap in the power regime (its excess interferes with nobody).
fn tighten_powers(
    config: &SystemConfig,
    channels: &ChannelRealization,
    beams: &[BeamVector],
    schedule: &mut Schedule,
) -> Result<()> {
    let k_count = schedule.device_count();
    let skip_last = config.budget.is_power();
    for q in 0..k_count {
        if skip_last && q + 1 == k_count {
            continue;
        }
        let target = config.normalized_target(schedule.order[q]);
        let throughput_at = |alpha: f64, schedule: &Schedule| -> Result<f64> {
            let mut total = 0.0;
            for i in 0..=q {
                let tau = schedule.durations[i];
                if tau <= 0.0 {
                    continue;
                }
                let own = alpha
                    * schedule.power(q, i)
                    * snr_gain(&channels.composite[schedule.order[q]], &beams[i], config.noise_power)?;
                let mut interference = 0.0;
                for j in i..q {
                    interference += schedule.power(j, i)
                        * snr_gain(
                            &channels.composite[schedule.order[j]],
                            &beams[i],
                            config.noise_power,
                        )?;
                }
                total += tau * (1.0 + own / (1.0 + interference)).log2();
            }
            Ok(total)
        };
        let full = throughput_at(1.0, schedule)?;
        if full <= target * (1.0 + 1e-12) {
            continue;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if throughput_at(mid, schedule)? >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        for e in schedule.energies[q].iter_mut() {
            *e *= hi;
        }
    }
    Ok(())
}

/// Maximum-power transmission is optimal for the last ordered device in the
/// power regime: after cancellation its signal interferes with nobody, so
/// raising it is free. Applied to every power-regime schedule the driver
/// hands out or warm-starts from.
fn pin_last_row(config: &SystemConfig, schedule: &mut Schedule) {
    if let Budget::Power(p_max) = &config.budget {
        let last = schedule.device_count() - 1;
        let cap = p_max[schedule.order[last]];
        for i in 0..schedule.energies[last].len() {
            schedule.energies[last][i] = schedule.durations[i] * cap;
        }
    }
}

/// Delay-aware beam pass controls: each device is weighted by its own-slot
/// time cost per bit, and no device's surrogate may dip more than a few
/// percent below its target before the allocation step restores it.
fn beam_step(
    config: &SystemConfig,
    channels: &ChannelRealization,
    schedule: &Schedule,
    beams: &[BeamVector],
    mode: BeamMode,
) -> Result<fp::BeamStep> {
    let k_count = schedule.device_count();
    let mut weights = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let gain = snr_gain(
            &channels.composite[schedule.order[k]],
            &beams[k],
            config.noise_power,
        )?;
        let rate = (1.0 + schedule.power(k, k) * gain).log2();
        weights.push(if rate > 1e-9 { 1.0 / rate } else { 0.0 });
    }
    let max_w = weights.iter().fold(0.0_f64, |a, w| a.max(*w));
    let fallback = if max_w > 0.0 { max_w } else { 1.0 };
    let mut sum = 0.0;
    for w in weights.iter_mut() {
        if *w == 0.0 {
            *w = fallback;
        }
        sum += *w;
    }
    let mean = sum / k_count as f64;
    for w in weights.iter_mut() {
        *w /= mean;
    }
    let guard: Vec<(f64, f64)> = (0..k_count)
        .map(|k| {
            let t = config.normalized_target(schedule.order[k]);
            (t, 0.05 * t)
        })
        .collect();
    Ok(fp::BeamStep {
        shared: mode == BeamMode::Static,
        weights: Some(weights),
        guard: Some(guard),
    })
}

fn finish_shortcut(
    config: &SystemConfig,
    channels: &ChannelRealization,
    schedule: Schedule,
    beams: Vec<BeamVector>,
    thresholds: RegimeReport,
    delays: Vec<f64>,
) -> HmaSolution {
    let qos_residual =
        sca::qos_shortfall(config, channels, &schedule, &beams).unwrap_or(f64::INFINITY);
    let report = SolveReport {
        regime: thresholds.regime,
        order: schedule.order.clone(),
        sum_delay: schedule.sum_delay(),
        outer_iterations: 0,
        converged: true,
        trace: AoTrace {
            delays,
            fp_rounds: Vec::new(),
            sca_rounds: Vec::new(),
        },
        qos_residual,
        thresholds,
    };
    HmaSolution {
        schedule,
        beams,
        report,
    }
}
