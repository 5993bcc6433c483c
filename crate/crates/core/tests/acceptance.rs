//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured figures once its assertions hold.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use common::{asymmetric_pair, base_config, random_power_instance, uniform};
use irs_hma::config;
use irs_hma::experiments::{run_scenario, IrsMode, Protocol};
use irs_hma::hma::{self, solve_hma, BeamMode, OrderPolicy, SolveOptions};
use irs_hma::numerics::bisect;
use irs_hma::system::{
    effective_channel, generate_channels, snr_gain, BeamVector, Budget, ChannelRealization,
    SystemConfig,
};
use irs_hma::tdma;
use irs_hma::thresholds::{self, Regime};
use irs_hma::noma;

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

/// Criterion 1: the Lambert-W duration matches a bisection oracle on
/// tau log2(1 + (E/tau) gamma) = target to 1e-8 relative, 1000 instances,
/// under a second.
#[test]
fn criterion_01_lambert_closed_form_vs_oracle() {
    let start = Instant::now();
    let mut state = 0x1234u64;
    let mut worst = 0.0_f64;
    for trial in 0..1000 {
        let target = 0.05 + 8.0 * uniform(&mut state);
        let gamma = 10f64.powf(-2.0 + 6.0 * uniform(&mut state));
        // energy strictly above the infinite-duration requirement
        let e_min = target * std::f64::consts::LN_2 / gamma;
        let energy = e_min * (1.0 + 1e-3 + 20.0 * uniform(&mut state));
        let closed = tdma::energy_limited_duration(target, energy, gamma, 0).unwrap();
        let f = |tau: f64| tau * (1.0 + energy * gamma / tau).log2() - target;
        let oracle = bisect(f, 1e-12, 1e9, 1e-14).unwrap();
        let rel = (closed - oracle).abs() / oracle;
        worst = worst.max(rel);
        assert!(
            rel <= 1e-8,
            "trial {trial}: closed {closed} vs oracle {oracle} (rel {rel:.3e})"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "took {elapsed:?}, budget is 1 s"
    );
    println!(
        "PASS criterion 1: Lambert-W vs bisection oracle, 1000 instances, worst rel err {worst:.2e}, {elapsed:?}"
    );
}

/// Criterion 2: on 200 random 2-4 device power instances the hybrid beats
/// the per-slot protocol under shared beams, and optimizing beams never
/// hurts: dyn <= frozen <= tdma with at most 1e-9 slack.
#[test]
fn criterion_02_superiority_chain() {
    let start = Instant::now();
    let mut worst_gap = f64::INFINITY;
    for seed in 0..200u64 {
        let cfg = random_power_instance(seed.wrapping_add(1000), 4);
        let ch = generate_channels(&cfg).unwrap();
        let dynamic = solve_hma(&cfg, &ch, &SolveOptions::default()).unwrap();
        let frozen = solve_hma(
            &cfg,
            &ch,
            &SolveOptions {
                beam_mode: BeamMode::Frozen,
                ..Default::default()
            },
        )
        .unwrap();
        let tdma_sol = tdma::tdma_power_limited(&cfg, &ch).unwrap();
        assert!(
            frozen.report.sum_delay < tdma_sol.sum_delay,
            "seed {seed}: frozen {} not below tdma {}",
            frozen.report.sum_delay,
            tdma_sol.sum_delay
        );
        assert!(
            dynamic.report.sum_delay <= frozen.report.sum_delay + 1e-9,
            "seed {seed}: dynamic {} above frozen {}",
            dynamic.report.sum_delay,
            frozen.report.sum_delay
        );
        worst_gap = worst_gap.min(tdma_sol.sum_delay - frozen.report.sum_delay);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}, budget 5 min");
    println!(
        "PASS criterion 2: chain dyn <= frozen < tdma on 200 instances, smallest tdma-frozen gap {worst_gap:.3e} s, {elapsed:?}"
    );
}

fn pair_for_threshold_study(seed: u64) -> (SystemConfig, ChannelRealization) {
    let mut cfg = base_config(
        vec![[20.0, 0.0, 0.0], [40.0, 0.0, 0.0]],
        Budget::Power(vec![3.16e-3, 3.16e-3]),
        vec![200e3, 100e3],
    );
    cfg.irs_elements = 12;
    cfg.rng_seed = seed;
    let ch = generate_channels(&cfg).unwrap();
    (cfg, ch)
}

/// Criterion 3: second-position targets at 0.9x and 1.1x the single-slot
/// threshold collapse to the single-slot optimum and strictly beat it,
/// respectively.
#[test]
fn criterion_03_throughput_threshold_sides() {
    for seed in [11u64, 29, 57] {
        let (cfg, ch) = pair_for_threshold_study(seed);
        // threshold evaluated at the optimized single-slot beam
        let tdma_sol = tdma::tdma_power_limited(&cfg, &ch).unwrap();
        let order = hma::propose_order(&hma::tdma_snr(&tdma_sol));
        let noma_sol = noma::solve_noma(&cfg, &ch, &order).unwrap();
        let l_no = thresholds::noma_throughput_threshold(&cfg, &ch, &order, &noma_sol.beam, 1)
            .unwrap();

        for (factor, expect_equal) in [(0.9, true), (1.1, false)] {
            let mut test_cfg = cfg.clone();
            test_cfg.targets_bits[order[1]] = factor * l_no;
            let ch = generate_channels(&test_cfg).unwrap();
            let sol = solve_hma(&test_cfg, &ch, &SolveOptions::default()).unwrap();
            let noma_ref = noma::solve_noma(&test_cfg, &ch, &sol.report.order).unwrap();
            let rel = (sol.report.sum_delay - noma_ref.duration) / noma_ref.duration;
            if expect_equal {
                assert!(
                    rel.abs() <= 1e-6,
                    "seed {seed}: below threshold, |hma-noma| rel {rel:.3e}"
                );
            } else {
                assert!(
                    -rel > 1e-6,
                    "seed {seed}: above threshold, hybrid margin {:.3e} too small",
                    -rel
                );
            }
        }
    }
    println!("PASS criterion 3: 0.9x target collapses to single-slot (<=1e-6), 1.1x strictly improves (>1e-6 margin), 3 seeds");
}

/// Criterion 4: energy budgets at 0.9x the per-slot threshold, midway, and
/// 1.1x the single-slot threshold classify as the three regimes with the
/// matching delay relations.
#[test]
fn criterion_04_energy_regime_bands() {
    // seeds chosen so the draw has a non-degenerate band between the
    // per-slot and single-slot thresholds (the construction presumes one)
    for seed in [1u64, 3] {
        let mut cfg = base_config(
            vec![[20.0, 0.0, 0.0], [40.0, 0.0, 0.0]],
            Budget::Energy(vec![0.1, 0.05]),
            vec![2000e3, 200e3],
        );
        cfg.irs_elements = 12;
        cfg.rng_seed = seed;
        let ch = generate_channels(&cfg).unwrap();
        let tdma_sol = tdma::tdma_energy_limited(&cfg, &ch).unwrap();
        let order = hma::propose_order(&hma::tdma_snr(&tdma_sol));
        let noma_sol = noma::solve_noma(&cfg, &ch, &order).unwrap();
        let e_no =
            thresholds::noma_energy_threshold(&cfg, &ch, &order, &noma_sol.beam, 1).unwrap();
        let e_td =
            thresholds::tdma_energy_threshold(&cfg, &ch, &order, &tdma_sol, 1).unwrap();
        assert!(e_td < e_no, "seed {seed}: thresholds out of order");
        let device = order[1];

        let run = |e2: f64| {
            let mut c = cfg.clone();
            let Budget::Energy(energy) = &mut c.budget else { unreachable!() };
            energy[device] = e2;
            let ch = generate_channels(&c).unwrap();
            let sol = solve_hma(&c, &ch, &SolveOptions::default()).unwrap();
            let tdma_ref = tdma::tdma_energy_limited(&c, &ch).unwrap();
            let noma_ref = noma::solve_noma(&c, &ch, &sol.report.order).unwrap();
            (sol, tdma_ref, noma_ref)
        };
        // the single-slot threshold moves with the instance's own optimized
        // beam, so anchor the construction at its fixed point
        let fresh_e_no = |e2: f64| {
            let mut c = cfg.clone();
            let Budget::Energy(energy) = &mut c.budget else { unreachable!() };
            energy[device] = e2;
            let ch = generate_channels(&c).unwrap();
            let t = tdma::tdma_energy_limited(&c, &ch).unwrap();
            let o = hma::propose_order(&hma::tdma_snr(&t));
            let n = noma::solve_noma(&c, &ch, &o).unwrap();
            thresholds::noma_energy_threshold(&c, &ch, &o, &n.beam, 1).unwrap()
        };

        // low budget: per-slot transmission is optimal
        let (sol, tdma_ref, _) = run(0.9 * e_td);
        assert_eq!(sol.report.regime, Regime::PureTdma, "seed {seed} low band");
        let rel = (sol.report.sum_delay - tdma_ref.sum_delay).abs() / tdma_ref.sum_delay;
        assert!(rel <= 1e-6, "seed {seed}: low-band equality rel {rel:.3e}");

        // midway: strictly hybrid (anchored at the band's fixed point)
        let mut e_mid = 0.5 * (e_td + e_no);
        for _ in 0..6 {
            let next = 0.5 * (e_td + fresh_e_no(e_mid));
            if (next - e_mid).abs() <= 1e-3 * e_mid {
                e_mid = next;
                break;
            }
            e_mid = next;
        }
        let (sol, tdma_ref, noma_ref) = run(e_mid);
        assert_eq!(sol.report.regime, Regime::Hybrid, "seed {seed} mid band");
        let best = tdma_ref.sum_delay.min(noma_ref.duration);
        assert!(
            sol.report.sum_delay < best * (1.0 - 1e-6),
            "seed {seed}: hybrid {} not strictly below min(tdma, noma) {}",
            sol.report.sum_delay,
            best
        );

        // high budget: single-slot transmission is optimal
        let mut e_high = 1.1 * e_no;
        for _ in 0..6 {
            let next = 1.1 * fresh_e_no(e_high);
            if (next - e_high).abs() <= 1e-3 * e_high {
                e_high = next;
                break;
            }
            e_high = next;
        }
        let (sol, _, noma_ref) = run(e_high);
        assert_eq!(sol.report.regime, Regime::PureNoma, "seed {seed} high band");
        let rel = (sol.report.sum_delay - noma_ref.duration).abs() / noma_ref.duration;
        assert!(rel <= 1e-6, "seed {seed}: high-band equality rel {rel:.3e}");
    }
    println!("PASS criterion 4: 0.9x per-slot / midway / 1.1x single-slot budgets classify per-slot / hybrid / single-slot with matching delays, 2 seeds");
}

/// Criterion 5: a two-device, two-element instance solved within 2% of an
/// exhaustive search over 16-level phase grids with the time variable
/// scanned at fine resolution.
#[test]
fn criterion_05_brute_force_oracle() {
    let start = Instant::now();
    let mut cfg = base_config(
        vec![[20.0, 0.0, 0.0], [40.0, 0.0, 0.0]],
        Budget::Power(vec![3.16e-3, 3.16e-3]),
        vec![200e3, 300e3],
    );
    cfg.irs_elements = 2;
    cfg.rng_seed = 13;
    let ch = generate_channels(&cfg).unwrap();
    let Budget::Power(p_max) = &cfg.budget else {
        unreachable!()
    };

    let levels = 16;
    let beams: Vec<BeamVector> = (0..levels * levels)
        .map(|idx| {
            let t1 = std::f64::consts::TAU * (idx / levels) as f64 / levels as f64;
            let t2 = std::f64::consts::TAU * (idx % levels) as f64 / levels as f64;
            BeamVector::from_phases(&[t1, t2])
        })
        .collect();

    // exhaustive minimum over both orders, all first-slot beams, the best
    // second-slot beam, and a fine scan of the first slot duration; the
    // first device's power follows from its tight rate equation and the
    // second (last) device transmits at peak power throughout
    let mut oracle = f64::INFINITY;
    for order in [[0usize, 1], [1usize, 0]] {
        let l1 = cfg.normalized_target(order[0]);
        let l2 = cfg.normalized_target(order[1]);
        let p1_cap = p_max[order[0]];
        let p2 = p_max[order[1]];
        // best own-slot beam for the second device
        let g22_best = beams
            .iter()
            .map(|v| snr_gain(&ch.composite[order[1]], v, cfg.noise_power).unwrap())
            .fold(0.0_f64, f64::max);
        let r22 = (1.0 + p2 * g22_best).log2();
        for v1 in &beams {
            let g1 = snr_gain(&ch.composite[order[0]], v1, cfg.noise_power).unwrap();
            let g2 = snr_gain(&ch.composite[order[1]], v1, cfg.noise_power).unwrap();
            let tau1_min = l1 / (1.0 + p1_cap * g1).log2();
            // beyond the duration where the second device finishes inside
            // the first slot there is nothing left to gain
            let tau1_max = 4.0 * (tau1_min + l2 / r22);
            let steps = 2000;
            for s in 0..=steps {
                let tau1 = tau1_min + (tau1_max - tau1_min) * s as f64 / steps as f64;
                // first device's rate constraint holds with equality
                let p1 = ((l1 / tau1).exp2() - 1.0) / g1;
                let r21 = (1.0 + p2 * g2 / (1.0 + p1 * g1)).log2();
                let tau2 = (l2 - tau1 * r21).max(0.0) / r22;
                oracle = oracle.min(tau1 + tau2);
            }
        }
    }

    let sol = solve_hma(&cfg, &ch, &SolveOptions::default()).unwrap();
    let rel = (sol.report.sum_delay - oracle) / oracle;
    let elapsed = start.elapsed();
    assert!(
        rel.abs() <= 0.02,
        "solver {} vs oracle {} (rel {rel:.4})",
        sol.report.sum_delay,
        oracle
    );
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}, budget 10 min");
    println!(
        "PASS criterion 5: solver {:.6e} vs grid oracle {:.6e} (rel {rel:.2e}), {elapsed:?}",
        sol.report.sum_delay, oracle
    );
}

/// Criterion 6: the closed-form order gap predicts the better of the two
/// decode orders (validated by solving both with aligned beams) on at least
/// 95 of 100 asymmetric pairs.
#[test]
fn criterion_06_order_gap_sign_prediction() {
    let start = Instant::now();
    let mut agree = 0;
    let total = 100u64;
    for seed in 0..total {
        let cfg = asymmetric_pair(seed.wrapping_add(500));
        let ch = generate_channels(&cfg).unwrap();
        let gap = hma::two_device_order_gap(&cfg, &ch).unwrap();
        let solve_order = |order: Vec<usize>| {
            solve_hma(
                &cfg,
                &ch,
                &SolveOptions {
                    beam_mode: BeamMode::Frozen,
                    order: OrderPolicy::Given(order),
                    skip_shortcuts: true,
                    ..Default::default()
                },
            )
            .unwrap()
            .report
            .sum_delay
        };
        let forward = solve_order(vec![0, 1]);
        let reverse = solve_order(vec![1, 0]);
        let solved_prefers_reverse = reverse < forward;
        let tie = (forward - reverse).abs() <= 1e-9 * forward.max(reverse);
        if tie || (gap > 0.0) == solved_prefers_reverse {
            agree += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(
        agree * 100 >= 95 * total,
        "sign agreement {agree}/{total} below 95%"
    );
    println!("PASS criterion 6: order-gap sign agreement {agree}/{total}, {elapsed:?}");
}

/// Criterion 7: every bundled scenario terminates within 50 outer
/// iterations with a nonincreasing delay trace.
#[test]
fn criterion_07_bundled_scenarios_terminate_monotone() {
    let start = Instant::now();
    let dir = scenarios_dir();
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    files.sort();
    assert!(!files.is_empty(), "no bundled scenarios in {dir:?}");
    let mut runs = 0;
    for file in &files {
        let scenario = config::load_scenario(file).unwrap();
        let grid: Vec<Option<f64>> = if scenario.values.is_empty() {
            vec![None]
        } else {
            scenario.values.iter().copied().map(Some).collect()
        };
        for spec in scenario
            .baselines
            .iter()
            .filter(|b| b.protocol == Protocol::Hma)
        {
            for value in &grid {
                for draw in 0..2u64 {
                    let mut cfg = match value {
                        Some(v) => apply_sweep(&scenario, *v),
                        None => scenario.template.clone(),
                    };
                    cfg.rng_seed = scenario.seed_base + draw;
                    if spec.irs == IrsMode::None {
                        cfg = cfg.without_irs();
                    }
                    let ch = generate_channels(&cfg).unwrap();
                    let options = SolveOptions {
                        beam_mode: if spec.irs == IrsMode::Static {
                            BeamMode::Static
                        } else {
                            BeamMode::Dynamic
                        },
                        order: match spec.order {
                            irs_hma::experiments::OrderChoice::Descending => {
                                OrderPolicy::Descending
                            }
                            irs_hma::experiments::OrderChoice::Random => {
                                OrderPolicy::Random(cfg.rng_seed)
                            }
                            _ => OrderPolicy::Proposed,
                        },
                        ..Default::default()
                    };
                    let sol = solve_hma(&cfg, &ch, &options).unwrap();
                    runs += 1;
                    assert!(
                        sol.report.outer_iterations <= 50,
                        "{file:?}: {} outer iterations",
                        sol.report.outer_iterations
                    );
                    assert!(sol.report.converged, "{file:?}: did not converge");
                    for pair in sol.report.trace.delays.windows(2) {
                        assert!(
                            pair[1] <= pair[0] + 1e-12 * pair[0].max(1.0),
                            "{file:?}: trace not monotone: {:?}",
                            sol.report.trace.delays
                        );
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    println!(
        "PASS criterion 7: {} hybrid runs across {} bundled scenarios, all converged within 50 iterations with monotone traces, {elapsed:?}",
        runs,
        files.len()
    );
}

fn apply_sweep(scenario: &irs_hma::experiments::Scenario, value: f64) -> SystemConfig {
    use irs_hma::experiments::SweepVariable;
    let mut cfg = scenario.template.clone();
    match &scenario.sweep {
        SweepVariable::None => {}
        SweepVariable::TargetBits { device } => cfg.targets_bits[*device] = value,
        SweepVariable::EnergyJoules { device } => {
            if let Budget::Energy(e) = &mut cfg.budget {
                e[*device] = value;
            }
        }
        SweepVariable::AlphaCascaded => cfg.alpha_cascaded = value,
        SweepVariable::IrsElements => cfg.irs_elements = value as usize,
        SweepVariable::DeviceCount => {
            let k = value as usize;
            cfg.device_pos.truncate(k);
            cfg.targets_bits.truncate(k);
            match &mut cfg.budget {
                Budget::Power(p) => p.truncate(k),
                Budget::Energy(e) => e.truncate(k),
            }
        }
    }
    cfg
}

/// Criterion 8: over the element-count sweep at 50 draws, the dynamic-beam
/// mean delay strictly decreases with the element count, and at every count
/// dynamic <= static <= no-surface.
#[test]
fn criterion_08_element_count_trend() {
    let start = Instant::now();
    let mut scenario = config::load_scenario(&scenarios_dir().join("irs_size_sweep.toml")).unwrap();
    scenario.draws = 50;
    let (_rows, summary) = run_scenario(&scenario).unwrap();
    let mean = |baseline: &str, value: f64| {
        summary
            .iter()
            .find(|s| s.baseline == baseline && s.sweep_value == Some(value))
            .map(|s| s.mean_delay)
            .unwrap()
    };
    let counts = [10.0, 20.0, 40.0, 80.0];
    for pair in counts.windows(2) {
        let a = mean("hma:d:pro", pair[0]);
        let b = mean("hma:d:pro", pair[1]);
        assert!(
            b < a,
            "dynamic mean not strictly decreasing: {a} at {} vs {b} at {}",
            pair[0],
            pair[1]
        );
    }
    for n in counts {
        let d = mean("hma:d:pro", n);
        let s = mean("hma:s:pro", n);
        let none = mean("hma:no:pro", n);
        assert!(d <= s * (1.0 + 1e-9), "N={n}: dynamic {d} above static {s}");
        assert!(s <= none * (1.0 + 1e-9), "N={n}: static {s} above no-surface {none}");
    }
    let elapsed = start.elapsed();
    println!(
        "PASS criterion 8: dynamic mean strictly decreasing over N in {counts:?} and dynamic <= static <= none at every N (50 draws), {elapsed:?}"
    );
}

/// Criterion 9: on the ten-device line instances, per-device completion
/// times under the hybrid schedule beat the per-slot protocol's for at
/// least 95% of device-draw pairs. The device-centric claim compares the
/// protocols at the same order and beams, so the hybrid runs with its beams
/// held at the per-slot aligned set; the comparison uses the same 1e-6
/// relative tolerance as the delay equalities.
#[test]
fn criterion_09_device_centric_completion() {
    let start = Instant::now();
    let mut pairs = 0;
    let mut dominated = 0;
    for file in [
        "ten_device_energy_orders.toml",
        "ten_device_power_orders.toml",
    ] {
        let scenario = config::load_scenario(&scenarios_dir().join(file)).unwrap();
        for draw in 0..5u64 {
            let mut cfg = scenario.template.clone();
            cfg.rng_seed = scenario.seed_base + draw;
            let ch = generate_channels(&cfg).unwrap();
            let sol = solve_hma(
                &cfg,
                &ch,
                &SolveOptions {
                    beam_mode: BeamMode::Frozen,
                    ..Default::default()
                },
            )
            .unwrap();
            let tdma_sol = match &cfg.budget {
                Budget::Power(_) => tdma::tdma_power_limited(&cfg, &ch).unwrap(),
                Budget::Energy(_) => tdma::tdma_energy_limited(&cfg, &ch).unwrap(),
            };
            let tdma_completion = tdma_sol.completion_times(&sol.report.order);
            for (hma_t, tdma_t) in sol
                .schedule
                .completion_times()
                .iter()
                .zip(&tdma_completion)
            {
                pairs += 1;
                if *hma_t <= tdma_t * (1.0 + 1e-6) {
                    dominated += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(
        dominated * 100 >= 95 * pairs,
        "completion dominance {dominated}/{pairs} below 95%"
    );
    println!(
        "PASS criterion 9: per-device completion dominance {dominated}/{pairs} pairs at matched beams, {elapsed:?}"
    );
}

/// Criterion 10: in every power-regime run the last ordered device's slot
/// energies are pinned to maximum-power transmission.
#[test]
fn criterion_10_last_device_peak_power_pin() {
    let mut runs = 0;
    for seed in 0..30u64 {
        let cfg = random_power_instance(seed.wrapping_add(9000), 4);
        let ch = generate_channels(&cfg).unwrap();
        let sol = solve_hma(&cfg, &ch, &SolveOptions::default()).unwrap();
        let Budget::Power(p_max) = &cfg.budget else {
            unreachable!()
        };
        let last = sol.schedule.device_count() - 1;
        let cap = p_max[sol.schedule.order[last]];
        for i in 0..sol.schedule.device_count() {
            assert_eq!(
                sol.schedule.energies[last][i],
                sol.schedule.durations[i] * cap,
                "seed {seed}: slot {i} energy not pinned"
            );
            if sol.schedule.durations[i] > 0.0 {
                let p = sol.schedule.power(last, i);
                assert!(
                    (p - cap).abs() <= 4.0 * f64::EPSILON * cap,
                    "seed {seed}: slot {i} power {p} vs cap {cap}"
                );
            }
        }
        runs += 1;
    }
    println!("PASS criterion 10: last-device peak-power pin held in {runs}/30 power-regime runs");
}

/// Supporting check for criterion 5's oracle reduction: at a sampled subset
/// of scan points, raising the first device's power above its tight value
/// never improves the total.
#[test]
fn oracle_reduction_power_scan_spot_check() {
    let mut cfg = base_config(
        vec![[20.0, 0.0, 0.0], [40.0, 0.0, 0.0]],
        Budget::Power(vec![3.16e-3, 3.16e-3]),
        vec![200e3, 300e3],
    );
    cfg.irs_elements = 2;
    cfg.rng_seed = 13;
    let ch = generate_channels(&cfg).unwrap();
    let v1 = BeamVector::from_phases(&[0.7, 2.1]);
    let v2 = irs_hma::aligned_beam(&ch.composite[1]);
    let g1 = snr_gain(&ch.composite[0], &v1, cfg.noise_power).unwrap();
    let g2 = snr_gain(&ch.composite[1], &v1, cfg.noise_power).unwrap();
    let g22 = snr_gain(&ch.composite[1], &v2, cfg.noise_power).unwrap();
    let (l1, l2) = (cfg.normalized_target(0), cfg.normalized_target(1));
    let p_cap = 3.16e-3;
    let r22 = (1.0 + p_cap * g22).log2();
    let tau1_min = l1 / (1.0 + p_cap * g1).log2();
    for s in 1..20 {
        let tau1 = tau1_min * (1.0 + 0.2 * s as f64);
        let p1_tight = ((l1 / tau1).exp2() - 1.0) / g1;
        let total = |p1: f64| {
            let r21 = (1.0 + p_cap * g2 / (1.0 + p1 * g1)).log2();
            tau1 + (l2 - tau1 * r21).max(0.0) / r22
        };
        let base = total(p1_tight);
        let mut p1 = p1_tight;
        while p1 < p_cap {
            p1 += 1e-3 * p_cap;
            assert!(
                total(p1.min(p_cap)) >= base - 1e-12,
                "raising first-device power improved the total at tau1 {tau1}"
            );
        }
    }
    let _ = effective_channel(&ch.composite[0], &v1).unwrap();
    println!("PASS oracle support: tight first-device power is optimal along the scan");
}
