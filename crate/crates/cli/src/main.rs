//! Command-line front end: run Monte Carlo scenarios, print protocol
//! thresholds, or solve a single instance.
//!
//! Exit codes: 0 ok, 1 usage error, 2 infeasible instance, 3 solver
//! non-convergence.

use std::path::PathBuf;
use std::process::ExitCode;

use irs_hma::config;
use irs_hma::experiments::{self, BaselineSpec, IrsMode, RunStatus};
use irs_hma::hma::{self, BeamMode, OrderPolicy, SolveOptions};
use irs_hma::system::Budget;
use irs_hma::Error;

const USAGE: &str = "\
usage: irs-hma <command> [options]

commands:
  run --scenario <file> --out <dir> [--draws N] [--seed S]
      [--baselines a,b,...] [--static-irs] [--no-irs]
      [--order pro|des|rand|exhaustive]
        run a Monte Carlo scenario and write rows.csv, summary.csv and
        per-baseline .dat files into <dir>

  thresholds --config <file>
        print the protocol-selection thresholds and regime for one instance

  solve --config <file> [--static-irs] [--no-irs]
      [--order pro|des|rand|exhaustive]
        solve one instance and print the schedule
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InfeasibleEnergy { .. } | Error::Infeasible { .. } => ExitCode::from(2),
                Error::InvalidConfig(_) => ExitCode::from(1),
                _ => ExitCode::from(1),
            }
        }
    }
}

struct Flags {
    values: std::collections::HashMap<String, String>,
    switches: std::collections::HashSet<String>,
}

fn parse_flags(args: &[String], with_value: &[&str], switches: &[&str]) -> Result<Flags, Error> {
    let mut flags = Flags {
        values: Default::default(),
        switches: Default::default(),
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let name = arg
            .strip_prefix("--")
            .ok_or_else(|| Error::InvalidConfig(format!("unexpected argument '{arg}'")))?;
        if with_value.contains(&name) {
            let value = it
                .next()
                .ok_or_else(|| Error::InvalidConfig(format!("--{name} needs a value")))?;
            flags.values.insert(name.to_string(), value.clone());
        } else if switches.contains(&name) {
            flags.switches.insert(name.to_string());
        } else {
            return Err(Error::InvalidConfig(format!("unknown flag '--{arg}'")));
        }
    }
    Ok(flags)
}

fn dispatch(args: &[String]) -> Result<ExitCode, Error> {
    let Some(command) = args.first() else {
        eprint!("{USAGE}");
        return Ok(ExitCode::from(1));
    };
    match command.as_str() {
        "run" => cmd_run(&args[1..]),
        "thresholds" => cmd_thresholds(&args[1..]),
        "solve" => cmd_solve(&args[1..]),
        "--help" | "-h" | "help" => {
            print!("{USAGE}");
            Ok(ExitCode::SUCCESS)
        }
        other => {
            eprintln!("unknown command '{other}'");
            eprint!("{USAGE}");
            Ok(ExitCode::from(1))
        }
    }
}

fn order_suffix(name: &str) -> Result<&'static str, Error> {
    Ok(match name {
        "pro" => "pro",
        "des" => "des",
        "rand" => "rand",
        "exhaustive" | "exh" => "exh",
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown order policy '{other}'"
            )))
        }
    })
}

fn cmd_run(args: &[String]) -> Result<ExitCode, Error> {
    let flags = parse_flags(
        args,
        &["scenario", "out", "draws", "seed", "baselines", "order"],
        &["static-irs", "no-irs"],
    )?;
    let scenario_path = flags
        .values
        .get("scenario")
        .ok_or_else(|| Error::InvalidConfig("run needs --scenario".into()))?;
    let out = flags
        .values
        .get("out")
        .ok_or_else(|| Error::InvalidConfig("run needs --out".into()))?;

    let mut scenario = config::load_scenario(&PathBuf::from(scenario_path))?;
    if let Some(draws) = flags.values.get("draws") {
        scenario.draws = draws
            .parse()
            .map_err(|_| Error::InvalidConfig("bad --draws".into()))?;
    }
    if let Some(seed) = flags.values.get("seed") {
        scenario.seed_base = seed
            .parse()
            .map_err(|_| Error::InvalidConfig("bad --seed".into()))?;
    }
    if let Some(list) = flags.values.get("baselines") {
        scenario.baselines = list
            .split(',')
            .map(BaselineSpec::parse)
            .collect::<Result<_, _>>()?;
    }
    if let Some(order) = flags.values.get("order") {
        let suffix = order_suffix(order)?;
        for spec in &mut scenario.baselines {
            *spec = BaselineSpec::parse(&format!(
                "{}:{}:{}",
                spec.id().split(':').next().unwrap(),
                match spec.irs {
                    IrsMode::Dynamic => "d",
                    IrsMode::Static => "s",
                    IrsMode::None => "no",
                },
                suffix
            ))?;
        }
    }
    if flags.switches.contains("static-irs") {
        for spec in &mut scenario.baselines {
            spec.irs = IrsMode::Static;
        }
    }
    if flags.switches.contains("no-irs") {
        for spec in &mut scenario.baselines {
            spec.irs = IrsMode::None;
        }
    }

    let (rows, summary) = experiments::run_scenario(&scenario)?;
    experiments::emit_outputs(&rows, &summary, &PathBuf::from(out))?;

    let infeasible = rows.iter().filter(|r| r.status == RunStatus::Infeasible).count();
    let nonconverged = rows
        .iter()
        .filter(|r| r.status == RunStatus::NonConverged)
        .count();
    let errored = rows.iter().filter(|r| r.status == RunStatus::Error).count();
    eprintln!(
        "{}: {} rows ({} infeasible, {} non-converged, {} errored) -> {}",
        scenario.name,
        rows.len(),
        infeasible,
        nonconverged,
        errored,
        out
    );
    if nonconverged > 0 || errored > 0 {
        return Ok(ExitCode::from(3));
    }
    if infeasible == rows.len() {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_thresholds(args: &[String]) -> Result<ExitCode, Error> {
    let flags = parse_flags(args, &["config"], &[])?;
    let path = flags
        .values
        .get("config")
        .ok_or_else(|| Error::InvalidConfig("thresholds needs --config".into()))?;
    let cfg = config::load_system(&PathBuf::from(path))?;
    let channels = irs_hma::generate_channels(&cfg)?;
    let sol = hma::solve_hma(&cfg, &channels, &SolveOptions::default())?;
    let report = &sol.report;

    println!("order: {:?}", report.order.iter().map(|k| k + 1).collect::<Vec<_>>());
    println!("regime: {}", report.regime);
    for c in &report.thresholds.comparisons {
        match &cfg.budget {
            Budget::Power(_) => println!(
                "  position {}: device {} target {:.3} Kbits, single-slot threshold {:.3} Kbits",
                c.position + 1,
                c.device + 1,
                c.own / 1e3,
                c.noma_threshold / 1e3
            ),
            Budget::Energy(_) => println!(
                "  position {}: device {} energy {:.6} J, thresholds per-slot {:.6} J / single-slot {:.6} J",
                c.position + 1,
                c.device + 1,
                c.own,
                c.tdma_threshold.unwrap_or(f64::NAN),
                c.noma_threshold
            ),
        }
    }
    println!("sum delay: {:.6} ms", report.sum_delay * 1e3);
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(args: &[String]) -> Result<ExitCode, Error> {
    let flags = parse_flags(args, &["config", "order"], &["static-irs", "no-irs"])?;
    let path = flags
        .values
        .get("config")
        .ok_or_else(|| Error::InvalidConfig("solve needs --config".into()))?;
    let mut cfg = config::load_system(&PathBuf::from(path))?;
    if flags.switches.contains("no-irs") {
        cfg = cfg.without_irs();
    }
    let mut options = SolveOptions::default();
    if flags.switches.contains("static-irs") {
        options.beam_mode = BeamMode::Static;
    }
    if let Some(order) = flags.values.get("order") {
        options.order = match order_suffix(order)? {
            "des" => OrderPolicy::Descending,
            "rand" => OrderPolicy::Random(cfg.rng_seed),
            "exh" => OrderPolicy::Exhaustive,
            _ => OrderPolicy::Proposed,
        };
    }
    let channels = irs_hma::generate_channels(&cfg)?;
    let sol = hma::solve_hma(&cfg, &channels, &options)?;
    let report = &sol.report;

    println!("regime: {}", report.regime);
    println!(
        "order: {:?}",
        report.order.iter().map(|k| k + 1).collect::<Vec<_>>()
    );
    println!("sum delay: {:.6} ms", report.sum_delay * 1e3);
    println!(
        "outer iterations: {} (converged: {})",
        report.outer_iterations, report.converged
    );
    println!("throughput residual: {:.3e}", report.qos_residual);
    let floor = options.sca.convex.tau_floor;
    for (i, tau) in sol.schedule.durations.iter().enumerate() {
        let tau = if *tau <= floor { 0.0 } else { *tau };
        println!("slot {}: {:.6} ms", i + 1, tau * 1e3);
        for k in i..sol.schedule.device_count() {
            let p = sol.schedule.power(k, i);
            if p > 0.0 && tau > 0.0 {
                println!(
                    "  device {} power {:.3} mW (energy {:.3e} J)",
                    sol.schedule.order[k] + 1,
                    p * 1e3,
                    sol.schedule.energies[k][i]
                );
            }
        }
    }
    let completion = sol.schedule.completion_times();
    for (q, t) in completion.iter().enumerate() {
        println!(
            "device {} completes at {:.6} ms",
            sol.schedule.order[q] + 1,
            t * 1e3
        );
    }
    if !report.converged {
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}
