//! Scenario runner: Monte Carlo sweeps over fading draws, protocol/baseline
//! comparisons, and CSV emission.
//!
//! Each draw uses `seed_base + draw` so runs are reproducible and baselines
//! are paired on identical fading. Draws run on a worker pool; rows are
//! sorted before emission so output bytes are deterministic.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hma::{self, BeamMode, OrderPolicy, SolveOptions};
use crate::noma;
use crate::system::{Budget, SystemConfig};
use crate::tdma::TdmaSolution;
use crate::thresholds::Regime;

/// What the sweep varies; targets and energies address one device (0-based).
#[derive(Debug, Clone, PartialEq)]
pub enum SweepVariable {
    None,
    TargetBits { device: usize },
    EnergyJoules { device: usize },
    AlphaCascaded,
    IrsElements,
    DeviceCount,
}

impl SweepVariable {
    fn apply(&self, template: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut cfg = template.clone();
        match self {
            SweepVariable::None => {}
            SweepVariable::TargetBits { device } => {
                if *device >= cfg.device_count() {
                    return Err(Error::InvalidConfig(format!(
                        "sweep device {} out of range",
                        device + 1
                    )));
                }
                cfg.targets_bits[*device] = value;
            }
            SweepVariable::EnergyJoules { device } => {
                let Budget::Energy(energy) = &mut cfg.budget else {
                    return Err(Error::InvalidConfig(
                        "energy sweep requires the energy regime".into(),
                    ));
                };
                if *device >= energy.len() {
                    return Err(Error::InvalidConfig(format!(
                        "sweep device {} out of range",
                        device + 1
                    )));
                }
                energy[*device] = value;
            }
            SweepVariable::AlphaCascaded => cfg.alpha_cascaded = value,
            SweepVariable::IrsElements => cfg.irs_elements = value as usize,
            SweepVariable::DeviceCount => {
                let k = value as usize;
                if k == 0 || k > cfg.device_count() {
                    return Err(Error::InvalidConfig(format!(
                        "device-count sweep value {k} exceeds the {} templated devices",
                        cfg.device_count()
                    )));
                }
                cfg.device_pos.truncate(k);
                cfg.targets_bits.truncate(k);
                match &mut cfg.budget {
                    Budget::Power(p) => p.truncate(k),
                    Budget::Energy(e) => e.truncate(k),
                }
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Hma,
    Tdma,
    Noma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrsMode {
    Dynamic,
    Static,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderChoice {
    Proposed,
    Descending,
    Random,
    Exhaustive,
}

/// One curve of the study: protocol x surface mode x ordering policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineSpec {
    pub protocol: Protocol,
    pub irs: IrsMode,
    pub order: OrderChoice,
}

impl BaselineSpec {
    /// Parse ids like `hma`, `tdma:s`, `noma:no`, `hma:d:des`.
    pub fn parse(text: &str) -> Result<BaselineSpec> {
        let mut parts = text.split(':');
        let protocol = match parts.next().unwrap_or("") {
            "hma" => Protocol::Hma,
            "tdma" => Protocol::Tdma,
            "noma" => Protocol::Noma,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown protocol '{other}' in baseline '{text}'"
                )))
            }
        };
        let mut irs = IrsMode::Dynamic;
        let mut order = OrderChoice::Proposed;
        for part in parts {
            match part {
                "d" | "dyn" => irs = IrsMode::Dynamic,
                "s" | "static" => irs = IrsMode::Static,
                "no" | "none" => irs = IrsMode::None,
                "pro" => order = OrderChoice::Proposed,
                "des" => order = OrderChoice::Descending,
                "rand" => order = OrderChoice::Random,
                "exh" | "exhaustive" => order = OrderChoice::Exhaustive,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown baseline qualifier '{other}' in '{text}'"
                    )))
                }
            }
        }
        Ok(BaselineSpec {
            protocol,
            irs,
            order,
        })
    }

    pub fn id(&self) -> String {
        let p = match self.protocol {
            Protocol::Hma => "hma",
            Protocol::Tdma => "tdma",
            Protocol::Noma => "noma",
        };
        let irs = match self.irs {
            IrsMode::Dynamic => "d",
            IrsMode::Static => "s",
            IrsMode::None => "no",
        };
        let order = match self.order {
            OrderChoice::Proposed => "pro",
            OrderChoice::Descending => "des",
            OrderChoice::Random => "rand",
            OrderChoice::Exhaustive => "exh",
        };
        format!("{p}:{irs}:{order}")
    }
}

/// A full study: template instance, sweep grid, baselines, and draw count.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub comment: String,
    pub template: SystemConfig,
    pub sweep: SweepVariable,
    /// Sweep grid; empty means a single run of the template.
    pub values: Vec<f64>,
    pub draws: usize,
    pub seed_base: u64,
    pub baselines: Vec<BaselineSpec>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.draws == 0 {
            return Err(Error::InvalidConfig("draws must be at least 1".into()));
        }
        if self.baselines.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one baseline is required".into(),
            ));
        }
        if self.sweep != SweepVariable::None {
            if self.values.is_empty() {
                return Err(Error::InvalidConfig("sweep grid is empty".into()));
            }
            if self.values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidConfig(
                    "sweep grid must be strictly increasing".into(),
                ));
            }
        }
        self.template.validate()
    }

    fn grid(&self) -> Vec<Option<f64>> {
        if self.sweep == SweepVariable::None {
            vec![None]
        } else {
            self.values.iter().copied().map(Some).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Infeasible,
    NonConverged,
    Error,
}

impl RunStatus {
    fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Infeasible => "infeasible",
            RunStatus::NonConverged => "nonconverged",
            RunStatus::Error => "error",
        }
    }

    fn parse(s: &str) -> Result<RunStatus> {
        Ok(match s {
            "ok" => RunStatus::Ok,
            "infeasible" => RunStatus::Infeasible,
            "nonconverged" => RunStatus::NonConverged,
            "error" => RunStatus::Error,
            other => {
                return Err(Error::InvalidConfig(format!("unknown status '{other}'")))
            }
        })
    }
}

/// One (sweep value, baseline, draw) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub sweep_value: Option<f64>,
    pub baseline: String,
    pub draw: usize,
    pub seed: u64,
    pub status: RunStatus,
    pub regime: String,
    pub sum_delay: f64,
    pub completion: Vec<f64>,
    pub iterations: usize,
    pub detail: String,
    /// Wall-clock solve time; kept out of the CSV so bytes are reproducible.
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario: String,
    pub sweep_value: Option<f64>,
    pub baseline: String,
    pub draws: usize,
    pub ok_count: usize,
    pub mean_delay: f64,
    pub min_delay: f64,
    pub max_delay: f64,
}

fn order_policy(choice: OrderChoice, seed: u64) -> OrderPolicy {
    match choice {
        OrderChoice::Proposed => OrderPolicy::Proposed,
        OrderChoice::Descending => OrderPolicy::Descending,
        OrderChoice::Random => OrderPolicy::Random(seed),
        OrderChoice::Exhaustive => OrderPolicy::Exhaustive,
    }
}

fn reference_order(cfg: &SystemConfig, tdma: &TdmaSolution, choice: OrderChoice, seed: u64) -> Vec<usize> {
    let snr = hma::tdma_snr(tdma);
    match order_policy(choice, seed) {
        OrderPolicy::Proposed | OrderPolicy::Exhaustive => hma::propose_order(&snr),
        OrderPolicy::Descending => {
            let mut o = hma::propose_order(&snr);
            o.reverse();
            o
        }
        OrderPolicy::Random(s) => {
            let mut o: Vec<usize> = (0..cfg.device_count()).collect();
            let mut state = s ^ 0x51f15eed;
            for i in (1..o.len()).rev() {
                state = state
                    .wrapping_add(0x9E3779B97F4A7C15)
                    .wrapping_mul(0xBF58476D1CE4E5B9);
                let j = (state >> 16) as usize % (i + 1);
                o.swap(i, j);
            }
            o
        }
        OrderPolicy::Given(o) => o,
    }
}

/// Solve one baseline on one fading draw.
pub fn run_baseline(
    config: &SystemConfig,
    spec: &BaselineSpec,
) -> (RunStatus, String, f64, Vec<f64>, usize, String) {
    let cfg = if spec.irs == IrsMode::None {
        config.without_irs()
    } else {
        config.clone()
    };
    let solved = (|| -> Result<(f64, Vec<f64>, String, usize, bool)> {
        let channels = crate::system::generate_channels(&cfg)?;
        match spec.protocol {
            Protocol::Hma => {
                let options = SolveOptions {
                    beam_mode: match spec.irs {
                        IrsMode::Static => BeamMode::Static,
                        _ => BeamMode::Dynamic,
                    },
                    order: order_policy(spec.order, cfg.rng_seed),
                    ..Default::default()
                };
                let sol = hma::solve_hma(&cfg, &channels, &options)?;
                Ok((
                    sol.report.sum_delay,
                    sol.schedule.completion_times(),
                    sol.report.regime.to_string(),
                    sol.report.outer_iterations,
                    sol.report.converged,
                ))
            }
            Protocol::Tdma => {
                let mode = if spec.irs == IrsMode::Static {
                    BeamMode::Static
                } else {
                    BeamMode::Dynamic
                };
                let sol = hma::reference_tdma(&cfg, &channels, mode)?;
                let order = reference_order(&cfg, &sol, spec.order, cfg.rng_seed);
                Ok((
                    sol.sum_delay,
                    sol.completion_times(&order),
                    Regime::PureTdma.to_string(),
                    0,
                    true,
                ))
            }
            Protocol::Noma => {
                let tdma = hma::reference_tdma(&cfg, &channels, BeamMode::Dynamic)?;
                let order = reference_order(&cfg, &tdma, spec.order, cfg.rng_seed);
                let sol = noma::solve_noma(&cfg, &channels, &order)?;
                let completion = vec![sol.duration; cfg.device_count()];
                Ok((
                    sol.duration,
                    completion,
                    Regime::PureNoma.to_string(),
                    sol.delay_trace.len(),
                    true,
                ))
            }
        }
    })();
    match solved {
        Ok((delay, completion, regime, iterations, converged)) => {
            let status = if converged {
                RunStatus::Ok
            } else {
                RunStatus::NonConverged
            };
            (status, regime, delay, completion, iterations, String::new())
        }
        Err(Error::InfeasibleEnergy {
            device,
            energy,
            required,
        }) => (
            RunStatus::Infeasible,
            "-".into(),
            f64::NAN,
            Vec::new(),
            0,
            format!("device {device} has {energy} J, needs more than {required} J"),
        ),
        Err(Error::Infeasible { max_slack }) => (
            RunStatus::Infeasible,
            "-".into(),
            f64::NAN,
            Vec::new(),
            0,
            format!("max slack {max_slack}"),
        ),
        Err(e) => (
            RunStatus::Error,
            "-".into(),
            f64::NAN,
            Vec::new(),
            0,
            e.to_string(),
        ),
    }
}

/// Run the whole study. Rows come back sorted by (sweep point, baseline,
/// draw); the summary aggregates feasible rows per (sweep point, baseline).
pub fn run_scenario(scenario: &Scenario) -> Result<(Vec<ResultRow>, Vec<SummaryRow>)> {
    scenario.validate()?;
    let grid = scenario.grid();

    let mut tasks = Vec::new();
    for (value_idx, value) in grid.iter().enumerate() {
        for draw in 0..scenario.draws {
            tasks.push((value_idx, *value, draw));
        }
    }

    let rows_nested: Vec<Vec<(usize, usize, ResultRow)>> = tasks
        .par_iter()
        .map(|(value_idx, value, draw)| {
            let mut cfg = match value {
                Some(v) => match scenario.sweep.apply(&scenario.template, *v) {
                    Ok(c) => c,
                    Err(e) => {
                        return scenario
                            .baselines
                            .iter()
                            .enumerate()
                            .map(|(b_idx, spec)| {
                                (
                                    *value_idx,
                                    b_idx,
                                    ResultRow {
                                        scenario: scenario.name.clone(),
                                        sweep_value: *value,
                                        baseline: spec.id(),
                                        draw: *draw,
                                        seed: scenario.seed_base + *draw as u64,
                                        status: RunStatus::Error,
                                        regime: "-".into(),
                                        sum_delay: f64::NAN,
                                        completion: Vec::new(),
                                        iterations: 0,
                                        detail: e.to_string(),
                                        wall_ms: 0.0,
                                    },
                                )
                            })
                            .collect();
                    }
                },
                None => scenario.template.clone(),
            };
            cfg.rng_seed = scenario.seed_base + *draw as u64;
            scenario
                .baselines
                .iter()
                .enumerate()
                .map(|(b_idx, spec)| {
                    let start = std::time::Instant::now();
                    let (status, regime, delay, completion, iterations, detail) =
                        run_baseline(&cfg, spec);
                    let row = ResultRow {
                        scenario: scenario.name.clone(),
                        sweep_value: *value,
                        baseline: spec.id(),
                        draw: *draw,
                        seed: cfg.rng_seed,
                        status,
                        regime,
                        sum_delay: delay,
                        completion,
                        iterations,
                        detail,
                        wall_ms: start.elapsed().as_secs_f64() * 1e3,
                    };
                    (*value_idx, b_idx, row)
                })
                .collect()
        })
        .collect();

    let mut keyed: Vec<(usize, usize, ResultRow)> = rows_nested.into_iter().flatten().collect();
    keyed.sort_by(|a, b| (a.0, a.1, a.2.draw).cmp(&(b.0, b.1, b.2.draw)));

    let mut summary = Vec::new();
    for (value_idx, value) in grid.iter().enumerate() {
        for (b_idx, spec) in scenario.baselines.iter().enumerate() {
            let group: Vec<&ResultRow> = keyed
                .iter()
                .filter(|(v, b, _)| *v == value_idx && *b == b_idx)
                .map(|(_, _, r)| r)
                .collect();
            let ok: Vec<f64> = group
                .iter()
                .filter(|r| r.status == RunStatus::Ok || r.status == RunStatus::NonConverged)
                .map(|r| r.sum_delay)
                .collect();
            let mean = if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().sum::<f64>() / ok.len() as f64
            };
            summary.push(SummaryRow {
                scenario: scenario.name.clone(),
                sweep_value: *value,
                baseline: spec.id(),
                draws: group.len(),
                ok_count: ok.len(),
                mean_delay: mean,
                min_delay: ok.iter().copied().fold(f64::INFINITY, f64::min),
                max_delay: ok.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
        }
    }

    let rows = keyed.into_iter().map(|(_, _, r)| r).collect();
    Ok((rows, summary))
}

// --- CSV ---------------------------------------------------------------

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_line(fields: &[String]) -> String {
    fields
        .iter()
        .map(|f| csv_field(f))
        .collect::<Vec<_>>()
        .join(",")
}

/// Split one CSV record with RFC-4180 quoting.
pub fn parse_csv_line(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut field = String::new();
    let mut chars = line.chars().peekable();
    let mut quoted = false;
    while let Some(c) = chars.next() {
        if quoted {
            if c == '"' {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    field.push('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push(c);
            }
        } else if c == '"' && field.is_empty() {
            quoted = true;
        } else if c == ',' {
            out.push(std::mem::take(&mut field));
        } else {
            field.push(c);
        }
    }
    out.push(field);
    out
}

fn format_value(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v}"),
        None => String::new(),
    }
}

fn format_delay(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

pub const ROWS_HEADER: &str =
    "scenario,sweep_value,baseline,draw,seed,status,regime,sum_delay_s,completion_times_s,iterations,detail";

impl ResultRow {
    pub fn csv_record(&self) -> Vec<String> {
        let completion = self
            .completion
            .iter()
            .map(|c| format!("{c}"))
            .collect::<Vec<_>>()
            .join(";");
        vec![
            self.scenario.clone(),
            format_value(self.sweep_value),
            self.baseline.clone(),
            format!("{}", self.draw),
            format!("{}", self.seed),
            self.status.as_str().to_string(),
            self.regime.clone(),
            format_delay(self.sum_delay),
            completion,
            format!("{}", self.iterations),
            self.detail.clone(),
        ]
    }

    pub fn from_csv_record(fields: &[String]) -> Result<ResultRow> {
        if fields.len() != 11 {
            return Err(Error::InvalidConfig(format!(
                "row has {} fields, expected 11",
                fields.len()
            )));
        }
        let parse_f64 = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::InvalidConfig(format!("bad number '{s}'")))
        };
        let completion = if fields[8].is_empty() {
            Vec::new()
        } else {
            fields[8]
                .split(';')
                .map(parse_f64)
                .collect::<Result<Vec<f64>>>()?
        };
        Ok(ResultRow {
            scenario: fields[0].clone(),
            sweep_value: if fields[1].is_empty() {
                None
            } else {
                Some(parse_f64(&fields[1])?)
            },
            baseline: fields[2].clone(),
            draw: fields[3]
                .parse()
                .map_err(|_| Error::InvalidConfig("bad draw".into()))?,
            seed: fields[4]
                .parse()
                .map_err(|_| Error::InvalidConfig("bad seed".into()))?,
            status: RunStatus::parse(&fields[5])?,
            regime: fields[6].clone(),
            sum_delay: if fields[7].is_empty() {
                f64::NAN
            } else {
                parse_f64(&fields[7])?
            },
            completion,
            iterations: fields[9]
                .parse()
                .map_err(|_| Error::InvalidConfig("bad iterations".into()))?,
            detail: fields[10].clone(),
            wall_ms: 0.0,
        })
    }

    /// Equality over the CSV-visible fields (wall time excluded).
    pub fn same_record(&self, other: &ResultRow) -> bool {
        self.csv_record() == other.csv_record()
    }
}

pub const SUMMARY_HEADER: &str =
    "scenario,sweep_value,baseline,draws,ok_count,mean_delay_s,min_delay_s,max_delay_s";

impl SummaryRow {
    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.scenario.clone(),
            format_value(self.sweep_value),
            self.baseline.clone(),
            format!("{}", self.draws),
            format!("{}", self.ok_count),
            format_delay(self.mean_delay),
            format_delay(self.min_delay),
            format_delay(self.max_delay),
        ]
    }
}

/// Write rows.csv, summary.csv, and one gnuplot-style .dat per baseline into
/// `dir`. Refuses to write anything when the row set is empty.
pub fn emit_outputs(rows: &[ResultRow], summary: &[SummaryRow], dir: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidConfig("no rows to emit".into()));
    }
    let io_err = |path: &Path, source: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

    let rows_path = dir.join("rows.csv");
    let mut text = String::with_capacity(rows.len() * 80);
    text.push_str(ROWS_HEADER);
    text.push('\n');
    for row in rows {
        text.push_str(&csv_line(&row.csv_record()));
        text.push('\n');
    }
    std::fs::write(&rows_path, text).map_err(|e| io_err(&rows_path, e))?;

    let summary_path = dir.join("summary.csv");
    let mut text = String::new();
    text.push_str(SUMMARY_HEADER);
    text.push('\n');
    for row in summary {
        text.push_str(&csv_line(&row.csv_record()));
        text.push('\n');
    }
    std::fs::write(&summary_path, text).map_err(|e| io_err(&summary_path, e))?;

    let mut baselines: Vec<&str> = summary.iter().map(|s| s.baseline.as_str()).collect();
    baselines.dedup();
    for baseline in baselines {
        let mut text = String::new();
        let _ = writeln!(text, "# baseline: {baseline}");
        let _ = writeln!(text, "# sweep_value mean_delay_s");
        for s in summary.iter().filter(|s| s.baseline == baseline) {
            let x = match s.sweep_value {
                Some(v) => format!("{v}"),
                None => "0".to_string(),
            };
            let _ = writeln!(text, "{x} {}", format_delay(s.mean_delay));
        }
        let path = dir.join(format!("{}.dat", baseline.replace(':', "_")));
        std::fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

/// Parse a rows.csv produced by [`emit_outputs`] back into rows.
pub fn parse_rows_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header != ROWS_HEADER {
        return Err(Error::InvalidConfig("unexpected rows.csv header".into()));
    }
    lines
        .map(|line| ResultRow::from_csv_record(&parse_csv_line(line)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_scenario() -> Scenario {
        Scenario {
            name: "toy".into(),
            comment: String::new(),
            template: SystemConfig {
                bandwidth_hz: 500e3,
                noise_power: 1e-11,
                irs_elements: 4,
                ref_gain: 1e-3,
                alpha_direct: 3.6,
                alpha_cascaded: 2.2,
                bs_pos: [0.0, 0.0, 0.0],
                irs_pos: [30.0, 0.0, 5.0],
                device_pos: vec![[20.0, 0.0, 0.0], [40.0, 0.0, 0.0]],
                budget: Budget::Power(vec![3.16e-3, 3.16e-3]),
                targets_bits: vec![200e3, 100e3],
                rng_seed: 0,
            },
            sweep: SweepVariable::TargetBits { device: 1 },
            values: vec![100e3, 200e3],
            draws: 2,
            seed_base: 77,
            baselines: vec![
                BaselineSpec::parse("hma").unwrap(),
                BaselineSpec::parse("tdma").unwrap(),
            ],
        }
    }

    #[test]
    fn baseline_spec_round_trip() {
        for id in ["hma:d:pro", "tdma:s:des", "noma:no:rand", "hma:d:exh"] {
            let spec = BaselineSpec::parse(id).unwrap();
            assert_eq!(spec.id(), id);
        }
        assert_eq!(BaselineSpec::parse("hma").unwrap().id(), "hma:d:pro");
        assert!(BaselineSpec::parse("ofdma").is_err());
        assert!(BaselineSpec::parse("hma:q").is_err());
    }

    #[test]
    fn scenario_runs_emit_expected_counts() {
        let scenario = small_scenario();
        let (rows, summary) = run_scenario(&scenario).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2); // grid x draws x baselines
        assert_eq!(summary.len(), 2 * 2); // grid x baselines
        assert!(rows.iter().all(|r| r.status == RunStatus::Ok));
        // seeds follow the draw index
        assert!(rows
            .iter()
            .all(|r| r.seed == scenario.seed_base + r.draw as u64));
    }

    #[test]
    fn repeated_runs_are_identical() {
        let scenario = small_scenario();
        let (rows_a, _) = run_scenario(&scenario).unwrap();
        let (rows_b, _) = run_scenario(&scenario).unwrap();
        assert_eq!(rows_a.len(), rows_b.len());
        for (a, b) in rows_a.iter().zip(&rows_b) {
            assert!(a.same_record(b));
        }
    }

    #[test]
    fn csv_round_trip() {
        let scenario = small_scenario();
        let (mut rows, summary) = run_scenario(&scenario).unwrap();
        // exercise quoting
        rows[0].detail = "needs, quoting \"here\"".into();
        let dir = std::env::temp_dir().join(format!("irs-hma-test-{}", std::process::id()));
        emit_outputs(&rows, &summary, &dir).unwrap();
        let text = std::fs::read_to_string(dir.join("rows.csv")).unwrap();
        let parsed = parse_rows_csv(&text).unwrap();
        assert_eq!(parsed.len(), rows.len());
        for (a, b) in parsed.iter().zip(&rows) {
            assert!(a.same_record(b), "{a:?} vs {b:?}");
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn empty_rows_refused() {
        let dir = std::env::temp_dir().join("irs-hma-test-empty");
        assert!(emit_outputs(&[], &[], &dir).is_err());
        assert!(!dir.exists());
    }

    #[test]
    fn infeasible_rows_are_flagged_not_dropped() {
        let mut scenario = small_scenario();
        scenario.template.budget = Budget::Energy(vec![1e-9, 1e-9]);
        scenario.sweep = SweepVariable::None;
        scenario.values = Vec::new();
        scenario.draws = 1;
        let (rows, summary) = run_scenario(&scenario).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.status == RunStatus::Infeasible));
        assert!(rows.iter().all(|r| !r.detail.is_empty()));
        assert!(summary.iter().all(|s| s.ok_count == 0));
    }

    #[test]
    fn device_count_sweep_truncates() {
        let mut cfg = small_scenario().template;
        cfg.device_pos.push([25.0, 5.0, 0.0]);
        cfg.targets_bits.push(50e3);
        cfg.budget = Budget::Power(vec![3.16e-3; 3]);
        let applied = SweepVariable::DeviceCount.apply(&cfg, 2.0).unwrap();
        assert_eq!(applied.device_count(), 2);
        assert!(SweepVariable::DeviceCount.apply(&cfg, 9.0).is_err());
    }
}
