//! Command-line front end: `value`, `simulate`, `certify` and `example`.
//!
//! Every command builds a [`RunReport`]. With `--json` the report is printed
//! as JSON (no timestamps, so identical flags give identical bytes); otherwise
//! a short human-readable summary is printed.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::model::{check_assumption_a_with, AssumptionACertificate, AssumptionASolver, Scenario};
use crate::presets::{extrapolate_dimension_limit, ExamplePreset, STATED_GAMMA};
use crate::sim::{
    adversarial_pursuer_controls, plan_pursuers, random_admissible_evader, run_plan, ControlSchedule,
    PursuerStrategyChoice, SimConfig, SimResult,
};
use crate::strategies::evader_guaranteed_plan;
use crate::value::{gamma_optimize, gamma_oracle, GameValue, Method, OptimizeConfig, ORACLE_MAX_DIM};

#[derive(Debug, Parser)]
#[command(name = "pursuit", version, about = "Value and strategies of a many-pursuer simple-motion pursuit game")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the game value of a scenario.
    Value(ValueArgs),
    /// Run one game and export trajectories.
    Simulate(SimulateArgs),
    /// Check the value sandwich against random and adversarial opponents.
    Certify(CertifyArgs),
    /// Reproduce the built-in example family over a sweep of dimensions.
    Example(ExampleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioSource {
    /// Scenario JSON file.
    #[arg(conflicts_with = "preset")]
    pub scenario: Option<PathBuf>,
    /// Built-in example preset instead of a file.
    #[arg(long, value_parser = preset_parser)]
    pub preset: Option<ExamplePreset>,
    /// Truncation dimension for `--preset`.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

fn preset_parser(name: &str) -> std::result::Result<ExamplePreset, String> {
    ExamplePreset::from_name(name).ok_or_else(|| {
        let names: Vec<_> = ExamplePreset::ALL.iter().map(|p| p.name()).collect();
        format!("unknown preset `{name}`, expected one of {}", names.join(", "))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Optimizer,
    Oracle,
}

#[derive(Debug, Args)]
pub struct ValueArgs {
    #[command(flatten)]
    pub source: ScenarioSource,
    #[arg(long, value_enum, default_value = "optimizer")]
    pub method: MethodArg,
    /// Oracle grid points per axis.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    #[arg(long, env = "PURSUIT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Theorem,
    Lemma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvaderArg {
    Straight,
    Random,
    File,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: ScenarioSource,
    #[arg(long, value_enum, default_value = "theorem")]
    pub pursuer_strategy: StrategyArg,
    #[arg(long, value_enum, default_value = "straight")]
    pub evader: EvaderArg,
    /// Control file for `--evader file`: `{"controls": [[..], ..], "times": [..]}`.
    #[arg(long, required_if_eq("evader", "file"))]
    pub evader_file: Option<PathBuf>,
    /// Number of pieces of the random evader control.
    #[arg(long, default_value_t = 8)]
    pub pieces: usize,
    /// Cap the random evader's speed at sigma.
    #[arg(long)]
    pub rate_bounded: bool,
    /// Time step (default theta/1000).
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    /// Override the computed game value.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, env = "PURSUIT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Directory for `trajectories.csv` and `summary.json`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub source: ScenarioSource,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Dimensions to certify when a preset is used (overrides `--dim`).
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    /// Allowed excess of the upper-side payoffs over the value.
    #[arg(long, default_value_t = 0.05)]
    pub envelope: f64,
    /// Allowed shortfall of the lower-side payoffs under the value.
    #[arg(long, default_value_t = 1e-3)]
    pub lower_tol: f64,
    #[arg(long, env = "PURSUIT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 4, 16, 64, 256])]
    pub dims: Vec<usize>,
    #[arg(long, value_parser = preset_parser, default_value = "shared-axes")]
    pub preset: ExamplePreset,
    /// Also bracket the value with the grid oracle where `d ≤ 3`.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub oracle: bool,
    #[arg(long)]
    pub json: bool,
}

/// One checked property: what it checks, whether it held, and by how much.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub pass: bool,
    /// Signed slack of the check; negative when it fails.
    pub margin: f64,
}

impl Verdict {
    fn at_most(check: impl Into<String>, measured: f64, bound: f64) -> Self {
        Verdict { check: check.into(), pass: measured <= bound, margin: bound - measured }
    }

    fn at_least(check: impl Into<String>, measured: f64, bound: f64) -> Self {
        Verdict { check: check.into(), pass: measured >= bound, margin: measured - bound }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub gamma: f64,
    pub method: Method,
    pub witness: Point,
    pub deficits: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub upper_bound: Option<f64>,
}

impl From<GameValue> for GammaReport {
    fn from(g: GameValue) -> Self {
        GammaReport {
            gamma: g.gamma,
            method: g.method,
            witness: g.witness,
            deficits: g.deficits,
            lower_bound: g.lower_bound,
            upper_bound: g.upper_bound,
        }
    }
}

/// Results for one scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub label: String,
    pub dimension: usize,
    pub scenario_digest: String,
    pub gamma: GammaReport,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub analytic_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle_bracket: Option<[f64; 2]>,
    /// `None` when no certificate was found.
    pub assumption_a: Option<AssumptionACertificate>,
    pub simulations: Vec<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sandwich: Option<Sandwich>,
}

/// Observed payoff ranges of a certification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lower_min: f64,
    pub lower_max: f64,
    pub upper_min: f64,
    pub upper_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub scenarios: Vec<ScenarioReport>,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
    /// Dimension-sweep summary of the `example` command.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub limit: Option<LimitReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub preset: String,
    pub extrapolated: Option<f64>,
    pub analytic: f64,
    pub stated: f64,
}

impl RunReport {
    fn new(command: &str) -> Self {
        RunReport { command: command.to_string(), scenarios: vec![], verdicts: vec![], warnings: vec![], limit: None }
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for s in &self.scenarios {
            out += &format!("[{}] d = {}, digest {}\n", s.label, s.dimension, &s.scenario_digest[..16]);
            out += &format!("  gamma = {:.9} ({:?})\n", s.gamma.gamma, s.gamma.method);
            if let (Some(lo), Some(hi)) = (s.gamma.lower_bound, s.gamma.upper_bound) {
                out += &format!("  oracle bracket [{lo:.6}, {hi:.6}]\n");
            }
            if let Some(a) = s.analytic_gamma {
                out += &format!("  analytic = {a:.9}\n");
            }
            if let Some([lo, hi]) = s.oracle_bracket {
                out += &format!("  oracle bracket [{lo:.6}, {hi:.6}]\n");
            }
            if s.dimension <= 8 {
                out += &format!("  witness = {:?}\n", s.gamma.witness.coords());
                out += &format!("  deficits = {:?}\n", s.gamma.deficits);
            }
            match &s.assumption_a {
                Some(c) => out += &format!("  assumption (A): holds, min slack {:.3e}\n", c.min_slack),
                None => out += "  assumption (A): no certificate\n",
            }
            for sim in &s.simulations {
                out += &format!(
                    "  simulation: payoff = {}, evader admissible = {}, pursuers admissible = {}\n",
                    sim["payoff"], sim["admissibility"]["evader"], sim["admissibility"]["pursuers"]
                );
            }
            if let Some(w) = &s.sandwich {
                out += &format!(
                    "  lower side payoffs [{:.6}, {:.6}], upper side payoffs [{:.6}, {:.6}]\n",
                    w.lower_min, w.lower_max, w.upper_min, w.upper_max
                );
            }
        }
        if let Some(l) = &self.limit {
            out += &format!(
                "limit ({}): extrapolated {}, analytic {:.6}, stated {}\n",
                l.preset,
                l.extrapolated.map_or("n/a".to_string(), |x| format!("{x:.6}")),
                l.analytic,
                l.stated
            );
        }
        for v in &self.verdicts {
            out += &format!("{} {} (margin {:.3e})\n", if v.pass { "PASS" } else { "FAIL" }, v.check, v.margin);
        }
        for w in &self.warnings {
            out += &format!("warning: {w}\n");
        }
        out
    }
}

/// Hex SHA-256 of the scenario's canonical JSON.
pub fn scenario_digest(s: &Scenario) -> String {
    let text = serde_json::to_string(&s.to_json_value()).expect("scenario serializes");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn load_scenario(src: &ScenarioSource) -> Result<(String, Scenario)> {
    match (&src.scenario, src.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            Ok((path.display().to_string(), Scenario::from_json_str(&text)?))
        }
        (None, Some(p)) => Ok((format!("{}/d={}", p.name(), src.dim), preset_scenario(p, src.dim)?)),
        (None, None) => Err(Error::InvalidInput("give a scenario file or --preset".into())),
    }
}

fn preset_scenario(p: ExamplePreset, d: usize) -> Result<Scenario> {
    let min = if p == ExamplePreset::DisjointAxes { 2 } else { 1 };
    if d < min {
        return Err(Error::InvalidInput(format!("preset {} needs dimension >= {min}", p.name())));
    }
    Ok(p.scenario(d))
}

/// Assumption (A) check with effort capped for very large scenarios.
fn assumption_a(s: &Scenario, seed: u64) -> Option<AssumptionACertificate> {
    let work = (s.dimension + s.pursuers.len()) as f64;
    let iters = (2e8 / (32.0 * work)).clamp(200.0, 10_000.0) as usize;
    check_assumption_a_with(s, &AssumptionASolver { iters, seed, ..AssumptionASolver::default() })
}

fn base_report(label: String, s: &Scenario, gv: GameValue, seed: u64, warnings: &mut Vec<String>) -> ScenarioReport {
    let cert = assumption_a(s, seed);
    if cert.is_none() {
        warnings.push(format!("{label}: assumption (A) not certified; the value is computed but the strategy guarantee is not"));
    }
    ScenarioReport {
        label,
        dimension: s.dimension,
        scenario_digest: scenario_digest(s),
        gamma: gv.into(),
        analytic_gamma: None,
        oracle_bracket: None,
        assumption_a: cert,
        simulations: vec![],
        sandwich: None,
    }
}

pub fn cmd_value(args: &ValueArgs) -> Result<RunReport> {
    let (label, s) = load_scenario(&args.source)?;
    let gv = match args.method {
        MethodArg::Optimizer => {
            gamma_optimize(&s, &OptimizeConfig { starts: args.starts, iters: args.iters, seed: args.seed })?
        }
        MethodArg::Oracle => gamma_oracle(&s, args.grid)?,
    };
    let mut report = RunReport::new("value");
    let mut entry = base_report(label, &s, gv, args.seed, &mut report.warnings);
    if let Some(p) = args.source.preset.filter(|_| args.source.scenario.is_none()) {
        entry.analytic_gamma = p.analytic_gamma(s.dimension);
    }
    report.scenarios.push(entry);
    Ok(report)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<RunReport> {
    let (label, s) = load_scenario(&args.source)?;
    let gv = gamma_optimize(&s, &OptimizeConfig { seed: args.seed, ..OptimizeConfig::default() })?;
    let gamma = args.gamma.unwrap_or(gv.gamma);
    let choice = match args.pursuer_strategy {
        StrategyArg::Theorem => PursuerStrategyChoice::Theorem,
        StrategyArg::Lemma => PursuerStrategyChoice::Lemma,
    };
    let plan = plan_pursuers(&s, &choice, gamma, args.epsilon)?;
    let evader = match args.evader {
        EvaderArg::Straight => ControlSchedule::constant(s.theta, evader_guaranteed_plan(&s, &gv)?.control),
        EvaderArg::Random => random_admissible_evader(&s, args.pieces, args.seed, args.rate_bounded)?,
        EvaderArg::File => {
            let path = args.evader_file.as_ref().expect("clap enforces --evader-file");
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            ControlSchedule::from_json_str(&text, s.theta)?
        }
    };
    let cfg = SimConfig { dt: args.dt, epsilon: args.epsilon, seed: args.seed, gamma: Some(gamma), ..SimConfig::default() };
    let result = run_plan(&s, &plan, &evader, &cfg)?;

    if let Some(dir) = &args.out_dir {
        write_artifacts(dir, &result)?;
    }

    let mut report = RunReport::new("simulate");
    if !plan.demoted.is_empty() {
        report.warnings.push(format!(
            "geometric pursuers {:?} frozen: their inflated resource does not exceed sigma and the value does not depend on them",
            plan.demoted
        ));
    }
    report.verdicts.push(Verdict::at_most("evader control admissible", result.evader_budget.margin, 0.0));
    for p in &result.pursuers {
        report.verdicts.push(Verdict::at_most(format!("pursuer {} control admissible", p.id), p.budget.margin, 0.0));
    }
    let mut entry = base_report(label, &s, gv, args.seed, &mut report.warnings);
    entry.simulations.push(result.summary());
    report.scenarios.push(entry);
    Ok(report)
}

fn write_artifacts(dir: &Path, result: &SimResult) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let csv = std::fs::File::create(dir.join("trajectories.csv"))?;
    result.write_csv(std::io::BufWriter::new(csv))?;
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&result.summary())?)?;
    Ok(())
}

/// Upper and lower certification runs for one scenario.
pub fn certify_scenario(
    label: String,
    s: &Scenario,
    args: &CertifyArgs,
    report: &mut RunReport,
) -> Result<ScenarioReport> {
    let gv = gamma_optimize(s, &OptimizeConfig { seed: args.seed, ..OptimizeConfig::default() })?;
    let gamma = gv.gamma;
    let mut entry = base_report(label.clone(), s, gv.clone(), args.seed, &mut report.warnings);
    if args.trials == 0 {
        return Ok(entry);
    }
    let plan = plan_pursuers(s, &PursuerStrategyChoice::Theorem, gamma, args.epsilon)?;
    let cfg = SimConfig { dt: args.dt, epsilon: args.epsilon, seed: args.seed, gamma: Some(gamma), ..SimConfig::default() };

    let upper: Vec<SimResult> = (0..args.trials)
        .into_par_iter()
        .map(|i| {
            let seed = args.seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
            let evader = random_admissible_evader(s, 1 + i % 10, seed, false)?;
            run_plan(s, &plan, &evader, &cfg)
        })
        .collect::<Result<_>>()?;

    let evader_plan = evader_guaranteed_plan(s, &gv)?;
    let straight = ControlSchedule::constant(s.theta, evader_plan.control.clone());
    let lower: Vec<SimResult> = (0..args.trials)
        .into_par_iter()
        .map(|i| {
            if i == 1 {
                return run_plan(s, &plan, &straight, &cfg);
            }
            let controls = adversarial_pursuer_controls(s, &evader_plan.target, i, args.seed);
            let adversary = plan_pursuers(s, &PursuerStrategyChoice::OpenLoop(controls), gamma, args.epsilon)?;
            run_plan(s, &adversary, &straight, &cfg)
        })
        .collect::<Result<_>>()?;

    let fold = |rs: &[SimResult]| {
        rs.iter()
            .map(|r| r.payoff)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p), hi.max(p)))
    };
    let (upper_min, upper_max) = fold(&upper);
    let (lower_min, lower_max) = fold(&lower);
    entry.sandwich = Some(Sandwich { lower_min, lower_max, upper_min, upper_max });

    report.verdicts.push(Verdict::at_most(
        format!("{label}: random evaders vs theorem pursuers, payoff <= gamma + {}", args.envelope),
        upper_max,
        gamma + args.envelope,
    ));
    report.verdicts.push(Verdict::at_least(
        format!("{label}: straight evader vs adversarial pursuers, payoff >= gamma - {}", args.lower_tol),
        lower_min,
        gamma - args.lower_tol,
    ));
    let inadmissible = upper.iter().chain(&lower).filter(|r| !r.pursuers_admissible() || !r.evader_budget.ok).count();
    report.verdicts.push(Verdict::at_most(format!("{label}: all controls admissible"), inadmissible as f64, 0.0));
    entry.simulations = upper.iter().chain(&lower).map(SimResult::summary).collect();
    Ok(entry)
}

pub fn cmd_certify(args: &CertifyArgs) -> Result<RunReport> {
    let mut report = RunReport::new("certify");
    let targets: Vec<(String, Scenario)> = match (args.source.preset, args.dims.is_empty()) {
        (Some(p), false) if args.source.scenario.is_none() => args
            .dims
            .iter()
            .map(|&d| Ok((format!("{}/d={d}", p.name()), preset_scenario(p, d)?)))
            .collect::<Result<_>>()?,
        _ => vec![load_scenario(&args.source)?],
    };
    for (label, s) in targets {
        let entry = certify_scenario(label, &s, args, &mut report)?;
        report.scenarios.push(entry);
    }
    Ok(report)
}

pub fn cmd_example(args: &ExampleArgs) -> Result<RunReport> {
    let mut report = RunReport::new("example");
    let p = args.preset;
    let mut series = Vec::new();
    for &d in &args.dims {
        let s = preset_scenario(p, d)?;
        let gv = gamma_optimize(&s, &OptimizeConfig::default())?;
        let analytic = p.analytic_gamma(d);
        let label = format!("{}/d={d}", p.name());
        if let Some(a) = analytic {
            report.verdicts.push(Verdict::at_most(format!("{label}: optimizer matches analytic within 1e-4"), (gv.gamma - a).abs(), 1e-4));
        }
        let mut entry = base_report(label.clone(), &s, gv.clone(), 0, &mut report.warnings);
        entry.analytic_gamma = analytic;
        if args.oracle && d <= ORACLE_MAX_DIM.min(3) {
            let grid = if d <= 2 { 401 } else { 61 };
            let o = gamma_oracle(&s, grid)?;
            let (lo, hi) = (o.lower_bound.unwrap_or(o.gamma), o.upper_bound.unwrap_or(o.gamma));
            entry.oracle_bracket = Some([lo, hi]);
            let gap = (lo - gv.gamma).max(gv.gamma - hi);
            report.verdicts.push(Verdict::at_most(format!("{label}: optimizer inside oracle bracket"), gap, 1e-9));
        }
        series.push((d, gv.gamma));
        report.scenarios.push(entry);
    }
    let mut sorted = series.clone();
    sorted.sort_by_key(|(d, _)| *d);
    sorted.dedup_by_key(|(d, _)| *d);
    if sorted.len() >= 2 {
        let min_drop = sorted.windows(2).map(|w| w[0].1 - w[1].1).fold(f64::INFINITY, f64::min);
        report.verdicts.push(Verdict { check: "gamma_d strictly decreasing in d".into(), pass: min_drop > 0.0, margin: min_drop });
    }
    let extrapolated = if sorted.len() >= 2 { extrapolate_dimension_limit(&sorted) } else { None };
    let analytic_limit = p.limit_gamma();
    if let Some(x) = extrapolated {
        let tol = if p == ExamplePreset::GeometricOnly { 1e-3 } else { 5e-3 };
        report.verdicts.push(Verdict::at_most(
            format!("extrapolated limit matches {analytic_limit:.5} within {tol}"),
            (x - analytic_limit).abs(),
            tol,
        ));
    }
    report.limit = Some(LimitReport { preset: p.name().to_string(), extrapolated, analytic: analytic_limit, stated: STATED_GAMMA });
    Ok(report)
}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (json, result) = match &cli.command {
        Command::Value(a) => (a.json, cmd_value(a)),
        Command::Simulate(a) => (a.json, cmd_simulate(a)),
        Command::Certify(a) => (a.json, cmd_certify(a)),
        Command::Example(a) => (a.json, cmd_example(a)),
    };
    match result {
        Ok(report) => {
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.render_text());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
