use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Experiment, ExperimentConfig};
use crate::catalog::bps_to_mbps;
use crate::error::{Error, Result};
use crate::placement::{pack_to_sbs, solve_mckp_with, EfficientStateSet, PlacementSolution, SolutionDocument};
use crate::simulate::{hit_ratio_analytic, stall_probability_analytic, SimOptions, SimReport, Simulator};
use crate::strategies::BaselineSpec;

pub const SOLVE_CSV_HEADER: &str = "rank,popularity,n,r_mbps,qoe";
pub const SWEEP_CSV_HEADER: &str = "axis,value,strategy,avg_qoe,avg_qoe_se,hit_ratio,hit_ratio_se,stall_prob";

/// Solver flags given on the command line; they override the config file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverOverrides {
    pub quantum_mult: Option<u32>,
    pub early_stop: bool,
}

impl SolverOverrides {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(k) = self.quantum_mult {
            cfg.solver.quantum_mult = k;
        }
        if self.early_stop {
            cfg.solver.early_stop = true;
        }
    }
}

/// Writes `bytes` next to `path` and renames it into place, so a failed run
/// never leaves a truncated file behind.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("documents serialize");
    text.push('\n');
    text.into_bytes()
}

/// Runs the efficient-state enumeration, the knapsack DP and per-SBS packing.
pub fn solve_proposed(exp: &Experiment) -> Result<PlacementSolution> {
    let cs = EfficientStateSet::from_table(&exp.table, &exp.cost)?;
    let relaxed = solve_mckp_with(&exp.library, &cs, exp.capacity_units(), &exp.solver)?;
    pack_to_sbs(&relaxed, &exp.library, &exp.cluster, &exp.cost, &exp.table)
}

pub fn solve_csv(solution: &PlacementSolution, exp: &Experiment) -> String {
    let mut out = String::from(SOLVE_CSV_HEADER);
    out.push('\n');
    for (v, a) in exp.library.videos().iter().zip(&solution.assignments) {
        let (n, r, q) = match a {
            Some(o) => (o.state.n, bps_to_mbps(o.state.rate_bps), o.qoe),
            None => (0, 0.0, solution.mbs_qoe),
        };
        writeln!(out, "{},{},{},{},{}", v.id, v.popularity, n, r, q).expect("writing to a string");
    }
    out
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub solution: PlacementSolution,
    pub document: SolutionDocument,
    pub csv: String,
}

/// Computes the solution document and per-video CSV without touching disk.
pub fn run_solve(cfg: &ExperimentConfig) -> Result<SolveOutput> {
    let exp = Experiment::from_config(cfg)?;
    let solution = solve_proposed(&exp)?;
    Ok(SolveOutput {
        document: SolutionDocument::from_solution(&solution),
        csv: solve_csv(&solution, &exp),
        solution,
    })
}

/// Default CSV path for a solution written to `out`.
pub fn csv_path_for(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

pub fn cmd_solve(config: &Path, out: &Path, csv: Option<&Path>, overrides: SolverOverrides) -> Result<SolveOutput> {
    let mut cfg = ExperimentConfig::load(config)?;
    overrides.apply(&mut cfg);
    let output = run_solve(&cfg)?;
    let csv_path = csv.map_or_else(|| csv_path_for(out), Path::to_path_buf);
    write_atomic(out, &to_json(&output.document))?;
    write_atomic(&csv_path, output.csv.as_bytes())?;
    Ok(output)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticSummary {
    pub objective: f64,
    pub hit_ratio: f64,
    pub stall_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationDocument {
    #[serde(flatten)]
    pub report: SimReport,
    pub analytic: AnalyticSummary,
}

fn analytic_summary(solution: &PlacementSolution, exp: &Experiment) -> Result<AnalyticSummary> {
    Ok(AnalyticSummary {
        objective: solution.objective,
        hit_ratio: hit_ratio_analytic(solution, &exp.library),
        stall_prob: stall_probability_analytic(solution, &exp.library, &exp.ladder, &exp.cluster)?,
    })
}

pub fn run_simulate(exp: &Experiment, doc: &SolutionDocument, trials: u64, seed: u64) -> Result<SimulationDocument> {
    let solution = doc.to_solution(&exp.library, &exp.table, &exp.cost)?;
    let sim = Simulator::new(&solution, &exp.library, &exp.ladder, &exp.cluster, &exp.model)?;
    let report = sim.estimate(&SimOptions {
        trials,
        seed,
        per_rank: false,
    })?;
    Ok(SimulationDocument {
        report,
        analytic: analytic_summary(&solution, exp)?,
    })
}

pub fn cmd_simulate(
    config: &Path,
    solution: &Path,
    trials: Option<u64>,
    seed: Option<u64>,
    out: &Path,
) -> Result<SimulationDocument> {
    let cfg = ExperimentConfig::load(config)?;
    let exp = Experiment::from_config(&cfg)?;
    let text = std::fs::read_to_string(solution).map_err(|source| Error::Io {
        path: solution.to_path_buf(),
        source,
    })?;
    let doc: SolutionDocument = serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", solution.display())))?;
    let result = run_simulate(
        &exp,
        &doc,
        trials.unwrap_or(exp.sim.trials),
        seed.unwrap_or(exp.sim.seed),
    )?;
    write_atomic(out, &to_json(&result))?;
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepAxis {
    #[value(name = "n_sbs")]
    NSbs,
    #[value(name = "cache_bytes")]
    CacheBytes,
    #[value(name = "sbs_snr_db")]
    SbsSnrDb,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::NSbs => "n_sbs",
            SweepAxis::CacheBytes => "cache_bytes",
            SweepAxis::SbsSnrDb => "sbs_snr_db",
        }
    }

    /// Parses one axis value. Cache sizes accept `TB`, `GB` and `MB`
    /// suffixes (decimal).
    pub fn parse_value(&self, raw: &str) -> Result<f64> {
        let raw = raw.trim();
        let bad = || Error::invalid("values", format!("cannot parse `{raw}` for axis {}", self.name()));
        let value = match self {
            SweepAxis::CacheBytes => {
                let upper = raw.to_ascii_uppercase();
                let (number, scale) = [("TB", 1e12), ("GB", 1e9), ("MB", 1e6), ("B", 1.0)]
                    .iter()
                    .find_map(|(suffix, scale)| upper.strip_suffix(suffix).map(|n| (n.trim().to_owned(), *scale)))
                    .unwrap_or((upper.clone(), 1.0));
                number.parse::<f64>().map_err(|_| bad())? * scale
            }
            SweepAxis::NSbs => raw.parse::<u32>().map_err(|_| bad())? as f64,
            SweepAxis::SbsSnrDb => raw.parse::<f64>().map_err(|_| bad())?,
        };
        if !value.is_finite() {
            return Err(bad());
        }
        Ok(value)
    }

    pub fn apply(&self, cfg: &mut ExperimentConfig, value: f64) {
        match self {
            SweepAxis::NSbs => cfg.cluster.n_sbs = value as u32,
            SweepAxis::CacheBytes => cfg.cluster.cache_bytes = value,
            SweepAxis::SbsSnrDb => cfg.cluster.sbs_snr_db = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Proposed,
    Baseline(BaselineSpec),
    /// Everything from the macro cell; always reported as a reference row.
    MbsOnly,
}

impl Strategy {
    pub fn place(&self, exp: &Experiment) -> Result<PlacementSolution> {
        match self {
            Strategy::Proposed => solve_proposed(exp),
            Strategy::Baseline(spec) => spec.place(&exp.library, &exp.cluster, &exp.cost, &exp.table),
            Strategy::MbsOnly => Ok(PlacementSolution::all_mbs(&exp.library, exp.table.mbs_qoe(), exp.capacity_units())),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::Proposed => f.write_str("proposed"),
            Strategy::Baseline(spec) => spec.fmt(f),
            Strategy::MbsOnly => f.write_str("mbs"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proposed" => Ok(Strategy::Proposed),
            "mbs" => Ok(Strategy::MbsOnly),
            other => other.parse().map(Strategy::Baseline),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub strategy: Strategy,
    /// Analytic objective of the placement.
    pub objective: f64,
    pub avg_qoe: f64,
    pub avg_qoe_se: f64,
    pub hit_ratio: f64,
    pub hit_ratio_se: f64,
    pub stall_prob: f64,
}

/// Evaluates every strategy at one configuration. With `trials == 0` the
/// rows carry the analytic values and zero standard errors.
pub fn evaluate_strategies(exp: &Experiment, strategies: &[Strategy], trials: u64, seed: u64) -> Result<Vec<(Strategy, f64, SimReport)>> {
    strategies
        .iter()
        .map(|s| {
            let placement = s.place(exp)?;
            let report = if trials == 0 {
                let a = analytic_summary(&placement, exp)?;
                SimReport {
                    trials: 0,
                    seed,
                    avg_qoe: a.objective,
                    avg_qoe_se: 0.0,
                    hit_ratio: a.hit_ratio,
                    hit_ratio_se: 0.0,
                    stall_prob: a.stall_prob,
                    stall_prob_se: 0.0,
                    per_rank_qoe: None,
                }
            } else {
                Simulator::new(&placement, &exp.library, &exp.ladder, &exp.cluster, &exp.model)?.estimate(&SimOptions {
                    trials,
                    seed,
                    per_rank: false,
                })?
            };
            Ok((*s, placement.objective, report))
        })
        .collect()
}

pub fn run_sweep(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
    strategies: &[Strategy],
    trials: u64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut strategies = strategies.to_vec();
    if !strategies.contains(&Strategy::MbsOnly) {
        strategies.push(Strategy::MbsOnly);
    }
    let points: Vec<Result<Vec<SweepRow>>> = values
        .par_iter()
        .map(|&value| {
            let mut point = cfg.clone();
            axis.apply(&mut point, value);
            let exp = Experiment::from_config(&point)?;
            Ok(evaluate_strategies(&exp, &strategies, trials, seed)?
                .into_iter()
                .map(|(strategy, objective, r)| SweepRow {
                    axis,
                    value,
                    strategy,
                    objective,
                    avg_qoe: r.avg_qoe,
                    avg_qoe_se: r.avg_qoe_se,
                    hit_ratio: r.hit_ratio,
                    hit_ratio_se: r.hit_ratio_se,
                    stall_prob: r.stall_prob,
                })
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for p in points {
        rows.extend(p?);
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.axis.name(),
            r.value,
            r.strategy,
            r.avg_qoe,
            r.avg_qoe_se,
            r.hit_ratio,
            r.hit_ratio_se,
            r.stall_prob
        )
        .expect("writing to a string");
    }
    out
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep(
    config: &Path,
    axis: SweepAxis,
    values: &[String],
    strategies: &[String],
    trials: Option<u64>,
    seed: Option<u64>,
    overrides: SolverOverrides,
    out: &Path,
) -> Result<Vec<SweepRow>> {
    let mut cfg = ExperimentConfig::load(config)?;
    overrides.apply(&mut cfg);
    let values = values.iter().map(|v| axis.parse_value(v)).collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::invalid("values", "need at least one value"));
    }
    let strategies = strategies.iter().map(|s| s.parse()).collect::<Result<Vec<Strategy>>>()?;
    let trials = trials.unwrap_or(cfg.sim.trials);
    let seed = seed.unwrap_or(cfg.sim.seed);
    let rows = run_sweep(&cfg, axis, &values, &strategies, trials, seed)?;
    write_atomic(out, sweep_csv(&rows).as_bytes())?;
    Ok(rows)
}
