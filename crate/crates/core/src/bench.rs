//! Seeded Monte Carlo sweeps and their CSV outputs.
//!
//! Each `(sweep value, trial)` pair is an independent work item. Channels come
//! from `(seed, trial)`, so every sweep value sees the same fading draws where
//! the dimensions allow it. All methods of a trial start from one shared
//! random feasible point. Results are gathered in input order, which makes the
//! files independent of the worker count.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{grid_oracle, no_irs_solve, random_irs_solve};
use crate::channel::{derive_seed, sample_channels, ChannelSet, SystemConfig};
use crate::config::{ExperimentSpec, SweepVariable};
use crate::dinkelbach::dinkelbach_solve;
use crate::error::{Error, Result};
use crate::objective::BeamformerState;
use crate::pmcgd::pmcgd_solve;
use crate::report::{Method, SolveReport};

const INIT_STREAM: u64 = 0x1a17;
const THETA_STREAM: u64 = 0x7e7a;

pub const TRIALS_FILE: &str = "trials.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const ORACLE_FILE: &str = "oracle.csv";

impl SolveReport {
    /// Iterations reported in summaries: CG steps for PMCGD, total BSUM passes otherwise.
    pub fn iterations(&self) -> usize {
        match self.method {
            Method::Pmcgd => self.outer_iterations,
            _ => self.inner_iterations,
        }
    }
}

/// Shared random feasible starting point of a trial.
pub fn trial_init(cfg: &SystemConfig, seed: u64, trial: u64) -> BeamformerState {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[trial, INIT_STREAM]));
    BeamformerState::random(cfg.m, cfg.n_i, cfg.amplitude, &mut rng)
}

/// Runs one method on given channels from a given start.
pub fn solve_method(
    ch: &ChannelSet,
    init: &BeamformerState,
    cfg: &SystemConfig,
    method: Method,
    theta_seed: u64,
) -> Result<SolveReport> {
    let s = &cfg.solver;
    match method {
        Method::DinkelbachBsum => dinkelbach_solve(ch, init, &s.dinkelbach, cfg.noise_power),
        Method::Pmcgd => pmcgd_solve(ch, init, &s.cgd, cfg.noise_power),
        Method::RandomIrs => random_irs_solve(ch, theta_seed, &init.w, &s.dinkelbach, cfg.noise_power),
        Method::NoIrs => no_irs_solve(ch, &init.w, &s.dinkelbach, cfg.noise_power),
    }
}

/// Samples trial `trial` of `cfg` and solves it with `method`.
pub fn solve_trial(cfg: &SystemConfig, seed: u64, trial: u64, method: Method, timing: bool) -> Result<SolveReport> {
    cfg.validate()?;
    let ch = sample_channels(cfg, seed, trial);
    let init = trial_init(cfg, seed, trial);
    let start = Instant::now();
    let mut rep = solve_method(&ch, &init, cfg, method, derive_seed(seed, &[trial, THETA_STREAM]))?;
    if timing {
        rep.wall_time = Some(start.elapsed().as_secs_f64());
    }
    rep.seed = Some(seed);
    rep.trial = Some(trial);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub value: f64,
    pub trial: u64,
    pub method: Method,
    /// Solver failures are kept as text so the sweep can continue.
    pub outcome: std::result::Result<SolveReport, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub value: f64,
    pub method: Method,
    pub mean_rate_bits: f64,
    pub stderr: f64,
    pub mean_iters: f64,
    pub mean_walltime_s: Option<f64>,
    pub n_ok: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub trials: Vec<TrialRow>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentOutput {
    pub fn summary_for(&self, value: f64, method: Method) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.value == value && r.method == method)
    }
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::invalid("worker count must be at least 1"));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::invalid(format!("thread pool: {e}")))
}

/// Mean and standard error in a fixed summation order.
fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn summarize(spec: &ExperimentSpec, trials: &[TrialRow]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for &value in &spec.values {
        for &method in &spec.methods {
            let ok: Vec<&SolveReport> = trials
                .iter()
                .filter(|r| r.value == value && r.method == method)
                .filter_map(|r| r.outcome.as_ref().ok())
                .collect();
            if ok.is_empty() {
                out.push(SummaryRow {
                    value,
                    method,
                    mean_rate_bits: f64::NAN,
                    stderr: f64::NAN,
                    mean_iters: f64::NAN,
                    mean_walltime_s: None,
                    n_ok: 0,
                });
                continue;
            }
            let rates: Vec<f64> = ok.iter().map(|r| r.secrecy_rate).collect();
            let iters: Vec<f64> = ok.iter().map(|r| r.iterations() as f64).collect();
            let (mean_rate_bits, stderr) = mean_stderr(&rates);
            let times: Option<Vec<f64>> = ok.iter().map(|r| r.wall_time).collect();
            out.push(SummaryRow {
                value,
                method,
                mean_rate_bits,
                stderr,
                mean_iters: mean_stderr(&iters).0,
                mean_walltime_s: times.map(|t| mean_stderr(&t).0),
                n_ok: ok.len(),
            });
        }
    }
    out
}

/// Runs every `(value, trial, method)` of `spec` on `workers` threads (all cores if `None`).
pub fn run_experiment(spec: &ExperimentSpec, workers: Option<usize>) -> Result<ExperimentOutput> {
    spec.validate()?;
    let jobs: Vec<(f64, u64)> = spec
        .values
        .iter()
        .flat_map(|&v| (0..spec.trials).map(move |t| (v, t)))
        .collect();
    let per_job: Vec<Vec<TrialRow>> = pool(workers)?.install(|| {
        jobs.par_iter()
            .map(|&(value, trial)| {
                let cfg = spec.config_at(value);
                spec.methods
                    .iter()
                    .map(|&method| TrialRow {
                        value,
                        trial,
                        method,
                        outcome: solve_trial(&cfg, spec.seed, trial, method, spec.timing).map_err(|e| e.to_string()),
                    })
                    .collect()
            })
            .collect()
    });
    let trials: Vec<TrialRow> = per_job.into_iter().flatten().collect();
    let summary = summarize(spec, &trials);
    Ok(ExperimentOutput { trials, summary })
}

/// Shortest round-trip text for a float; empty for `None`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn value_text(spec: &ExperimentSpec, v: f64) -> String {
    if spec.sweep == SweepVariable::PDb {
        num(v)
    } else {
        format!("{}", v as u64)
    }
}

pub const TRIALS_HEADER: [&str; 12] = [
    "value",
    "trial",
    "method",
    "secrecy_rate_bits",
    "objective",
    "iterations",
    "outer_iterations",
    "inner_iterations",
    "grad_norm",
    "termination",
    "walltime_s",
    "error",
];

pub const SWEEP_HEADER: [&str; 7] = ["value", "method", "mean_rate_bits", "stderr", "mean_iters", "mean_walltime_s", "n_ok"];

/// Writes `trials.csv` and `sweep.csv` into `dir`, creating it if needed.
pub fn write_results(spec: &ExperimentSpec, out: &ExperimentOutput, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let trials_path = dir.join(TRIALS_FILE);
    let mut w = csv::Writer::from_path(&trials_path)?;
    w.write_record(TRIALS_HEADER)?;
    for r in &out.trials {
        let mut rec = vec![value_text(spec, r.value), r.trial.to_string(), r.method.to_string()];
        match &r.outcome {
            Ok(rep) => rec.extend([
                num(rep.secrecy_rate),
                num(rep.objective),
                rep.iterations().to_string(),
                rep.outer_iterations.to_string(),
                rep.inner_iterations.to_string(),
                opt(rep.grad_norm),
                rep.termination.as_str().to_string(),
                opt(rep.wall_time),
                String::new(),
            ]),
            Err(e) => {
                rec.extend(std::iter::repeat_n(String::new(), 8));
                rec.push(e.clone());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;

    let sweep_path = dir.join(SWEEP_FILE);
    let mut w = csv::Writer::from_path(&sweep_path)?;
    w.write_record(SWEEP_HEADER)?;
    for r in &out.summary {
        w.write_record([
            value_text(spec, r.value),
            r.method.to_string(),
            num(r.mean_rate_bits),
            num(r.stderr),
            num(r.mean_iters),
            opt(r.mean_walltime_s),
            r.n_ok.to_string(),
        ])?;
    }
    w.flush()?;
    Ok((trials_path, sweep_path))
}

/// One row per recorded iterate: index, objective, `α` and gradient norm (empty when not tracked).
pub fn export_convergence(report: &SolveReport, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "objective", "alpha", "grad_norm"])?;
    for (k, r) in report.history.iter().enumerate() {
        w.write_record([k.to_string(), num(r.objective), opt(r.alpha), opt(r.grad_norm)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub value: f64,
    pub trial: u64,
    pub grid_objective: f64,
    pub method: Method,
    pub objective: f64,
}

/// Compares every method against the exhaustive phase grid on tiny instances.
pub fn run_oracle(spec: &ExperimentSpec, workers: Option<usize>) -> Result<Vec<OracleRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    let pool = pool(workers)?;
    for &value in &spec.values {
        let cfg = spec.config_at(value);
        for trial in 0..spec.trials {
            let ch = sample_channels(&cfg, spec.seed, trial);
            let (_, grid) = pool.install(|| grid_oracle(&ch, spec.oracle_levels, cfg.amplitude, cfg.noise_power))?;
            for &method in &spec.methods {
                let rep = solve_trial(&cfg, spec.seed, trial, method, false)?;
                rows.push(OracleRow {
                    value,
                    trial,
                    grid_objective: grid,
                    method,
                    objective: rep.objective,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_oracle(spec: &ExperimentSpec, rows: &[OracleRow], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["value", "trial", "method", "objective", "grid_objective", "gap"])?;
    for r in rows {
        w.write_record([
            value_text(spec, r.value),
            r.trial.to_string(),
            r.method.to_string(),
            num(r.objective),
            num(r.grid_objective),
            num(r.objective - r.grid_objective),
        ])?;
    }
    w.flush()?;
    Ok(())
}
