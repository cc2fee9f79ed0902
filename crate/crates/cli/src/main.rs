use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use irs_secrecy::bench::{export_convergence, run_experiment, run_oracle, solve_trial, write_oracle, write_results, ORACLE_FILE};
use irs_secrecy::config::ExperimentSpec;
use irs_secrecy::Method;

#[derive(Parser)]
#[command(version, about = "Secure constant-modulus beamforming with an IRS: Monte Carlo sweeps and traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a spec file and write trials.csv and sweep.csv.
    Run {
        spec: PathBuf,
        /// Output directory; overrides `out` in the experiment file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Master seed; overrides `seed` in the experiment file.
        #[arg(long)]
        seed: Option<u64>,
        /// Record wall time per solve. Makes the output files machine-dependent.
        #[arg(long)]
        timing: bool,
    },
    /// Write the per-iteration convergence trace of one trial.
    Trace {
        spec: PathBuf,
        #[arg(long)]
        trial: u64,
        /// One of dinkelbach_bsum, pmcgd, random_irs, no_irs.
        #[arg(long)]
        method: Method,
        /// Sweep value to use (default: the first one).
        #[arg(long)]
        value: Option<f64>,
        /// Output file (default: <out>/trace_<method>_trial<K>.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare the solvers with an exhaustive phase grid (tiny instances only).
    Oracle {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::from_file(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    Ok(spec)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            spec,
            out,
            workers,
            seed,
            timing,
        } => {
            let mut spec = load(&spec, seed)?;
            spec.timing |= timing;
            let dir = out.unwrap_or_else(|| spec.out_dir.clone());
            let result = run_experiment(&spec, workers)?;
            let failed = result.trials.iter().filter(|r| r.outcome.is_err()).count();
            let (trials, sweep) = write_results(&spec, &result, &dir)?;
            for row in &result.summary {
                println!(
                    "{}={} {:<16} mean {:.4} bits  stderr {:.4}  iters {:.1}",
                    spec.sweep, row.value, row.method, row.mean_rate_bits, row.stderr, row.mean_iters
                );
            }
            if failed > 0 {
                eprintln!("{failed} solve(s) failed; see the error column of {}", trials.display());
            }
            println!("wrote {} and {}", trials.display(), sweep.display());
        }
        Command::Trace {
            spec,
            trial,
            method,
            value,
            out,
            seed,
        } => {
            let spec = load(&spec, seed)?;
            let value = value.unwrap_or(spec.values[0]);
            if !spec.values.contains(&value) {
                bail!("{value} is not one of the sweep values {:?}", spec.values);
            }
            if trial >= spec.trials {
                bail!("trial {trial} is out of range (spec has {} trials)", spec.trials);
            }
            let report = solve_trial(&spec.config_at(value), spec.seed, trial, method, false)?;
            let path = out.unwrap_or_else(|| spec.out_dir.join(format!("trace_{method}_trial{trial}.csv")));
            export_convergence(&report, &path)?;
            println!(
                "{method} trial {trial}: secrecy rate {:.4} bits, objective {:.6e}, {} iterations ({})",
                report.secrecy_rate,
                report.objective,
                report.iterations(),
                report.termination.as_str()
            );
            println!("wrote {}", path.display());
        }
        Command::Oracle { spec, out, workers } => {
            let spec = load(&spec, None)?;
            let rows = run_oracle(&spec, workers)?;
            let path = out.unwrap_or_else(|| spec.out_dir.join(ORACLE_FILE));
            write_oracle(&spec, &rows, &path)?;
            for r in &rows {
                println!(
                    "trial {} {:<16} objective {:.6e}  grid {:.6e}  gap {:+.3e}",
                    r.trial,
                    r.method,
                    r.objective,
                    r.grid_objective,
                    r.objective - r.grid_objective
                );
            }
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
