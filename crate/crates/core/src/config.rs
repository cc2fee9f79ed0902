//! Flat `key = value` experiment files.
//!
//! Every key is optional; omitted keys take the defaults of [`SystemConfig`],
//! [`SolverSettings`] and [`ExperimentSpec`]. dB quantities are converted to
//! linear values here and nowhere else.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::report::Method;

/// System parameter varied across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    PDb,
    M,
    NB,
    NE,
    NI,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::PDb => "P_db",
            SweepVariable::M => "M",
            SweepVariable::NB => "N_b",
            SweepVariable::NE => "N_e",
            SweepVariable::NI => "N_i",
        }
    }

    fn is_count(self) -> bool {
        !matches!(self, SweepVariable::PDb)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SweepVariable::PDb, SweepVariable::M, SweepVariable::NB, SweepVariable::NE, SweepVariable::NI]
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown sweep variable {s:?}")))
    }
}

/// Converts a power in dB to the per-antenna amplitude `10^(dB/20)`.
pub fn amplitude_from_db(p_db: f64) -> f64 {
    10f64.powf(p_db / 20.0)
}

/// A Monte Carlo study: a base system, one swept parameter and the methods to compare.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: SystemConfig,
    pub sweep: SweepVariable,
    /// Strictly increasing; counts are whole numbers ≥ 1.
    pub values: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub out_dir: PathBuf,
    /// Record wall time per solve. Off by default so output files are reproducible.
    pub timing: bool,
    /// Phase levels per entry for the grid oracle.
    pub oracle_levels: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let base = SystemConfig::default();
        Self {
            values: vec![base.m as f64],
            base,
            sweep: SweepVariable::M,
            trials: 100,
            seed: 1,
            methods: Method::ALL.to_vec(),
            out_dir: PathBuf::from("results"),
            timing: false,
            oracle_levels: 16,
        }
    }
}

impl ExperimentSpec {
    /// Base system with the sweep variable set to `value`.
    pub fn config_at(&self, value: f64) -> SystemConfig {
        let mut cfg = self.base.clone();
        match self.sweep {
            SweepVariable::PDb => cfg.amplitude = amplitude_from_db(value),
            SweepVariable::M => cfg.m = value as usize,
            SweepVariable::NB => cfg.n_b = value as usize,
            SweepVariable::NE => cfg.n_e = value as usize,
            SweepVariable::NI => cfg.n_i = value as usize,
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.values.is_empty() {
            return Err(Error::invalid("sweep needs at least one value"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("at least one method is required"));
        }
        if self.oracle_levels == 0 {
            return Err(Error::invalid("oracle_levels must be at least 1"));
        }
        for v in &self.values {
            if !v.is_finite() {
                return Err(Error::invalid("sweep values must be finite"));
            }
            if self.sweep.is_count() && (*v < 1.0 || v.fract() != 0.0) {
                return Err(Error::invalid(format!("{} values must be whole numbers ≥ 1", self.sweep)));
            }
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("sweep values must be strictly increasing"));
        }
        for v in &self.values {
            self.config_at(*v).validate()?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        parse_spec(&text, &path.display().to_string())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    m: Option<usize>,
    n_b: Option<usize>,
    n_e: Option<usize>,
    n_i: Option<usize>,
    p_db: Option<f64>,
    ref_loss_db: Option<f64>,
    path_exponent: Option<f64>,
    d_alice_bob: Option<f64>,
    d_alice_irs: Option<f64>,
    d_alice_eve: Option<f64>,
    d_irs_bob: Option<f64>,
    d_irs_eve: Option<f64>,
    noise_power: Option<f64>,
    noise_power_db: Option<f64>,

    xi_outer: Option<f64>,
    xi_inner: Option<f64>,
    max_outer: Option<usize>,
    max_inner: Option<usize>,
    power_tol: Option<f64>,
    power_max_iter: Option<usize>,
    power_seed: Option<u64>,
    cgd_xi: Option<f64>,
    cgd_max_iter: Option<usize>,
    cgd_grad_tol: Option<f64>,
    armijo_sufficient_decrease: Option<f64>,
    armijo_contraction: Option<f64>,
    armijo_initial_step: Option<f64>,
    armijo_max_backtracks: Option<usize>,

    sweep: Option<String>,
    values: Option<Vec<f64>>,
    trials: Option<u64>,
    seed: Option<u64>,
    methods: Option<Vec<String>>,
    out: Option<String>,
    timing: Option<bool>,
    oracle_levels: Option<usize>,
}

/// 1-based line holding `key = ...`, or 1 when absent.
fn line_of_key(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(1, |i| i + 1)
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses an experiment file. `origin` names the source in error messages.
pub fn parse_spec(text: &str, origin: &str) -> Result<ExperimentSpec> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_string(),
        line: e.span().map_or(1, |s| line_of_offset(text, s.start)),
        message: e.message().to_string(),
    })?;
    let at = |key: &str, err: Error| Error::Parse {
        path: origin.to_string(),
        line: line_of_key(text, key),
        message: match err {
            Error::InvalidInput(m) => m,
            other => other.to_string(),
        },
    };

    let mut spec = ExperimentSpec::default();
    let cfg = &mut spec.base;
    macro_rules! set {
        ($($field:ident => $target:expr),* $(,)?) => {
            $(if let Some(v) = raw.$field { $target = v; })*
        };
    }
    set! {
        m => cfg.m,
        n_b => cfg.n_b,
        n_e => cfg.n_e,
        n_i => cfg.n_i,
        ref_loss_db => cfg.ref_loss_db,
        path_exponent => cfg.path_exponent,
        d_alice_bob => cfg.distances.alice_bob,
        d_alice_irs => cfg.distances.alice_irs,
        d_alice_eve => cfg.distances.alice_eve,
        d_irs_bob => cfg.distances.irs_bob,
        d_irs_eve => cfg.distances.irs_eve,
        noise_power => cfg.noise_power,
        xi_outer => cfg.solver.dinkelbach.xi_outer,
        xi_inner => cfg.solver.dinkelbach.xi_inner,
        max_outer => cfg.solver.dinkelbach.max_outer,
        max_inner => cfg.solver.dinkelbach.max_inner,
        power_tol => cfg.solver.dinkelbach.power.rel_tol,
        power_max_iter => cfg.solver.dinkelbach.power.max_iter,
        power_seed => cfg.solver.dinkelbach.power.seed,
        cgd_xi => cfg.solver.cgd.xi,
        cgd_max_iter => cfg.solver.cgd.max_iter,
        cgd_grad_tol => cfg.solver.cgd.grad_tol,
        armijo_sufficient_decrease => cfg.solver.cgd.sufficient_decrease,
        armijo_contraction => cfg.solver.cgd.contraction,
        armijo_initial_step => cfg.solver.cgd.initial_step,
        armijo_max_backtracks => cfg.solver.cgd.max_backtracks,
        trials => spec.trials,
        seed => spec.seed,
        timing => spec.timing,
        oracle_levels => spec.oracle_levels,
    }
    if let Some(p) = raw.p_db {
        cfg.amplitude = amplitude_from_db(p);
    }
    match (raw.noise_power, raw.noise_power_db) {
        (Some(_), Some(_)) => {
            return Err(at("noise_power_db", Error::invalid("give noise_power or noise_power_db, not both")));
        }
        (None, Some(db)) => cfg.noise_power = 10f64.powf(db / 10.0),
        _ => {}
    }
    if let Some(s) = raw.sweep {
        spec.sweep = s.parse().map_err(|e| at("sweep", e))?;
    }
    spec.values = match raw.values {
        Some(v) => v,
        None => vec![match spec.sweep {
            SweepVariable::PDb => raw.p_db.unwrap_or(0.0),
            SweepVariable::M => spec.base.m as f64,
            SweepVariable::NB => spec.base.n_b as f64,
            SweepVariable::NE => spec.base.n_e as f64,
            SweepVariable::NI => spec.base.n_i as f64,
        }],
    };
    if let Some(ms) = raw.methods {
        spec.methods = ms
            .iter()
            .map(|m| m.parse::<Method>())
            .collect::<Result<_>>()
            .map_err(|e| at("methods", e))?;
    }
    if let Some(o) = raw.out {
        spec.out_dir = PathBuf::from(o);
    }

    spec.validate().map_err(|e| {
        let msg = e.to_string();
        let key = if msg.contains("sweep") || msg.contains("whole numbers") {
            "values"
        } else if msg.contains("trials") {
            "trials"
        } else if msg.contains("method") {
            "methods"
        } else if msg.contains("noise") {
            "noise_power"
        } else if msg.contains("distance") {
            "d_alice_bob"
        } else {
            ""
        };
        at(key, e)
    })?;
    Ok(spec)
}
