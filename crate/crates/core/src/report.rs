use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::objective::BeamformerState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    DinkelbachBsum,
    Pmcgd,
    RandomIrs,
    NoIrs,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Pmcgd, Method::DinkelbachBsum, Method::RandomIrs, Method::NoIrs];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::DinkelbachBsum => "dinkelbach_bsum",
            Method::Pmcgd => "pmcgd",
            Method::RandomIrs => "random_irs",
            Method::NoIrs => "no_irs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The change-in-objective tolerance was met.
    Converged,
    MaxIter,
    /// Riemannian gradient vanished.
    Stationary,
    /// Armijo backtracking exhausted along steepest descent.
    LineSearchFailed,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIter => "max_iter",
            Termination::Stationary => "stationary",
            Termination::LineSearchFailed => "line_search_failed",
        }
    }
}

/// One row of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// Fractional objective at this iterate.
    pub objective: f64,
    /// Dinkelbach parameter in effect, if the method has one.
    pub alpha: Option<f64>,
    pub grad_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub method: Method,
    pub state: BeamformerState,
    pub secrecy_rate: f64,
    /// Final fractional objective.
    pub objective: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    /// Per-iteration trace, starting with the initial point.
    pub history: Vec<IterationRecord>,
    /// Dinkelbach parameter after each outer update, starting with the initial value.
    pub alpha_history: Vec<f64>,
    /// Difference-objective history of each inner BSUM run.
    pub inner_histories: Vec<Vec<f64>>,
    pub grad_norm: Option<f64>,
    pub termination: Termination,
    /// Seconds; `None` unless timing was requested.
    pub wall_time: Option<f64>,
    pub seed: Option<u64>,
    pub trial: Option<u64>,
}

impl SolveReport {
    pub fn objective_history(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.objective).collect()
    }
}
