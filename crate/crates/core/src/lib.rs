//! Secure transmit beamforming with constant-modulus antennas assisted by an
//! intelligent reflecting surface (IRS).
//!
//! Alice steers a phase-only beamformer `w` (`|w_i| = P`) and the IRS applies
//! unit-modulus reflections `θ`. Both solvers minimize the ratio
//! `(1 + ‖G_e w‖²/σ²) / (1 + ‖G_b w‖²/σ²)`, whose negative log is the secrecy
//! rate whenever it is below one.

pub mod baselines;
pub mod bench;
pub mod channel;
pub mod config;
pub mod dinkelbach;
pub mod error;
pub mod numerics;
pub mod objective;
pub mod pmcgd;
pub mod report;

pub use baselines::{grid_oracle, linear_subproblem_oracle, no_irs_solve, random_irs_solve};
pub use channel::{derive_seed, effective_channel, sample_channels, ChannelSet, Distances, SystemConfig};
pub use dinkelbach::{bsum_solve, dinkelbach_solve, DinkelbachParams, DinkelbachTrace};
pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, ComplexVector, PowerIteration};
pub use objective::{fractional_objective, secrecy_rate, BeamformerState};
pub use pmcgd::{pmcgd_solve, CgdParams};
pub use report::{IterationRecord, Method, SolveReport, Termination};

/// Stopping rules and constants for every solver.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverSettings {
    pub dinkelbach: DinkelbachParams,
    pub cgd: CgdParams,
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        self.dinkelbach.validate()?;
        self.cgd.validate()
    }
}
