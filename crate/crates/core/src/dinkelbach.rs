//! Dinkelbach outer loop with a block successive upper-bound minimization (BSUM)
//! inner solver.
//!
//! For a fixed ratio parameter `α`, the inner problem minimizes
//! `F(w, θ) = (1 + ‖Eve‖²) − α(1 + ‖Bob‖²)` by alternating a `w`-block and a
//! `θ`-block step. Each block is a quadratic over a product of circles; it is
//! majorized by replacing the Hessian with `λ_max·I`, which turns the block
//! into a linear objective over the circles with a closed-form minimizer.

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::numerics::{max_eigenvalue, phase_project_with, ComplexVector, HermitianOperator, PowerIteration};
use crate::objective::{a_operator, evaluate, secrecy_from_objective, theta_surrogate, BeamformerState};
use crate::report::{IterationRecord, Method, SolveReport, Termination};

/// Update arguments below this modulus (relative to the problem scale) keep the previous phase.
pub const ZERO_ARGUMENT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DinkelbachParams {
    /// Absolute change in `α` that ends the outer loop.
    pub xi_outer: f64,
    /// Absolute change in the inner difference objective that ends a BSUM run.
    pub xi_inner: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub power: PowerIteration,
}

impl Default for DinkelbachParams {
    fn default() -> Self {
        Self {
            xi_outer: 1e-6,
            xi_inner: 1e-6,
            max_outer: 50,
            max_inner: 500,
            power: PowerIteration::default(),
        }
    }
}

impl DinkelbachParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi_outer > 0.0 && self.xi_inner > 0.0) {
            return Err(Error::invalid("Dinkelbach tolerances must be positive"));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::invalid("Dinkelbach iteration caps must be positive"));
        }
        Ok(())
    }
}

/// Outer-loop bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct DinkelbachTrace {
    pub alpha_history: Vec<f64>,
    pub inner_objective_histories: Vec<Vec<f64>>,
    pub outer_iterations: usize,
    pub termination: Termination,
}

/// `λ_max` of the block quadratic. A capped power iteration still yields its best Rayleigh quotient.
fn block_lambda(op: &impl HermitianOperator, power: &PowerIteration) -> Result<f64> {
    match max_eigenvalue(op, power) {
        Ok(l) => Ok(l),
        Err(Error::NotConverged { best, .. }) => Ok(best),
        Err(e) => Err(e),
    }
}

/// New ratio parameter: the fractional objective at `s`.
pub fn update_alpha(ch: &ChannelSet, s: &BeamformerState, noise_power: f64) -> f64 {
    evaluate(ch, s, noise_power).objective()
}

/// Closed-form minimizer of `Re(wᴴ(A − λ_max I)w_k)` over `|w_i| = P`:
/// `w = P·exp(j·arg((λ_max I − A) w_k))`.
pub fn bsum_w_step(a: &impl HermitianOperator, w_k: &[Complex64], amplitude: f64, power: &PowerIteration) -> Result<ComplexVector> {
    let lambda = block_lambda(a, power)?;
    let mut aw = vec![Complex64::new(0.0, 0.0); w_k.len()];
    a.apply(w_k, &mut aw);
    let arg: ComplexVector = w_k.iter().zip(&aw).map(|(w, aw)| lambda * w - aw).collect();
    let tol = ZERO_ARGUMENT_TOL * (lambda.abs() * amplitude).max(1.0);
    Ok(phase_project_with(&arg, amplitude, Some(w_k), tol))
}

/// Closed-form minimizer of `Re(θᴴ((P − λ_max I)θ_k + linear))` over `|θ_j| = 1`:
/// `θ = exp(j·arg((λ_max I − P)θ_k − linear))`, with `linear = d̄ − α f̄`.
pub fn bsum_theta_step(
    p: &impl HermitianOperator,
    linear: &[Complex64],
    theta_k: &[Complex64],
    power: &PowerIteration,
) -> Result<ComplexVector> {
    if theta_k.is_empty() {
        return Ok(Vec::new());
    }
    let lambda = block_lambda(p, power)?;
    let mut pt = vec![Complex64::new(0.0, 0.0); theta_k.len()];
    p.apply(theta_k, &mut pt);
    let arg: ComplexVector = theta_k
        .iter()
        .zip(&pt)
        .zip(linear)
        .map(|((t, pt), l)| lambda * t - pt - l)
        .collect();
    let scale = linear.iter().map(|z| z.norm()).fold(lambda.abs(), f64::max);
    Ok(phase_project_with(&arg, 1.0, Some(theta_k), ZERO_ARGUMENT_TOL * scale.max(1.0)))
}

/// Result of one inner BSUM run.
#[derive(Debug, Clone)]
pub struct BsumOutcome {
    pub state: BeamformerState,
    /// Difference objective `F`, initial point first.
    pub history: Vec<f64>,
    /// Fractional objective at the same iterates.
    pub ratios: Vec<f64>,
    pub converged: bool,
}

/// Alternating `w`/`θ` majorized steps for a fixed `α` until `|ΔF| < ξ` or the cap.
pub fn bsum_solve(
    ch: &ChannelSet,
    alpha: f64,
    init: &BeamformerState,
    params: &DinkelbachParams,
    noise_power: f64,
) -> Result<BsumOutcome> {
    bsum_blocks(ch, alpha, init, params, noise_power, true)
}

fn bsum_blocks(
    ch: &ChannelSet,
    alpha: f64,
    init: &BeamformerState,
    params: &DinkelbachParams,
    noise_power: f64,
    update_theta: bool,
) -> Result<BsumOutcome> {
    let amplitude = init.amplitude();
    let mut s = init.clone();
    let ev = evaluate(ch, &s, noise_power);
    let mut history = vec![ev.numerator - alpha * ev.denominator];
    let mut ratios = vec![ev.objective()];
    let mut converged = false;
    for _ in 0..params.max_inner {
        // A depends on θ, so it is rebuilt for every w-step.
        let a = a_operator(ch, &s.theta, alpha, noise_power)?;
        s.w = bsum_w_step(&a, &s.w, amplitude, &params.power)?;
        if update_theta && !s.theta.is_empty() {
            let sur = theta_surrogate(ch, &s.w, alpha, noise_power)?;
            s.theta = bsum_theta_step(&sur.p_op, &sur.linear, &s.theta, &params.power)?;
        }
        let ev = evaluate(ch, &s, noise_power);
        let f = ev.numerator - alpha * ev.denominator;
        let prev = *history.last().expect("history starts non-empty");
        history.push(f);
        ratios.push(ev.objective());
        if (f - prev).abs() < params.xi_inner {
            converged = true;
            break;
        }
    }
    Ok(BsumOutcome {
        state: s,
        history,
        ratios,
        converged,
    })
}

/// Full Dinkelbach-BSUM solve over both blocks.
pub fn dinkelbach_solve(ch: &ChannelSet, init: &BeamformerState, params: &DinkelbachParams, noise_power: f64) -> Result<SolveReport> {
    dinkelbach_run(ch, init, params, noise_power, true, Method::DinkelbachBsum)
}

/// Dinkelbach-BSUM with `θ` frozen at its initial value.
pub(crate) fn dinkelbach_w_only(
    ch: &ChannelSet,
    init: &BeamformerState,
    params: &DinkelbachParams,
    noise_power: f64,
    method: Method,
) -> Result<SolveReport> {
    dinkelbach_run(ch, init, params, noise_power, false, method)
}

fn dinkelbach_run(
    ch: &ChannelSet,
    init: &BeamformerState,
    params: &DinkelbachParams,
    noise_power: f64,
    update_theta: bool,
    method: Method,
) -> Result<SolveReport> {
    let mut s = init.clone();
    let mut alpha = update_alpha(ch, &s, noise_power);
    let mut alpha_history = vec![alpha];
    let mut inner_histories = Vec::new();
    let mut history = vec![IterationRecord {
        objective: alpha,
        alpha: Some(alpha),
        grad_norm: None,
    }];
    let mut inner_total = 0;
    let mut termination = Termination::MaxIter;
    for _ in 0..params.max_outer {
        let out = bsum_blocks(ch, alpha, &s, params, noise_power, update_theta)?;
        inner_total += out.history.len() - 1;
        history.extend(out.ratios.iter().skip(1).map(|&r| IterationRecord {
            objective: r,
            alpha: Some(alpha),
            grad_norm: None,
        }));
        inner_histories.push(out.history);
        s = out.state;
        let next = update_alpha(ch, &s, noise_power);
        alpha_history.push(next);
        let delta = (next - alpha).abs();
        alpha = next;
        if delta < params.xi_outer {
            termination = Termination::Converged;
            break;
        }
    }
    let objective = update_alpha(ch, &s, noise_power);
    Ok(SolveReport {
        method,
        secrecy_rate: secrecy_from_objective(objective),
        objective,
        outer_iterations: alpha_history.len() - 1,
        inner_iterations: inner_total,
        history,
        alpha_history,
        inner_histories,
        grad_norm: None,
        termination,
        wall_time: None,
        seed: None,
        trial: None,
        state: s,
    })
}

impl SolveReport {
    /// Outer-loop view of a Dinkelbach report.
    pub fn dinkelbach_trace(&self) -> DinkelbachTrace {
        DinkelbachTrace {
            alpha_history: self.alpha_history.clone(),
            inner_objective_histories: self.inner_histories.clone(),
            outer_iterations: self.outer_iterations,
            termination: self.termination,
        }
    }
}
