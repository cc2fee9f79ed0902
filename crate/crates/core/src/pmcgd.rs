//! Product-manifold conjugate gradient descent (PMCGD) on the complex circles
//! `{|w_i| = P} × {|θ_j| = 1}`.
//!
//! Gradients use the Wirtinger convention `∂f/∂z̄`: a tangent step `δ` changes
//! `f` by `2·Re⟨grad, δ⟩` to first order.

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::numerics::{inner, norm_sqr, ComplexVector};
use crate::objective::{evaluate, grad_theta_from, grad_w_from, secrecy_from_objective, BeamformerState};
use crate::report::{IterationRecord, Method, SolveReport, Termination};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgdParams {
    /// Armijo sufficient-decrease constant.
    pub sufficient_decrease: f64,
    /// Backtracking factor.
    pub contraction: f64,
    /// Trial step is `initial_step / ‖d‖`.
    pub initial_step: f64,
    pub max_backtracks: usize,
    /// Absolute change in the objective that ends the run.
    pub xi: f64,
    pub max_iter: usize,
    /// Gradient norm treated as stationary.
    pub grad_tol: f64,
}

impl Default for CgdParams {
    fn default() -> Self {
        Self {
            sufficient_decrease: 1e-4,
            contraction: 0.5,
            initial_step: 1.0,
            max_backtracks: 50,
            xi: 1e-6,
            max_iter: 2000,
            grad_tol: 1e-12,
        }
    }
}

impl CgdParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return Err(Error::invalid("sufficient-decrease constant must lie in (0, 1)"));
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return Err(Error::invalid("contraction factor must lie in (0, 1)"));
        }
        if !(self.initial_step > 0.0 && self.xi > 0.0 && self.grad_tol >= 0.0) {
            return Err(Error::invalid("step, tolerance and gradient threshold must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("iteration cap must be positive"));
        }
        Ok(())
    }
}

/// A tangent (or ambient) vector on the product manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub w: ComplexVector,
    pub theta: ComplexVector,
}

impl TangentVector {
    pub fn zeros(m: usize, n_i: usize) -> Self {
        Self {
            w: vec![Complex64::new(0.0, 0.0); m],
            theta: vec![Complex64::new(0.0, 0.0); n_i],
        }
    }

    /// Real product metric `Re(a_wᴴb_w) + Re(a_θᴴb_θ)`.
    pub fn inner(&self, other: &Self) -> f64 {
        inner(&self.w, &other.w).re + inner(&self.theta, &other.theta).re
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.w) + norm_sqr(&self.theta)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            w: self.w.iter().map(|z| z * k).collect(),
            theta: self.theta.iter().map(|z| z * k).collect(),
        }
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let mix = |x: &[Complex64], y: &[Complex64]| x.iter().zip(y).map(|(x, y)| a * x + b * y).collect();
        Self {
            w: mix(&self.w, &other.w),
            theta: mix(&self.theta, &other.theta),
        }
    }

    /// Every entry satisfies `Re(ξ_i · z̄_i) ≈ 0` at `s`.
    pub fn is_tangent_at(&self, s: &BeamformerState, tol: f64) -> bool {
        let ok = |xi: &[Complex64], z: &[Complex64]| xi.iter().zip(z).all(|(x, z)| (x * z.conj()).re.abs() <= tol * x.norm().max(1.0) * z.norm().max(1.0));
        ok(&self.w, &s.w) && ok(&self.theta, &s.theta)
    }
}

fn project_block(g: &[Complex64], z: &[Complex64], radius_sqr: f64) -> ComplexVector {
    g.iter()
        .zip(z)
        .map(|(g, z)| g - z * ((g * z.conj()).re / radius_sqr))
        .collect()
}

/// Orthogonal projection onto the tangent space at `s`:
/// `ξ_w = g_w − Re(g_w ⊙ w̄)/P² ⊙ w`, `ξ_θ = g_θ − Re(g_θ ⊙ θ̄) ⊙ θ`.
pub fn project_tangent(s: &BeamformerState, amplitude: f64, ambient: &TangentVector) -> TangentVector {
    TangentVector {
        w: project_block(&ambient.w, &s.w, amplitude * amplitude),
        theta: project_block(&ambient.theta, &s.theta, 1.0),
    }
}

/// Riemannian gradient at `s` and the objective value there.
pub fn riemannian_grad(ch: &ChannelSet, s: &BeamformerState, amplitude: f64, noise_power: f64) -> (TangentVector, f64) {
    let ev = evaluate(ch, s, noise_power);
    let euclid = TangentVector {
        w: grad_w_from(ch, s, &ev, noise_power),
        theta: grad_theta_from(ch, &ev, noise_power),
    };
    (project_tangent(s, amplitude, &euclid), ev.objective())
}

/// Vector transport by re-projection onto the tangent space at `to`.
pub fn transport(to: &BeamformerState, amplitude: f64, v: &TangentVector) -> TangentVector {
    project_tangent(to, amplitude, v)
}

/// Polak-Ribière+ coefficient `max(0, Re⟨g_new, g_new − g_old⟩ / ‖g_old‖²)` with
/// `g_old` already transported; `old_norm_sqr` is `‖g_old‖²` at its own point.
pub fn polak_ribiere(g_new: &TangentVector, g_old_transported: &TangentVector, old_norm_sqr: f64) -> f64 {
    if old_norm_sqr <= 0.0 {
        return 0.0;
    }
    let num = g_new.norm_sqr() - g_new.inner(g_old_transported);
    (num / old_norm_sqr).max(0.0)
}

fn retract_block(z: &[Complex64], d: &[Complex64], step: f64, radius: f64) -> ComplexVector {
    z.iter()
        .zip(d)
        .map(|(z, d)| {
            let y = z + d * step;
            let n = y.norm();
            if n > 0.0 {
                y * (radius / n)
            } else {
                *z
            }
        })
        .collect()
}

/// Entrywise normalization of `s + step·d` back onto the circles.
pub fn retract(s: &BeamformerState, d: &TangentVector, step: f64, amplitude: f64) -> BeamformerState {
    BeamformerState {
        w: retract_block(&s.w, &d.w, step, amplitude),
        theta: retract_block(&s.theta, &d.theta, step, 1.0),
    }
}

/// Outcome of a backtracking line search. `step == 0` means no acceptable step.
#[derive(Debug, Clone)]
pub struct ArmijoStep {
    pub step: f64,
    pub state: BeamformerState,
    pub objective: f64,
    pub backtracks: usize,
}

/// Backtracking until `f(R(s, β d)) ≤ f0 + c·β·slope`, with `slope = 2Re⟨grad, d⟩`.
#[allow(clippy::too_many_arguments)]
pub fn armijo_step(
    ch: &ChannelSet,
    s: &BeamformerState,
    f0: f64,
    d: &TangentVector,
    slope: f64,
    params: &CgdParams,
    amplitude: f64,
    noise_power: f64,
) -> ArmijoStep {
    let fail = |backtracks| ArmijoStep {
        step: 0.0,
        state: s.clone(),
        objective: f0,
        backtracks,
    };
    let dn = d.norm();
    if slope.is_nan() || slope >= 0.0 || dn == 0.0 {
        return fail(0);
    }
    let mut beta = params.initial_step / dn;
    for k in 0..=params.max_backtracks {
        let cand = retract(s, d, beta, amplitude);
        let f = evaluate(ch, &cand, noise_power).objective();
        if f <= f0 + params.sufficient_decrease * beta * slope {
            return ArmijoStep {
                step: beta,
                state: cand,
                objective: f,
                backtracks: k,
            };
        }
        beta *= params.contraction;
    }
    fail(params.max_backtracks)
}

/// Conjugate gradient descent on the fractional objective from `init`.
pub fn pmcgd_solve(ch: &ChannelSet, init: &BeamformerState, params: &CgdParams, noise_power: f64) -> Result<SolveReport> {
    let amplitude = init.amplitude();
    let mut s = init.clone();
    let (mut g, mut f) = riemannian_grad(ch, &s, amplitude, noise_power);
    let mut history = vec![IterationRecord {
        objective: f,
        alpha: None,
        grad_norm: Some(g.norm()),
    }];
    let mut d = g.scaled(-1.0);
    let mut termination = Termination::MaxIter;
    let mut iterations = 0;
    while iterations < params.max_iter {
        let gnorm_sqr = g.norm_sqr();
        if gnorm_sqr.sqrt() <= params.grad_tol {
            termination = Termination::Stationary;
            break;
        }
        let mut slope = 2.0 * g.inner(&d);
        let mut steepest = false;
        if slope >= -1e-14 * gnorm_sqr.sqrt() * d.norm() {
            d = g.scaled(-1.0);
            slope = -2.0 * gnorm_sqr;
            steepest = true;
        }
        let mut ls = armijo_step(ch, &s, f, &d, slope, params, amplitude, noise_power);
        if ls.step == 0.0 && !steepest {
            d = g.scaled(-1.0);
            ls = armijo_step(ch, &s, f, &d, -2.0 * gnorm_sqr, params, amplitude, noise_power);
        }
        if ls.step == 0.0 {
            termination = Termination::LineSearchFailed;
            break;
        }
        iterations += 1;
        let next = ls.state;
        let (g_next, f_next) = riemannian_grad(ch, &next, amplitude, noise_power);
        let d_tr = transport(&next, amplitude, &d);
        let g_tr = transport(&next, amplitude, &g);
        let sigma = polak_ribiere(&g_next, &g_tr, gnorm_sqr);
        d = g_next.combine(-1.0, &d_tr, sigma);
        history.push(IterationRecord {
            objective: f_next,
            alpha: None,
            grad_norm: Some(g_next.norm()),
        });
        let done = (f - f_next).abs() < params.xi;
        s = next;
        f = f_next;
        g = g_next;
        if done {
            termination = Termination::Converged;
            break;
        }
    }
    Ok(SolveReport {
        method: Method::Pmcgd,
        secrecy_rate: secrecy_from_objective(f),
        objective: f,
        outer_iterations: iterations,
        inner_iterations: 0,
        history,
        alpha_history: Vec::new(),
        inner_histories: Vec::new(),
        grad_norm: Some(g.norm()),
        termination,
        wall_time: None,
        seed: None,
        trial: None,
        state: s,
    })
}
