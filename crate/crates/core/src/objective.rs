//! Secrecy rate, the fractional objective and its derivatives.
//!
//! Every `‖·‖²` received-signal term is divided by the noise power before the
//! `1 +`, so the objective is
//!
//! ```text
//! f(w, θ) = (1 + ‖G_e w‖²/σ²) / (1 + ‖G_b w‖²/σ²),   G_x = H_ax + H_ix diag(θ) H_ai
//! ```
//!
//! Complex gradients follow the conjugate (Wirtinger) convention: `grad = ∂f/∂z̄`,
//! so a perturbation `δ` changes `f` by `2·Re⟨grad, δ⟩` to first order.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{effective_channel, ChannelSet};
use crate::error::Result;
use crate::numerics::{hadamard, inner, norm_sqr, ComplexMatrix, ComplexVector, GramDifference};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A point `(w, θ)` of the constant-modulus product manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerState {
    pub w: ComplexVector,
    pub theta: ComplexVector,
}

impl BeamformerState {
    pub fn new(w: ComplexVector, theta: ComplexVector) -> Self {
        Self { w, theta }
    }

    /// Independent uniform phases on every entry.
    pub fn random(m: usize, n_i: usize, amplitude: f64, rng: &mut impl Rng) -> Self {
        let mut phase = |r: f64| Complex64::from_polar(r, rng.random::<f64>() * std::f64::consts::TAU);
        let w = (0..m).map(|_| phase(amplitude)).collect();
        let theta = (0..n_i).map(|_| phase(1.0)).collect();
        Self { w, theta }
    }

    /// Per-antenna amplitude `P`, read off the mean modulus of `w`.
    pub fn amplitude(&self) -> f64 {
        if self.w.is_empty() {
            return 0.0;
        }
        self.w.iter().map(|z| z.norm()).sum::<f64>() / self.w.len() as f64
    }

    /// `|w_i| = P` and `|θ_j| = 1` to relative tolerance `rtol`.
    pub fn is_feasible(&self, amplitude: f64, rtol: f64) -> bool {
        self.w.iter().all(|z| (z.norm() - amplitude).abs() <= rtol * amplitude)
            && self.theta.iter().all(|z| (z.norm() - 1.0).abs() <= rtol)
    }
}

/// Intermediate products shared by the objective and both gradients.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// `H_ai w`
    pub cascade: ComplexVector,
    /// `G_b w`
    pub bob: ComplexVector,
    /// `G_e w`
    pub eve: ComplexVector,
    /// `1 + ‖G_e w‖²/σ²`
    pub numerator: f64,
    /// `1 + ‖G_b w‖²/σ²`
    pub denominator: f64,
}

impl Evaluation {
    pub fn objective(&self) -> f64 {
        self.numerator / self.denominator
    }
}

/// Received signal `H_direct w + H_ir (θ ⊙ cascade)`.
fn received(h_direct: &ComplexMatrix, h_ir: &ComplexMatrix, w: &[Complex64], theta: &[Complex64], cascade: &[Complex64]) -> ComplexVector {
    let mut out = vec![ZERO; h_direct.rows()];
    h_direct.matvec_into(w, &mut out);
    if !theta.is_empty() {
        let reflected: ComplexVector = theta.iter().zip(cascade).map(|(t, c)| t * c).collect();
        for (o, row) in out.iter_mut().zip(0..h_ir.rows()) {
            *o += h_ir.row(row).iter().zip(&reflected).map(|(a, b)| a * b).sum::<Complex64>();
        }
    }
    out
}

pub fn evaluate(ch: &ChannelSet, s: &BeamformerState, noise_power: f64) -> Evaluation {
    let mut cascade = vec![ZERO; ch.n_i()];
    ch.h_ai.matvec_into(&s.w, &mut cascade);
    let bob = received(&ch.h_ab, &ch.h_ib, &s.w, &s.theta, &cascade);
    let eve = received(&ch.h_ae, &ch.h_ie, &s.w, &s.theta, &cascade);
    let numerator = 1.0 + norm_sqr(&eve) / noise_power;
    let denominator = 1.0 + norm_sqr(&bob) / noise_power;
    Evaluation {
        cascade,
        bob,
        eve,
        numerator,
        denominator,
    }
}

/// Achievable rates `(C_b, C_e)` in bits per channel use.
pub fn rates(ch: &ChannelSet, s: &BeamformerState, noise_power: f64) -> (f64, f64) {
    let ev = evaluate(ch, s, noise_power);
    (ev.denominator.log2(), ev.numerator.log2())
}

/// `max(C_b − C_e, 0)` in bits.
pub fn secrecy_rate(ch: &ChannelSet, s: &BeamformerState, noise_power: f64) -> f64 {
    let (cb, ce) = rates(ch, s, noise_power);
    (cb - ce).max(0.0)
}

/// Secrecy rate implied by a fractional objective value.
pub fn secrecy_from_objective(f: f64) -> f64 {
    (-f.log2()).max(0.0)
}

/// `(1 + ‖Eve term‖²) / (1 + ‖Bob term‖²)`; the quantity every solver minimizes.
pub fn fractional_objective(ch: &ChannelSet, s: &BeamformerState, noise_power: f64) -> f64 {
    evaluate(ch, s, noise_power).objective()
}

/// Dinkelbach difference objective `(1 + ‖Eve‖²) − α(1 + ‖Bob‖²)`.
pub fn dinkelbach_objective(ch: &ChannelSet, s: &BeamformerState, alpha: f64, noise_power: f64) -> f64 {
    let ev = evaluate(ch, s, noise_power);
    ev.numerator - alpha * ev.denominator
}

/// Noise-normalized effective channels `(G_b, G_e) / σ`.
pub fn effective_channels(ch: &ChannelSet, theta: &[Complex64], noise_power: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let s = Complex64::new(noise_power.sqrt().recip(), 0.0);
    let gb = effective_channel(&ch.h_ab, &ch.h_ib, theta, &ch.h_ai)?.scale(s);
    let ge = effective_channel(&ch.h_ae, &ch.h_ie, theta, &ch.h_ai)?.scale(s);
    Ok((gb, ge))
}

/// The `w`-block quadratic `A = G_eᴴG_e − α·G_bᴴG_b` in factored form.
pub fn a_operator(ch: &ChannelSet, theta: &[Complex64], alpha: f64, noise_power: f64) -> Result<GramDifference> {
    let (gb, ge) = effective_channels(ch, theta, noise_power)?;
    GramDifference::new(ge, gb, alpha)
}

/// Dense `A = G_eᴴG_e − α·G_bᴴG_b` (Hermitian, `M × M`, generally indefinite).
pub fn build_a(ch: &ChannelSet, theta: &[Complex64], alpha: f64, noise_power: f64) -> Result<ComplexMatrix> {
    Ok(a_operator(ch, theta, alpha, noise_power)?.to_dense())
}

/// Quadratic and linear pieces of the `θ`-block problem for a fixed `w`.
///
/// For unit-modulus `θ`,
/// `dinkelbach_objective = θᴴ P θ + 2·Re(θᴴ(d̄ − α f̄)) + constant`
/// with `P = (B − αE) ⊙ Cᵀ`.
#[derive(Debug, Clone)]
pub struct ThetaQuadratics {
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
    pub e: ComplexMatrix,
    pub d: ComplexVector,
    pub f: ComplexVector,
    pub p_mat: ComplexMatrix,
    pub alpha: f64,
    pub constant: f64,
}

impl ThetaQuadratics {
    /// `d̄ − α f̄`.
    pub fn linear_term(&self) -> ComplexVector {
        self.d.iter().zip(&self.f).map(|(d, f)| d.conj() - self.alpha * f.conj()).collect()
    }

    /// Value of the surrogate at `θ`, constant included.
    pub fn value(&self, theta: &[Complex64]) -> f64 {
        let quad = crate::numerics::quadratic_form(theta, &self.p_mat)
            .expect("theta length matches the quadratics")
            .re;
        quad + 2.0 * inner(theta, &self.linear_term()).re + self.constant
    }
}

/// Factored pieces for the `θ`-block: `P` as a [`GramDifference`] and `d̄ − α f̄`.
#[derive(Debug, Clone)]
pub struct ThetaSurrogate {
    pub p_op: GramDifference,
    pub linear: ComplexVector,
}

pub fn theta_surrogate(ch: &ChannelSet, w: &[Complex64], alpha: f64, noise_power: f64) -> Result<ThetaSurrogate> {
    let inv_sigma = noise_power.sqrt().recip();
    let cascade = ch.h_ai.matvec(w)?;
    let scaled: ComplexVector = cascade.iter().map(|c| c * inv_sigma).collect();
    // diag(c̄) HᴴH diag(c) = (H diag(c))ᴴ (H diag(c))
    let pos = ch.h_ie.scale_columns(&scaled)?;
    let neg = ch.h_ib.scale_columns(&scaled)?;
    let (d, f) = theta_linear_vectors(ch, w, &cascade, noise_power)?;
    let linear = d.iter().zip(&f).map(|(d, f)| d.conj() - alpha * f.conj()).collect();
    Ok(ThetaSurrogate {
        p_op: GramDifference::new(pos, neg, alpha)?,
        linear,
    })
}

/// `d = diag(H_ai w wᴴ H_aeᴴ H_ie)/σ²` and `f = diag(H_ai w wᴴ H_abᴴ H_ib)/σ²`.
fn theta_linear_vectors(ch: &ChannelSet, w: &[Complex64], cascade: &[Complex64], noise_power: f64) -> Result<(ComplexVector, ComplexVector)> {
    let a_e = ch.h_ae.matvec(w)?;
    let a_b = ch.h_ab.matvec(w)?;
    let back_e = ch.h_ie.adjoint_matvec(&a_e)?;
    let back_b = ch.h_ib.adjoint_matvec(&a_b)?;
    let d = cascade.iter().zip(&back_e).map(|(c, u)| c * u.conj() / noise_power).collect();
    let f = cascade.iter().zip(&back_b).map(|(c, u)| c * u.conj() / noise_power).collect();
    Ok((d, f))
}

pub fn build_theta_quadratics(ch: &ChannelSet, w: &[Complex64], alpha: f64, noise_power: f64) -> Result<ThetaQuadratics> {
    let inv = Complex64::new(noise_power.recip(), 0.0);
    let cascade = ch.h_ai.matvec(w)?;
    let b = ch.h_ie.gram().scale(inv);
    let e = ch.h_ib.gram().scale(inv);
    let c = ComplexMatrix::from_fn(cascade.len(), cascade.len(), |i, j| cascade[i] * cascade[j].conj());
    let (d, f) = theta_linear_vectors(ch, w, &cascade, noise_power)?;
    let p_mat = hadamard(&b.sub(&e.scale(Complex64::new(alpha, 0.0)))?, &c.transpose())?;
    let direct_e = norm_sqr(&ch.h_ae.matvec(w)?) / noise_power;
    let direct_b = norm_sqr(&ch.h_ab.matvec(w)?) / noise_power;
    Ok(ThetaQuadratics {
        b,
        c,
        e,
        d,
        f,
        p_mat,
        alpha,
        constant: (1.0 + direct_e) - alpha * (1.0 + direct_b),
    })
}

/// Quotient-rule gradient `(∂u·v − u·∂v) / v²`.
fn quotient(du: &[Complex64], dv: &[Complex64], u: f64, v: f64) -> ComplexVector {
    let v2 = v * v;
    du.iter().zip(dv).map(|(a, b)| (a * v - b * u) / v2).collect()
}

/// `∂f/∂w̄` from a cached evaluation.
pub fn grad_w_from(ch: &ChannelSet, s: &BeamformerState, ev: &Evaluation, noise_power: f64) -> ComplexVector {
    // G_xᴴ y = H_axᴴ y + H_aiᴴ (θ̄ ⊙ H_ixᴴ y)
    let back = |h_direct: &ComplexMatrix, h_ir: &ComplexMatrix, y: &[Complex64]| {
        let mut out = vec![ZERO; ch.m()];
        h_direct.adjoint_matvec_into(y, &mut out);
        if !s.theta.is_empty() {
            let mut z = vec![ZERO; ch.n_i()];
            h_ir.adjoint_matvec_into(y, &mut z);
            z.iter_mut().zip(&s.theta).for_each(|(z, t)| *z *= t.conj());
            let mut extra = vec![ZERO; ch.m()];
            ch.h_ai.adjoint_matvec_into(&z, &mut extra);
            out.iter_mut().zip(&extra).for_each(|(o, x)| *o += x);
        }
        out.iter_mut().for_each(|o| *o /= noise_power);
        out
    };
    let du = back(&ch.h_ae, &ch.h_ie, &ev.eve);
    let dv = back(&ch.h_ab, &ch.h_ib, &ev.bob);
    quotient(&du, &dv, ev.numerator, ev.denominator)
}

/// `∂f/∂θ̄` from a cached evaluation.
pub fn grad_theta_from(ch: &ChannelSet, ev: &Evaluation, noise_power: f64) -> ComplexVector {
    let n_i = ch.n_i();
    if n_i == 0 {
        return Vec::new();
    }
    // ∂‖G_x w‖²/∂θ̄ = c̄ ⊙ H_ixᴴ (G_x w)
    let back = |h_ir: &ComplexMatrix, y: &[Complex64]| {
        let mut z = vec![ZERO; n_i];
        h_ir.adjoint_matvec_into(y, &mut z);
        z.iter_mut()
            .zip(&ev.cascade)
            .for_each(|(z, c)| *z *= c.conj() / noise_power);
        z
    };
    let du = back(&ch.h_ie, &ev.eve);
    let dv = back(&ch.h_ib, &ev.bob);
    quotient(&du, &dv, ev.numerator, ev.denominator)
}

/// Euclidean gradient of [`fractional_objective`] with respect to `w`.
pub fn euclid_grad_w(ch: &ChannelSet, s: &BeamformerState, noise_power: f64) -> ComplexVector {
    let ev = evaluate(ch, s, noise_power);
    grad_w_from(ch, s, &ev, noise_power)
}

/// Euclidean gradient of [`fractional_objective`] with respect to `θ`.
pub fn euclid_grad_theta(ch: &ChannelSet, s: &BeamformerState, noise_power: f64) -> ComplexVector {
    let ev = evaluate(ch, s, noise_power);
    grad_theta_from(ch, &ev, noise_power)
}

/// Explicit quadratic-form matrices for both gradient blocks.
///
/// `wᴴG1w / wᴴG2w` and `(θᴴJ1θ + 2Re(θᴴ j̄2) + o) / (θᴴJ3θ + 2Re(θᴴ j̄4) + p)` both
/// equal the fractional objective on the feasible set; `j2`, `j4` are the
/// diagonals of `J2`, `J4`. The `1` in each numerator and denominator is
/// carried by `I/(M·P²)` and `I/N_i`. This is the dense route, kept for
/// cross-checking the matrix-free gradients.
#[derive(Debug, Clone)]
pub struct GradPieces {
    pub g1: ComplexMatrix,
    pub g2: ComplexMatrix,
    pub j1: ComplexMatrix,
    pub j2: ComplexMatrix,
    pub j3: ComplexMatrix,
    pub j4: ComplexMatrix,
    pub o: f64,
    pub p: f64,
}

impl GradPieces {
    pub fn build(ch: &ChannelSet, s: &BeamformerState, amplitude: f64, noise_power: f64) -> Result<Self> {
        let m = ch.m();
        let n_i = ch.n_i();
        let inv = Complex64::new(noise_power.recip(), 0.0);
        let (gb, ge) = effective_channels(ch, &s.theta, noise_power)?;
        let radial = ComplexMatrix::identity(m).scale(Complex64::new(1.0 / (m as f64 * amplitude * amplitude), 0.0));
        let g1 = radial.add(&ge.gram())?;
        let g2 = radial.add(&gb.gram())?;

        let cascade = ch.h_ai.matvec(&s.w)?;
        let c = ComplexMatrix::from_fn(n_i, n_i, |i, j| cascade[i] * cascade[j].conj());
        let a_e = ch.h_ae.matvec(&s.w)?;
        let a_b = ch.h_ab.matvec(&s.w)?;
        let unit = if n_i == 0 {
            ComplexMatrix::zeros(0, 0)
        } else {
            ComplexMatrix::identity(n_i).scale(Complex64::new(1.0 / n_i as f64, 0.0))
        };
        let ct = c.transpose();
        let j1 = unit.add(&hadamard(&ch.h_ie.gram().scale(inv), &ct)?)?;
        let j3 = unit.add(&hadamard(&ch.h_ib.gram().scale(inv), &ct)?)?;
        let outer = |a: &[Complex64], h: &ComplexMatrix| -> Result<ComplexMatrix> {
            // H_ai w wᴴ H_axᴴ H_ix = c (H_ixᴴ a)ᴴ
            let back = h.adjoint_matvec(a)?;
            Ok(ComplexMatrix::from_fn(n_i, n_i, |i, j| cascade[i] * back[j].conj()).scale(inv))
        };
        let j2 = outer(&a_e, &ch.h_ie)?;
        let j4 = outer(&a_b, &ch.h_ib)?;
        Ok(Self {
            g1,
            g2,
            j1,
            j2,
            j3,
            j4,
            o: norm_sqr(&a_e) / noise_power,
            p: norm_sqr(&a_b) / noise_power,
        })
    }

    pub fn grad_w(&self, w: &[Complex64]) -> ComplexVector {
        let g1w = self.g1.matvec(w).expect("w matches G1");
        let g2w = self.g2.matvec(w).expect("w matches G2");
        let u = inner(w, &g1w).re;
        let v = inner(w, &g2w).re;
        quotient(&g1w, &g2w, u, v)
    }

    pub fn grad_theta(&self, theta: &[Complex64]) -> ComplexVector {
        if theta.is_empty() {
            return Vec::new();
        }
        let lin = |j: &ComplexMatrix| -> ComplexVector { j.diag().iter().map(|z| z.conj()).collect() };
        let (l2, l4) = (lin(&self.j2), lin(&self.j4));
        let j1t = self.j1.matvec(theta).expect("theta matches J1");
        let j3t = self.j3.matvec(theta).expect("theta matches J3");
        let u = inner(theta, &j1t).re + 2.0 * inner(theta, &l2).re + self.o;
        let v = inner(theta, &j3t).re + 2.0 * inner(theta, &l4).re + self.p;
        let du: ComplexVector = j1t.iter().zip(&l2).map(|(a, b)| a + b).collect();
        let dv: ComplexVector = j3t.iter().zip(&l4).map(|(a, b)| a + b).collect();
        quotient(&du, &dv, u, v)
    }
}
