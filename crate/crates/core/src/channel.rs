//! System configuration, seeded channel sampling and effective-channel composition.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

/// Link distances in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distances {
    pub alice_bob: f64,
    pub alice_irs: f64,
    pub alice_eve: f64,
    pub irs_bob: f64,
    pub irs_eve: f64,
}

impl Default for Distances {
    fn default() -> Self {
        Self {
            alice_bob: 80.0,
            alice_irs: 30.0,
            alice_eve: 80.0,
            irs_bob: 40.0,
            irs_eve: 40.0,
        }
    }
}

/// Array sizes, power, propagation model and solver settings for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Transmit antennas at Alice.
    pub m: usize,
    pub n_b: usize,
    pub n_e: usize,
    /// IRS elements. Zero disables the IRS.
    pub n_i: usize,
    /// Per-antenna amplitude `P`; every feasible `w` has `|w_i| = P`.
    pub amplitude: f64,
    pub ref_loss_db: f64,
    pub path_exponent: f64,
    pub distances: Distances,
    /// Linear noise power per receive antenna.
    pub noise_power: f64,
    pub solver: crate::SolverSettings,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            m: 64,
            n_b: 4,
            n_e: 4,
            n_i: 100,
            amplitude: 1.0,
            ref_loss_db: -30.0,
            path_exponent: 3.0,
            distances: Distances::default(),
            noise_power: 1.0,
            solver: crate::SolverSettings::default(),
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n_b == 0 || self.n_e == 0 {
            return Err(Error::invalid("antenna counts must be at least 1"));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::invalid("per-antenna amplitude must be positive"));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(Error::invalid("noise power must be positive"));
        }
        let d = &self.distances;
        for (name, v) in [
            ("alice_bob", d.alice_bob),
            ("alice_irs", d.alice_irs),
            ("alice_eve", d.alice_eve),
            ("irs_bob", d.irs_bob),
            ("irs_eve", d.irs_eve),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("distance {name} must be positive")));
            }
        }
        self.solver.validate()
    }
}

/// Large-scale amplitude gain of a link: `sqrt(10^(ref/10) · d^(−exponent))`.
pub fn path_loss_gain(distance_m: f64, cfg: &SystemConfig) -> f64 {
    (10f64.powf(cfg.ref_loss_db / 10.0) * distance_m.powf(-cfg.path_exponent)).sqrt()
}

/// The five link matrices, linear amplitude gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// `N_b × M`
    pub h_ab: ComplexMatrix,
    /// `N_e × M`
    pub h_ae: ComplexMatrix,
    /// `N_i × M`
    pub h_ai: ComplexMatrix,
    /// `N_b × N_i`
    pub h_ib: ComplexMatrix,
    /// `N_e × N_i`
    pub h_ie: ComplexMatrix,
}

impl ChannelSet {
    pub fn new(
        h_ab: ComplexMatrix,
        h_ae: ComplexMatrix,
        h_ai: ComplexMatrix,
        h_ib: ComplexMatrix,
        h_ie: ComplexMatrix,
    ) -> Result<Self> {
        let m = h_ab.cols();
        let (n_b, n_e, n_i) = (h_ab.rows(), h_ae.rows(), h_ai.rows());
        let ok = h_ae.cols() == m
            && h_ai.cols() == m
            && h_ib.rows() == n_b
            && h_ib.cols() == n_i
            && h_ie.rows() == n_e
            && h_ie.cols() == n_i;
        if !ok {
            return Err(Error::invalid("inconsistent channel dimensions"));
        }
        Ok(Self {
            h_ab,
            h_ae,
            h_ai,
            h_ib,
            h_ie,
        })
    }

    pub fn m(&self) -> usize {
        self.h_ab.cols()
    }

    pub fn n_b(&self) -> usize {
        self.h_ab.rows()
    }

    pub fn n_e(&self) -> usize {
        self.h_ae.rows()
    }

    pub fn n_i(&self) -> usize {
        self.h_ai.rows()
    }

    /// Same direct links with the IRS removed (`N_i = 0`).
    pub fn without_irs(&self) -> Self {
        let m = self.m();
        Self {
            h_ab: self.h_ab.clone(),
            h_ae: self.h_ae.clone(),
            h_ai: ComplexMatrix::zeros(0, m),
            h_ib: ComplexMatrix::zeros(self.n_b(), 0),
            h_ie: ComplexMatrix::zeros(self.n_e(), 0),
        }
    }
}

/// Derives an independent 64-bit stream key from a seed and a sequence of indices.
pub fn derive_seed(seed: u64, indices: &[u64]) -> u64 {
    // splitmix64 finalizer chained over the indices
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    indices.iter().fold(mix(seed), |acc, &i| mix(acc ^ mix(i)))
}

fn sample_cn(rows: usize, cols: usize, gain: f64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let s = gain * std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(s * re, s * im)
    })
}

/// Rayleigh-fading channels with i.i.d. `CN(0, 1)` entries scaled by each link's
/// path-loss amplitude. A pure function of `(cfg, seed, trial)`.
pub fn sample_channels(cfg: &SystemConfig, seed: u64, trial: u64) -> ChannelSet {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[trial]));
    let d = &cfg.distances;
    let h_ab = sample_cn(cfg.n_b, cfg.m, path_loss_gain(d.alice_bob, cfg), &mut rng);
    let h_ae = sample_cn(cfg.n_e, cfg.m, path_loss_gain(d.alice_eve, cfg), &mut rng);
    let h_ai = sample_cn(cfg.n_i, cfg.m, path_loss_gain(d.alice_irs, cfg), &mut rng);
    let h_ib = sample_cn(cfg.n_b, cfg.n_i, path_loss_gain(d.irs_bob, cfg), &mut rng);
    let h_ie = sample_cn(cfg.n_e, cfg.n_i, path_loss_gain(d.irs_eve, cfg), &mut rng);
    ChannelSet {
        h_ab,
        h_ae,
        h_ai,
        h_ib,
        h_ie,
    }
}

/// `H_direct + H_ir · diag(θ) · H_ai`.
pub fn effective_channel(
    h_direct: &ComplexMatrix,
    h_ir: &ComplexMatrix,
    theta: &[Complex64],
    h_ai: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    if theta.is_empty() && h_ir.cols() == 0 && h_ai.rows() == 0 {
        return Ok(h_direct.clone());
    }
    let cascade = h_ir.scale_columns(theta)?.matmul(h_ai)?;
    h_direct.add(&cascade)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn path_loss_reference_values() {
        let cfg = SystemConfig::default();
        assert!((path_loss_gain(1.0, &cfg).powi(2) - 1e-3).abs() < 1e-18);
        assert!((path_loss_gain(80.0, &cfg).powi(2) - 1e-3 * 80f64.powi(-3)).abs() < 1e-22);
        assert!((path_loss_gain(80.0, &cfg).powi(2) - 1.953125e-9).abs() < 1e-20);
        let unity = SystemConfig {
            ref_loss_db: 0.0,
            ..SystemConfig::default()
        };
        assert_eq!(path_loss_gain(1.0, &unity), 1.0);
    }

    #[test]
    fn sampling_is_deterministic_and_shaped() {
        let cfg = SystemConfig {
            m: 5,
            n_b: 2,
            n_e: 3,
            n_i: 4,
            ..SystemConfig::default()
        };
        let a = sample_channels(&cfg, 42, 7);
        let b = sample_channels(&cfg, 42, 7);
        assert_eq!(a, b);
        assert_ne!(a, sample_channels(&cfg, 42, 8));
        assert_eq!((a.h_ab.rows(), a.h_ab.cols()), (2, 5));
        assert_eq!((a.h_ae.rows(), a.h_ae.cols()), (3, 5));
        assert_eq!((a.h_ai.rows(), a.h_ai.cols()), (4, 5));
        assert_eq!((a.h_ib.rows(), a.h_ib.cols()), (2, 4));
        assert_eq!((a.h_ie.rows(), a.h_ie.cols()), (3, 4));
        assert!(ChannelSet::new(a.h_ab, a.h_ae, a.h_ai, a.h_ib, a.h_ie).is_ok());
    }

    #[test]
    fn effective_channel_cases() {
        let h_direct = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64));
        let none = ComplexMatrix::zeros(2, 0);
        let no_ai = ComplexMatrix::zeros(0, 3);
        assert_eq!(effective_channel(&h_direct, &none, &[], &no_ai).unwrap(), h_direct);

        let h_ir = ComplexMatrix::from_fn(2, 4, |i, j| c(1.0 + i as f64, -(j as f64)));
        let h_ai = ComplexMatrix::from_fn(4, 3, |i, j| c(j as f64, 0.5 * i as f64));
        let ones = vec![c(1.0, 0.0); 4];
        let got = effective_channel(&ComplexMatrix::zeros(2, 3), &h_ir, &ones, &h_ai).unwrap();
        assert_eq!(got, h_ir.matmul(&h_ai).unwrap());

        let theta: Vec<_> = (0..4).map(|k| Complex64::from_polar(1.0, 0.3 * k as f64)).collect();
        let got = effective_channel(&h_direct, &h_ir, &theta, &h_ai).unwrap();
        for r in 0..2 {
            for col in 0..3 {
                let mut z = h_direct.get(r, col);
                for (k, t) in theta.iter().enumerate() {
                    z += h_ir.get(r, k) * t * h_ai.get(k, col);
                }
                assert!((got.get(r, col) - z).norm() < 1e-12);
            }
        }
        assert!(effective_channel(&h_direct, &h_ir, &theta[..3], &h_ai).is_err());
    }

    #[test]
    fn seed_derivation_separates_streams() {
        assert_ne!(derive_seed(1, &[0]), derive_seed(1, &[1]));
        assert_ne!(derive_seed(1, &[0, 1]), derive_seed(1, &[1, 0]));
        assert_eq!(derive_seed(9, &[3, 4]), derive_seed(9, &[3, 4]));
    }

    #[test]
    fn validation() {
        assert!(SystemConfig::default().validate().is_ok());
        let bad = SystemConfig {
            noise_power: 0.0,
            ..SystemConfig::default()
        };
        assert!(bad.validate().is_err());
        let mut bad = SystemConfig::default();
        bad.distances.irs_eve = -1.0;
        assert!(bad.validate().is_err());
    }
}
