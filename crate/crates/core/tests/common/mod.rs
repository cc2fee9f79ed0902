#![allow(dead_code)]

use irs_secrecy::{sample_channels, BeamformerState, ChannelSet, ComplexMatrix, SystemConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_c(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
}

pub fn rand_mat(r: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(r, cols, |_, _| rand_c(rng))
}

pub fn rand_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let a = rand_mat(n, n, rng);
    a.add(&a.adjoint()).unwrap()
}

pub fn rand_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n).map(|_| rand_c(rng)).collect()
}

pub fn unit_phases(n: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::from_polar(radius, rng.random::<f64>() * std::f64::consts::TAU))
        .collect()
}

/// Channels with O(1) entries, no path loss.
pub fn unit_channels(m: usize, n: usize, n_i: usize, rng: &mut ChaCha8Rng) -> ChannelSet {
    ChannelSet::new(
        rand_mat(n, m, rng),
        rand_mat(n, m, rng),
        rand_mat(n_i, m, rng),
        rand_mat(n, n_i, rng),
        rand_mat(n, n_i, rng),
    )
    .unwrap()
}

/// Noise power used for studies on the reference geometry. With unit noise the
/// path losses leave every rate near 1e-6 bits; -80 dB puts the optimized
/// rates near 9 bits at M = 64.
pub const STUDY_NOISE: f64 = 1e-8;

pub fn study_config(m: usize, n: usize, n_i: usize) -> SystemConfig {
    SystemConfig {
        m,
        n_b: n,
        n_e: n,
        n_i,
        noise_power: STUDY_NOISE,
        ..SystemConfig::default()
    }
}

/// Reference-geometry channels plus a random feasible start.
pub fn study_instance(cfg: &SystemConfig, seed: u64, trial: u64) -> (ChannelSet, BeamformerState) {
    let ch = sample_channels(cfg, seed, trial);
    let init = irs_secrecy::bench::trial_init(cfg, seed, trial);
    (ch, init)
}
