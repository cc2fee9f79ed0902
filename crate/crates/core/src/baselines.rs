//! Reference schemes and brute-force oracles for tiny problems.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::ChannelSet;
use crate::dinkelbach::{dinkelbach_w_only, DinkelbachParams};
use crate::error::{Error, Result};
use crate::objective::{evaluate, BeamformerState};
use crate::report::{Method, SolveReport};

/// Largest `M + N_i` accepted by [`grid_oracle`].
pub const GRID_MAX_DIM: usize = 5;
/// Largest number of grid points accepted by [`grid_oracle`].
pub const GRID_MAX_POINTS: u128 = 100_000_000;
/// Largest vector accepted by [`linear_subproblem_oracle`].
pub const LINEAR_ORACLE_MAX_LEN: usize = 8;

/// Uniform phases `θ` drawn from `seed`.
pub fn random_irs_phases(n_i: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_i)
        .map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
        .collect()
}

/// IRS phases fixed at random, `w` optimized by Dinkelbach-BSUM from `init_w`.
pub fn random_irs_solve(
    ch: &ChannelSet,
    seed: u64,
    init_w: &[Complex64],
    params: &DinkelbachParams,
    noise_power: f64,
) -> Result<SolveReport> {
    let init = BeamformerState::new(init_w.to_vec(), random_irs_phases(ch.n_i(), seed));
    dinkelbach_w_only(ch, &init, params, noise_power, Method::RandomIrs)
}

/// Direct links only, `w` optimized by Dinkelbach-BSUM from `init_w`.
pub fn no_irs_solve(ch: &ChannelSet, init_w: &[Complex64], params: &DinkelbachParams, noise_power: f64) -> Result<SolveReport> {
    let init = BeamformerState::new(init_w.to_vec(), Vec::new());
    dinkelbach_w_only(&ch.without_irs(), &init, params, noise_power, Method::NoIrs)
}

fn grid_phase(levels: usize, k: usize) -> f64 {
    std::f64::consts::TAU * k as f64 / levels as f64
}

/// Exhaustive search over `levels` uniformly spaced phases per entry.
///
/// The phase of `w_1` is pinned to zero, since `f` is invariant to a common
/// phase rotation of `w`. Ties keep the first point in lexicographic order.
pub fn grid_oracle(ch: &ChannelSet, levels: usize, amplitude: f64, noise_power: f64) -> Result<(BeamformerState, f64)> {
    let (m, n_i) = (ch.m(), ch.n_i());
    if levels == 0 {
        return Err(Error::invalid("grid needs at least one level"));
    }
    if m + n_i > GRID_MAX_DIM {
        return Err(Error::TooLarge(format!("M + N_i = {} exceeds {GRID_MAX_DIM}", m + n_i)));
    }
    let free = m - 1 + n_i;
    let points = (levels as u128).checked_pow(free as u32).unwrap_or(u128::MAX);
    if (levels as u128).checked_pow((m + n_i) as u32).is_none_or(|n| n > GRID_MAX_POINTS) {
        return Err(Error::TooLarge(format!("{levels}^{} grid points exceed {GRID_MAX_POINTS}", m + n_i)));
    }
    let points = points as u64;
    let decode = |mut idx: u64| {
        let mut phases = vec![0.0; m + n_i];
        for p in phases.iter_mut().skip(1).rev() {
            *p = grid_phase(levels, (idx % levels as u64) as usize);
            idx /= levels as u64;
        }
        BeamformerState::new(
            phases[..m].iter().map(|&a| Complex64::from_polar(amplitude, a)).collect(),
            phases[m..].iter().map(|&a| Complex64::from_polar(1.0, a)).collect(),
        )
    };
    let chunk = (points / 64).max(1);
    let chunks = points.div_ceil(chunk);
    let (best_idx, best_f) = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut best = (u64::MAX, f64::INFINITY);
            for idx in k * chunk..((k + 1) * chunk).min(points) {
                let f = evaluate(ch, &decode(idx), noise_power).objective();
                if f < best.1 {
                    best = (idx, f);
                }
            }
            best
        })
        .reduce(
            || (u64::MAX, f64::INFINITY),
            |a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
        );
    Ok((decode(best_idx), best_f))
}

/// Grid minimum of `Re(wᴴc)` over `|w_i| = P` with `levels` phases per entry.
///
/// The objective is separable, so the product-grid minimum is the sum of the
/// per-entry minima.
pub fn linear_subproblem_oracle(c: &[Complex64], amplitude: f64, levels: usize) -> Result<f64> {
    if c.len() > LINEAR_ORACLE_MAX_LEN {
        return Err(Error::TooLarge(format!("vector length {} exceeds {LINEAR_ORACLE_MAX_LEN}", c.len())));
    }
    if levels == 0 {
        return Err(Error::invalid("grid needs at least one level"));
    }
    Ok(c.iter()
        .map(|ci| {
            (0..levels)
                .map(|k| (Complex64::from_polar(amplitude, grid_phase(levels, k)).conj() * ci).re)
                .fold(f64::INFINITY, f64::min)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dinkelbach::dinkelbach_solve;
    use crate::numerics::ComplexMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rand_mat(r: usize, cc: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, cc, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn random_channels(m: usize, n: usize, n_i: usize, rng: &mut ChaCha8Rng) -> ChannelSet {
        ChannelSet::new(
            rand_mat(n, m, rng),
            rand_mat(n, m, rng),
            rand_mat(n_i, m, rng),
            rand_mat(n, n_i, rng),
            rand_mat(n, n_i, rng),
        )
        .unwrap()
    }

    #[test]
    fn grid_oracle_guards() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = random_channels(3, 2, 3, &mut rng);
        assert!(matches!(grid_oracle(&ch, 4, 1.0, 1.0), Err(Error::TooLarge(_))));
        let ch = random_channels(2, 2, 3, &mut rng);
        assert!(matches!(grid_oracle(&ch, 64, 1.0, 1.0), Err(Error::TooLarge(_))));
        assert!(linear_subproblem_oracle(&[c(1.0, 0.0); 9], 1.0, 4).is_err());
    }

    #[test]
    fn grid_oracle_bounds_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = random_channels(2, 2, 2, &mut rng);
        let (best, f) = grid_oracle(&ch, 16, 1.0, 1.0).unwrap();
        assert!((evaluate(&ch, &best, 1.0).objective() - f).abs() < 1e-15);
        assert_eq!(best.w[0], c(1.0, 0.0));
        let init = BeamformerState::random(2, 2, 1.0, &mut rng);
        let rep = dinkelbach_solve(&ch, &init, &DinkelbachParams::default(), 1.0).unwrap();
        // 16 levels leave a small gap, but the continuous optimum is never worse than a wide margin.
        assert!(rep.objective <= f * 1.05);
    }

    #[test]
    fn linear_oracle_matches_closed_form() {
        let v = [c(1.0, 2.0), c(-0.5, 0.1), c(0.0, -3.0)];
        let closed = -2.0 * v.iter().map(|z| z.norm()).sum::<f64>();
        let grid = linear_subproblem_oracle(&v, 2.0, 3600).unwrap();
        assert!(grid >= closed);
        assert!(grid - closed < 2.0 * 3.4 * (1.0 - (std::f64::consts::PI / 3600.0).cos()) * 3.0);
        assert_eq!(linear_subproblem_oracle(&[c(-1.0, 0.0)], 1.0, 1).unwrap(), -1.0);
    }

    #[test]
    fn baselines_respect_their_restrictions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = random_channels(4, 2, 6, &mut rng);
        let w0: Vec<_> = (0..4).map(|k| Complex64::from_polar(1.0, k as f64)).collect();
        let p = DinkelbachParams::default();
        let rnd = random_irs_solve(&ch, 11, &w0, &p, 1.0).unwrap();
        assert_eq!(rnd.state.theta, random_irs_phases(6, 11));
        assert_eq!(rnd.method, Method::RandomIrs);
        let none = no_irs_solve(&ch, &w0, &p, 1.0).unwrap();
        assert!(none.state.theta.is_empty());
        assert!(none.state.is_feasible(1.0, 1e-9));
    }
}
