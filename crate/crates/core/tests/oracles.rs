mod common;

use std::f64::consts::PI;

use common::*;
use irs_secrecy::baselines::{grid_oracle, linear_subproblem_oracle, no_irs_solve, random_irs_solve};
use irs_secrecy::bench::{export_convergence, run_experiment, write_results, SWEEP_FILE, TRIALS_FILE};
use irs_secrecy::config::{ExperimentSpec, SweepVariable};
use irs_secrecy::dinkelbach::{bsum_solve, bsum_theta_step, bsum_w_step, dinkelbach_solve, update_alpha, DinkelbachParams};
use irs_secrecy::numerics::{hermitian_max_eigenvalue, inner, ComplexMatrix, PowerIteration};
use irs_secrecy::objective::{euclid_grad_theta, euclid_grad_w, fractional_objective};
use irs_secrecy::pmcgd::{pmcgd_solve, CgdParams};
use irs_secrecy::{BeamformerState, ChannelSet, Method};
use num_complex::Complex64;

const LEVELS: usize = 720;

fn grid_bound(c: &[Complex64], amp: f64) -> f64 {
    (1.0 - (PI / LEVELS as f64).cos()) * amp * c.iter().map(|z| z.norm()).sum::<f64>()
}

/// `(A − λI)x` for a dense Hermitian `A`.
fn shifted_apply(a: &ComplexMatrix, x: &[Complex64]) -> Vec<Complex64> {
    let lambda = hermitian_max_eigenvalue(a).unwrap();
    a.matvec(x).unwrap().iter().zip(x).map(|(ax, xi)| ax - lambda * xi).collect()
}

#[test]
fn w_step_ties_the_phase_grid() {
    let mut r = rng(100);
    let amp = 1.7;
    for _ in 0..100 {
        let a = rand_hermitian(2, &mut r);
        let w_k = unit_phases(2, amp, &mut r);
        let lin = shifted_apply(&a, &w_k);
        let w = bsum_w_step(&a, &w_k, amp, &PowerIteration::default()).unwrap();
        let closed = inner(&w, &lin).re;
        let grid = linear_subproblem_oracle(&lin, amp, LEVELS).unwrap();
        let tol = 1e-9 * closed.abs().max(1.0);
        assert!(closed <= grid + tol, "closed {closed} grid {grid}");
        assert!(grid - closed <= grid_bound(&lin, amp) + tol);
    }
}

#[test]
fn theta_step_ties_the_phase_grid() {
    let mut r = rng(101);
    for _ in 0..100 {
        let p = rand_hermitian(2, &mut r);
        let linear = rand_vec(2, &mut r);
        let theta_k = unit_phases(2, 1.0, &mut r);
        let lin: Vec<Complex64> = shifted_apply(&p, &theta_k).iter().zip(&linear).map(|(a, b)| a + b).collect();
        let theta = bsum_theta_step(&p, &linear, &theta_k, &PowerIteration::default()).unwrap();
        let closed = inner(&theta, &lin).re;
        let grid = linear_subproblem_oracle(&lin, 1.0, LEVELS).unwrap();
        let tol = 1e-9 * closed.abs().max(1.0);
        assert!(closed <= grid + tol, "closed {closed} grid {grid}");
        assert!(grid - closed <= grid_bound(&lin, 1.0) + tol);
    }
}

#[test]
fn linear_oracle_reference_cases() {
    let pos = [c(1.0, 0.0), c(2.5, 0.0), c(0.5, 0.0)];
    assert!((linear_subproblem_oracle(&pos, 2.0, 360).unwrap() + 2.0 * 4.0).abs() < 1e-12);
    assert_eq!(linear_subproblem_oracle(&[c(0.0, 0.0); 3], 1.0, 360).unwrap(), 0.0);
}

fn unit_instance(seed: u64) -> (ChannelSet, BeamformerState) {
    let mut r = rng(seed);
    let ch = unit_channels(8, 2, 8, &mut r);
    let init = BeamformerState::random(8, 8, 1.0, &mut r);
    (ch, init)
}

#[test]
fn bsum_descends_and_ends_below_zero() {
    for seed in 0..20 {
        let (ch, init) = unit_instance(seed);
        let alpha = update_alpha(&ch, &init, 1.0);
        let out = bsum_solve(&ch, alpha, &init, &DinkelbachParams::default(), 1.0).unwrap();
        for pair in out.history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12 * pair[0].abs().max(1.0), "{pair:?}");
        }
        assert!(out.history[0].abs() < 1e-12);
        assert!(*out.history.last().unwrap() <= 1e-12);
    }
}

#[test]
fn dinkelbach_alpha_is_non_increasing() {
    for seed in 0..20 {
        let (ch, init) = unit_instance(seed);
        let rep = dinkelbach_solve(&ch, &init, &DinkelbachParams::default(), 1.0).unwrap();
        for pair in rep.alpha_history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "{pair:?}");
        }
        assert!(rep.state.is_feasible(1.0, 1e-12));
    }
}

#[test]
fn pmcgd_history_is_monotone() {
    for seed in 0..20 {
        let (ch, init) = unit_instance(seed);
        let rep = pmcgd_solve(&ch, &init, &CgdParams::default(), 1.0).unwrap();
        for pair in rep.objective_history().windows(2) {
            assert!(pair[1] <= pair[0], "{pair:?}");
        }
        assert!(rep.state.is_feasible(1.0, 1e-12));
    }
}

#[test]
fn pmcgd_is_stationary_at_exit() {
    let grads: Vec<f64> = (0..20)
        .map(|seed| {
            let (ch, init) = unit_instance(seed);
            pmcgd_solve(&ch, &init, &CgdParams::default(), 1.0).unwrap().grad_norm.unwrap()
        })
        .collect();
    let below = grads.iter().filter(|&&g| g < 1e-4).count();
    println!("exit gradient below 1e-4 on {below}/20, largest {:.3e}", grads.iter().cloned().fold(0.0, f64::max));
    assert_eq!(below, grads.len());
}

#[test]
fn pmcgd_matches_or_beats_dinkelbach_head_to_head() {
    let trials = 100;
    let wins = (0..trials)
        .filter(|&seed| {
            let (ch, init) = unit_instance(1000 + seed);
            let p = pmcgd_solve(&ch, &init, &CgdParams::default(), 1.0).unwrap();
            let d = dinkelbach_solve(&ch, &init, &DinkelbachParams::default(), 1.0).unwrap();
            p.objective <= d.objective + 1e-6
        })
        .count();
    println!("PMCGD within 1e-6 of Dinkelbach-BSUM or better on {wins}/{trials}");
    assert!(wins * 100 >= 70 * trials as usize);
}

#[test]
fn random_irs_is_dominated_by_joint_pmcgd() {
    let trials = 100;
    let p = DinkelbachParams::default();
    let ok = (0..trials)
        .filter(|&seed| {
            let (ch, init) = unit_instance(2000 + seed);
            let joint = pmcgd_solve(&ch, &init, &CgdParams::default(), 1.0).unwrap();
            let rnd = random_irs_solve(&ch, seed, &init.w, &p, 1.0).unwrap();
            rnd.secrecy_rate <= joint.secrecy_rate + 1e-6
        })
        .count();
    println!("random IRS at or below joint PMCGD on {ok}/{trials}");
    assert!(ok * 100 >= 95 * trials as usize);
}

#[test]
fn random_irs_reference_cases() {
    let (ch, init) = unit_instance(7);
    let p = DinkelbachParams::default();
    assert_eq!(
        random_irs_solve(&ch, 3, &init.w, &p, 1.0).unwrap(),
        random_irs_solve(&ch, 3, &init.w, &p, 1.0).unwrap()
    );
    let bare = ch.without_irs();
    let a = random_irs_solve(&bare, 3, &init.w, &p, 1.0).unwrap();
    let b = no_irs_solve(&bare, &init.w, &p, 1.0).unwrap();
    assert_eq!(a.state, b.state);
    assert_eq!(a.objective, b.objective);
}

#[test]
fn no_irs_reference_cases() {
    let mut r = rng(8);
    let h = rand_mat(2, 4, &mut r);
    let z = ComplexMatrix::zeros(2, 4);
    let w0 = unit_phases(4, 1.0, &mut r);
    let p = DinkelbachParams::default();
    let blind = ChannelSet::new(h.clone(), z, ComplexMatrix::zeros(0, 4), ComplexMatrix::zeros(2, 0), ComplexMatrix::zeros(2, 0)).unwrap();
    assert!(no_irs_solve(&blind, &w0, &p, 1.0).unwrap().secrecy_rate > 0.0);
    let twin = ChannelSet::new(h.clone(), h, ComplexMatrix::zeros(0, 4), ComplexMatrix::zeros(2, 0), ComplexMatrix::zeros(2, 0)).unwrap();
    let rep = no_irs_solve(&twin, &w0, &p, 1.0).unwrap();
    assert_eq!(rep.secrecy_rate, 0.0);
    for pair in rep.alpha_history.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-12);
    }
}

#[test]
fn grid_oracle_global_phase_case() {
    let mut r = rng(9);
    let ch = unit_channels(1, 2, 0, &mut r);
    let (_, best) = grid_oracle(&ch, 360, 1.3, 1.0).unwrap();
    for k in 0..360 {
        let s = BeamformerState::new(vec![Complex64::from_polar(1.3, k as f64 * PI / 180.0)], vec![]);
        assert!((fractional_objective(&ch, &s, 1.0) - best).abs() <= 1e-12 * best);
    }
}

#[test]
fn grid_oracle_identical_receivers() {
    let mut r = rng(10);
    let hd = rand_mat(2, 2, &mut r);
    let hai = rand_mat(1, 2, &mut r);
    let hir = rand_mat(2, 1, &mut r);
    let ch = ChannelSet::new(hd.clone(), hd, hai, hir.clone(), hir).unwrap();
    let (_, best) = grid_oracle(&ch, 16, 1.0, 1.0).unwrap();
    assert!((best - 1.0).abs() < 1e-12);
}

/// Largest `Σ|∂f/∂φ_k|` over the grid, phases as coordinates.
fn phase_lipschitz(ch: &ChannelSet, levels: usize, amp: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..levels {
        for j in 0..levels {
            let ph = |k: usize| k as f64 * 2.0 * PI / levels as f64;
            let s = BeamformerState::new(
                vec![c(amp, 0.0), Complex64::from_polar(amp, ph(i))],
                vec![Complex64::from_polar(1.0, ph(j))],
            );
            let gw = euclid_grad_w(ch, &s, 1.0);
            let gt = euclid_grad_theta(ch, &s, 1.0);
            let dphi = |g: &Complex64, z: &Complex64| (2.0 * (g.conj() * Complex64::i() * z).re).abs();
            let l: f64 = gw.iter().zip(&s.w).chain(gt.iter().zip(&s.theta)).map(|(g, z)| dphi(g, z)).sum();
            worst = worst.max(l);
        }
    }
    worst
}

#[test]
fn grid_oracle_bounds_pmcgd() {
    let levels = 64;
    for seed in 0..10 {
        let mut r = rng(300 + seed);
        let ch = unit_channels(2, 2, 1, &mut r);
        let init = BeamformerState::random(2, 1, 1.0, &mut r);
        let (_, grid) = grid_oracle(&ch, levels, 1.0, 1.0).unwrap();
        let rep = pmcgd_solve(&ch, &init, &CgdParams::default(), 1.0).unwrap();
        let bound = phase_lipschitz(&ch, levels, 1.0) * PI / levels as f64;
        assert!(grid >= rep.objective - bound, "seed {seed}: grid {grid} pmcgd {} bound {bound}", rep.objective);
    }
}

fn small_spec(dir: &std::path::Path) -> ExperimentSpec {
    let mut spec = ExperimentSpec {
        sweep: SweepVariable::M,
        values: vec![2.0, 4.0],
        trials: 3,
        seed: 42,
        methods: Method::ALL.to_vec(),
        out_dir: dir.to_path_buf(),
        ..ExperimentSpec::default()
    };
    spec.base.n_i = 4;
    spec.base.n_b = 2;
    spec.base.n_e = 2;
    spec.base.noise_power = STUDY_NOISE;
    spec
}

#[test]
fn sweep_files_are_reproducible_and_consistent() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = small_spec(tmp.path());
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    write_results(&spec, &run_experiment(&spec, Some(1)).unwrap(), &a).unwrap();
    write_results(&spec, &run_experiment(&spec, Some(4)).unwrap(), &b).unwrap();
    for f in [TRIALS_FILE, SWEEP_FILE] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }

    // Recompute every summary mean from the per-trial file.
    let mut trials = csv::Reader::from_path(a.join(TRIALS_FILE)).unwrap();
    let rows: Vec<csv::StringRecord> = trials.records().map(|r| r.unwrap()).collect();
    let mut sweep = csv::Reader::from_path(a.join(SWEEP_FILE)).unwrap();
    let mut checked = 0;
    for s in sweep.records() {
        let s = s.unwrap();
        let rates: Vec<f64> = rows
            .iter()
            .filter(|r| r[0] == s[0] && r[2] == s[1])
            .map(|r| r[3].parse().unwrap())
            .collect();
        let mean = rates.iter().sum::<f64>() / rates.len() as f64;
        assert_eq!(mean, s[2].parse::<f64>().unwrap());
        assert_eq!(rates.len(), s[6].parse::<usize>().unwrap());
        checked += 1;
    }
    assert_eq!(checked, 2 * Method::ALL.len());
}

fn trace_column(path: &std::path::Path, col: usize) -> Vec<f64> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap()[col].parse().unwrap())
        .collect()
}

#[test]
fn exported_traces_are_monotone() {
    let tmp = tempfile::tempdir().unwrap();
    let (ch, init) = unit_instance(11);
    let d = dinkelbach_solve(&ch, &init, &DinkelbachParams::default(), 1.0).unwrap();
    let path = tmp.path().join("d.csv");
    export_convergence(&d, &path).unwrap();
    let alpha = trace_column(&path, 2);
    assert_eq!(alpha.len(), d.history.len());
    for pair in alpha.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-12);
    }

    let p = pmcgd_solve(&ch, &init, &CgdParams::default(), 1.0).unwrap();
    let path = tmp.path().join("p.csv");
    export_convergence(&p, &path).unwrap();
    let obj = trace_column(&path, 1);
    for pair in obj.windows(2) {
        assert!(pair[1] <= pair[0]);
    }

    // Disconnected receivers: zero gradient, a single record.
    let z = ChannelSet::new(
        ComplexMatrix::zeros(2, 3),
        ComplexMatrix::zeros(2, 3),
        ComplexMatrix::zeros(1, 3),
        ComplexMatrix::zeros(2, 1),
        ComplexMatrix::zeros(2, 1),
    )
    .unwrap();
    let one = pmcgd_solve(&z, &BeamformerState::random(3, 1, 1.0, &mut rng(1)), &CgdParams::default(), 1.0).unwrap();
    let path = tmp.path().join("one.csv");
    export_convergence(&one, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2, "{text}");
}

