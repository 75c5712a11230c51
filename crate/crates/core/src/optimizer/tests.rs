use super::*;
use crate::channel::{build_channel_set, rayleigh_channel_set, ArraySpec, Dims, FadingSpec};
use crate::linalg::ZERO;
use crate::metrics::rate_upper_bound;
use crate::surface::PASSIVE_MODULUS_TOL;
use approx::assert_relative_eq;

fn random_state(seed: u64, n: usize, active: &[usize], amp: f64) -> SurfaceCoefficients {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
    SurfaceCoefficients::from_polar(&phases, &vec![amp; n], active).unwrap()
}

fn wrap(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a > std::f64::consts::PI {
        a - TAU
    } else {
        a
    }
}

fn scalar_channels(h_ar: Complex64, h_ab: Complex64, h_rb: Complex64) -> ChannelSet {
    let m = |z| CMatrix::from_element(1, 1, z);
    ChannelSet::new(m(h_ar), m(h_ab), m(h_rb), m(Complex64::new(0.2, 0.1)), m(Complex64::new(-0.1, 0.3)), 1.0).unwrap()
}

#[test]
fn scalar_update_aligns_with_direct_path() {
    let (h_ar, h_ab, h_rb) = (Complex64::new(0.4, 0.9), Complex64::new(-0.7, 0.2), Complex64::new(0.3, -1.2));
    let ch = scalar_channels(h_ar, h_ab, h_rb);
    let coeffs = SurfaceCoefficients::passive(&[2.0]);
    let budget = PowerBudget::new(1.0, 1.0).unwrap();
    let (theta, diag) = update_element(0, &coeffs, &ch, &budget, 1.5).unwrap();
    let expected = h_ab.arg() - (h_rb * h_ar).arg();
    assert!(wrap(theta.arg() - expected).abs() < 1e-10);
    assert_relative_eq!(theta.norm(), 1.0, max_relative = 1e-15);
    let best = (1.0 + 1.5 * (h_rb.norm() * h_ar.norm() + h_ab.norm()).powi(2)).log2();
    assert_relative_eq!(diag.objective_after, best, max_relative = 1e-12);
}

#[test]
fn dead_element_keeps_objective() {
    let mut ch = rayleigh_channel_set(Dims { n_alice: 2, n_bob: 3, n_willie: 1, n_elements: 3 }, 1.0, 5).unwrap();
    ch.h_rb.column_mut(1).fill(ZERO);
    let coeffs = random_state(1, 3, &[], 1.0);
    let budget = PowerBudget::new(1.0, 1.0).unwrap();
    let (theta, diag) = update_element(1, &coeffs, &ch, &budget, 1.0).unwrap();
    assert_eq!(diag.lambda, ZERO);
    assert_eq!(theta, Complex64::new(1.0, 0.0));
    assert!(diag.vnp_vn.is_none());
    assert_relative_eq!(diag.objective_before, diag.objective_after, max_relative = 1e-14);
}

#[test]
fn passive_update_beats_phase_grid() {
    for seed in 0..10 {
        let ch = rayleigh_channel_set(Dims { n_alice: 4, n_bob: 4, n_willie: 1, n_elements: 4 }, 1.0, seed).unwrap();
        let coeffs = random_state(seed, 4, &[], 1.0);
        let budget = PowerBudget::new(1.0, 1.0).unwrap();
        for n in 0..4 {
            let (theta, diag) = update_element(n, &coeffs, &ch, &budget, 0.8).unwrap();
            let mut probe = coeffs.clone();
            let grid_best = (0..3600)
                .map(|k| {
                    probe.set(n, Complex64::from_polar(1.0, TAU * k as f64 / 3600.0)).unwrap();
                    rate_upper_bound(&probe, &ch, 0.8).unwrap()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            probe.set(n, theta).unwrap();
            let at_star = rate_upper_bound(&probe, &ch, 0.8).unwrap();
            assert!(at_star >= grid_best - 1e-6, "seed {seed} element {n}");
            assert!(diag.objective_after >= diag.objective_before - 1e-9);
        }
    }
}

#[test]
fn active_update_uses_full_budget() {
    let ch = rayleigh_channel_set(Dims { n_alice: 3, n_bob: 4, n_willie: 1, n_elements: 5 }, 1.0, 8).unwrap();
    let coeffs = random_state(8, 5, &[1, 3], 0.1);
    let budget = PowerBudget::new(10.0, 2.0).unwrap();
    let (theta, _) = update_element(3, &coeffs, &ch, &budget, 0.5).unwrap();
    let mut after = coeffs.clone();
    after.set(3, theta).unwrap();
    assert_relative_eq!(relay_power(&after, &ch.h_rb, 0.5, ch.sigma_r_sq), 2.0, max_relative = 1e-12);

    // budget already taken by element 1
    let mut hog = coeffs.clone();
    hog.set(1, Complex64::new(100.0, 0.0)).unwrap();
    assert!(matches!(update_element(3, &hog, &ch, &budget, 0.5), Err(Error::InfeasibleBudget { .. })));
}

#[test]
fn single_element_sweep_equals_update() {
    let ch = rayleigh_channel_set(Dims { n_alice: 2, n_bob: 2, n_willie: 1, n_elements: 1 }, 1.0, 2).unwrap();
    let coeffs = random_state(2, 1, &[0], 0.5);
    let budget = PowerBudget::new(1.0, 3.0).unwrap();
    let (theta, diag) = update_element(0, &coeffs, &ch, &budget, 0.7).unwrap();
    let mut swept = coeffs.clone();
    let report = sweep_elements(&mut swept, &ch, &budget, 0.7).unwrap();
    assert_relative_eq!((swept.theta()[0] - theta).norm(), 0.0, epsilon = 1e-14);
    assert_relative_eq!(report.f0_after(), diag.objective_after, max_relative = 1e-12);
}

#[test]
fn sweeps_ascend_and_preserve_constraints() {
    for seed in 0..20 {
        let ch = rayleigh_channel_set(Dims { n_alice: 3, n_bob: 4, n_willie: 2, n_elements: 12 }, 1.0, 40 + seed).unwrap();
        let active: Vec<usize> = if seed % 2 == 0 { vec![] } else { vec![0, 5, 9] };
        let mut coeffs = random_state(seed, 12, &active, 0.05);
        let budget = PowerBudget::new(10.0, 1.5).unwrap();
        let mut last = rate_upper_bound(&coeffs, &ch, 0.9).unwrap();
        for _ in 0..10 {
            let report = sweep_elements(&mut coeffs, &ch, &budget, 0.9).unwrap();
            assert!((report.objectives[0] - last).abs() < 1e-9);
            for w in report.objectives.windows(2) {
                assert!(w[1] >= w[0] - 1e-9);
            }
            // recomputed from scratch
            last = rate_upper_bound(&coeffs, &ch, 0.9).unwrap();
            assert!((last - report.f0_after()).abs() < 1e-8);
            assert!(coeffs.passive_modulus_error() <= PASSIVE_MODULUS_TOL);
            assert!(relay_power(&coeffs, &ch.h_rb, 0.9, ch.sigma_r_sq) <= 1.5 * (1.0 + 1e-9));
        }
        if active.is_empty() {
            assert!(coeffs.theta().iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
        }
    }
}

#[test]
fn scalar_forms_match_direct_determinants() {
    let mut checked = 0;
    for seed in 0..40 {
        let ch = rayleigh_channel_set(Dims { n_alice: 3, n_bob: 4, n_willie: 1, n_elements: 6 }, 1.0, 70 + seed).unwrap();
        let coeffs = random_state(seed, 6, &[2, 4], 1.3);
        for n in 0..6 {
            let ctx = build_element_context(n, &coeffs, &ch, 1.1).unwrap();
            let theta = coeffs.theta()[n];
            let a_chol = cholesky(&ctx.a_mat, "A").unwrap();
            let iota = sole_nonzero_eigenvalue(&a_chol.solve(&ctx.b_mat), RANK_TOL).unwrap().value.re;
            let d_n = CMatrix::identity(4, 4) + a_chol.solve(&ctx.b_mat) * Complex64::new(theta.norm_sqr(), 0.0);
            assert_relative_eq!(d_n.determinant().re.log2(), (1.0 + theta.norm_sqr() * iota).log2(), max_relative = 1e-8);

            let e_mat = &ctx.a_mat + &ctx.b_mat * Complex64::new(theta.norm_sqr(), 0.0);
            let e_chol = cholesky(&e_mat, "E").unwrap();
            let eig = sole_nonzero_eigenvalue(&e_chol.solve(&ctx.c_mat), RANK_TOL).unwrap();
            let vv = similarity_coupling(&eig, &e_chol.solve(&ctx.c_mat.adjoint())).unwrap();
            let direct = direct_coupling_matrix(&ctx, theta).unwrap().determinant();
            assert_relative_eq!(direct.re.log2(), rank_one_log_det(theta, eig.value, vv), max_relative = 1e-8);
            // f0 = log|A| + log(1 + r^2 iota) + coupling term
            let total = log2_det_a(&ctx).unwrap() + (1.0 + theta.norm_sqr() * iota).log2() + rank_one_log_det(theta, eig.value, vv);
            assert_relative_eq!(total, rate_upper_bound(&coeffs, &ch, 1.1).unwrap(), max_relative = 1e-8);
            checked += 1;
        }
    }
    assert_eq!(checked, 240);
}

#[test]
fn optimize_scalar_reaches_alignment() {
    let (h_ar, h_ab, h_rb) = (Complex64::new(-0.4, 0.6), Complex64::new(0.2, 0.25), Complex64::new(0.9, 0.3));
    let ch = scalar_channels(h_ar, h_ab, h_rb);
    let params = SystemParams { pa_max: 50.0, pr_max: 1.0, active_count: 0, ..SystemParams::default() };
    let res = optimize(&ch, &params, &AoSettings::default()).unwrap();
    let expected = h_ab.arg() - (h_rb * h_ar).arg();
    assert!(wrap(res.coeffs.phase(0) - expected).abs() < 1e-8);
    assert!(res.converged);
    // the first sweep already lands on the optimum
    let first = &res.trace[0].sweeps[0];
    assert_relative_eq!(first.f0_after(), (1.0 + res.trace[0].pa_sweep * (h_rb.norm() * h_ar.norm() + h_ab.norm()).powi(2)).log2(), max_relative = 1e-12);
    let gain = (h_rb.norm() * h_ar.norm() + h_ab.norm()).powi(2);
    assert!((res.rate_bits - (1.0 + res.pa_star * gain).log2()).abs() < 1e-10);
}

#[test]
fn optimize_meets_constraints_on_default_scene() {
    let params = SystemParams::default();
    for seed in 0..8 {
        for k in [0, 3] {
            let arrays = ArraySpec { ris_rows: 4, ris_cols: 4, ..params.arrays };
            let ch = build_channel_set(&params.geometry, &arrays, &FadingSpec::new(3.0, seed), params.noise_dbm).unwrap();
            let p = SystemParams { active_count: k, arrays, ..params.clone() };
            let res = optimize(&ch, &p, &AoSettings { init_seed: seed, ..AoSettings::default() }).unwrap();
            assert!(res.coeffs.passive_modulus_error() <= 1e-12);
            assert!(res.relay_power <= p.pr_max * (1.0 + 1e-9));
            assert!(res.d01_nats <= p.covertness_threshold() * (1.0 + 1e-6));
            assert!(res.pa_star <= p.pa_max);
            assert!(res.rate_bits > 0.0);
            for it in &res.trace {
                for sweep in &it.sweeps {
                    for w in sweep.objectives.windows(2) {
                        assert!(w[1] >= w[0] - 1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn settings_validation() {
    assert!(AoSettings { max_outer_iters: 0, ..AoSettings::default() }.validate().is_err());
    assert!(AoSettings { rel_tol: 1.0, ..AoSettings::default() }.validate().is_err());
    assert!(AoSettings::default().validate().is_ok());
}
