use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use swipt_core::baselines::{baseline1_solve, baseline2_solve, BaselineSettings};
use swipt_core::channel::{db_to_linear, draw_realization, rician_sample, ChannelRealization, ScenarioParams};
use swipt_core::engine::{solve, SolveStatus, SolverSettings};
use swipt_core::hermitian::{eigenvalues, vec_norm, ComplexMatrix, HermitianMatrix};
use swipt_core::metrics::{det_identity_plus, eaves_capacity_cov, harvested_power_cov, TransmitCovariance};
use swipt_core::model::build_sdp;
use swipt_core::pipeline::solve_realization;
use swipt_core::restore::RestoreSettings;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        ..ProptestConfig::default()
    }
}

fn complex_matrix(rows: usize, cols: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |i, j| {
        let (re, im) = entries[(i * cols + j) % entries.len()];
        Complex64::new(re, im)
    })
}

/// `A A^H` for a random square `A`.
fn psd(n: usize, entries: &[(f64, f64)]) -> HermitianMatrix {
    let a = complex_matrix(n, n, entries);
    HermitianMatrix::hermitian_part(&(&a * a.adjoint()))
}

fn entries() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 64)
}

fn scenario(n_tx: usize, n_info: usize, n_eh: usize, gamma_db: f64) -> ScenarioParams {
    ScenarioParams::reference_setup(n_tx, n_info, n_eh, gamma_db)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(cases(16))]

    #[test]
    fn rician_samples_have_unit_mean_power(k_db in -10.0..20.0f64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 40_000;
        let mean = (0..n).map(|_| rician_sample(&mut rng, db_to_linear(k_db)).norm_sqr()).sum::<f64>() / n as f64;
        prop_assert!((mean - 1.0).abs() < 0.03, "mean power {mean}");
    }

    #[test]
    fn draw_realization_is_pure(seed in any::<u64>(), n_tx in 2usize..9) {
        let params = scenario(n_tx, 2, 2, 5.0);
        let before = params.clone();
        let a = draw_realization(&params, seed).unwrap();
        let b = draw_realization(&params, seed).unwrap();
        prop_assert_eq!(&params, &before);
        prop_assert_eq!(a.h, b.h);
        prop_assert_eq!(a.g, b.g);
        prop_assert_eq!(a.distances_info, b.distances_info);
    }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn harvested_power_is_linear(e in entries(), a in 0.0..3.0f64, b in 0.0..3.0f64, eta in 0.1..1.0f64) {
        let n = 4;
        let g = complex_matrix(n, 2, &e[40..]);
        let c1 = TransmitCovariance { w: vec![psd(n, &e[..16])], v: psd(n, &e[16..32]) };
        let c2 = TransmitCovariance { w: vec![psd(n, &e[8..24])], v: psd(n, &e[24..40]) };
        let mix = TransmitCovariance {
            w: vec![c1.w[0].scale(a).add(&c2.w[0].scale(b))],
            v: c1.v.scale(a).add(&c2.v.scale(b)),
        };
        let lhs = harvested_power_cov(&g, &mix, eta).unwrap();
        let rhs = a * harvested_power_cov(&g, &c1, eta).unwrap() + b * harvested_power_cov(&g, &c2, eta).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn more_noise_never_raises_eavesdropper_capacity(e in entries(), extra in 0.0..5.0f64, sigma2 in 1e-3..1.0f64) {
        let n = 4;
        let g = complex_matrix(n, 2, &e[48..]);
        let w = psd(n, &e[..16]);
        let v = psd(n, &e[16..32]);
        let bigger = v.add(&psd(n, &e[32..48]).scale(extra));
        let c0 = eaves_capacity_cov(&g, &w, &v, sigma2).unwrap();
        let c1 = eaves_capacity_cov(&g, &w, &bigger, sigma2).unwrap();
        prop_assert!(c1 <= c0 + 1e-9 * (1.0 + c0), "{c1} > {c0}");
    }

    #[test]
    fn trace_bound_implies_eigenvalue_bound(e in entries(), alpha in 0.0..10.0f64) {
        let a = psd(3, &e);
        let ev = eigenvalues(&a);
        let lmax = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lmax <= a.trace() * (1.0 + 1e-12) + 1e-12);
        if a.trace() <= alpha {
            prop_assert!(lmax <= alpha + 1e-12);
        }
        prop_assert!(det_identity_plus(&a) >= (1.0 + a.trace()) * (1.0 - 1e-12));
    }
}

/// Reference setup with three information receivers and two harvesters.
fn instance(seed: u64, n_tx: usize, gamma_db: f64) -> (ScenarioParams, ChannelRealization) {
    let params = scenario(n_tx, 3, 2, gamma_db);
    let ch = draw_realization(&params, seed).unwrap();
    (params, ch)
}

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn optimal_pipeline_properties(seed in any::<u64>(), n_tx in 4usize..9, gamma_db in 0.0..8.0f64) {
        let (params, ch) = instance(seed, n_tx, gamma_db);
        let solver = SolverSettings::default();
        let out = solve_realization(&ch, &params, &solver, &RestoreSettings::default()).unwrap();
        prop_assume!(out.solution.status == SolveStatus::Optimal);
        let sol = &out.solution;

        // Weak duality at the returned point.
        prop_assert!(sol.dual_objective >= sol.objective - 1e-7 * sol.objective.abs().max(1e-12));

        let (policy, cert) = out.policy.as_ref().expect("restoration succeeds on optimal solves");
        let report = out.report.as_ref().unwrap();

        // Restoration keeps the total covariance and the objective.
        let relaxed = sol.primal.w.iter().fold(sol.primal.v.clone(), |acc, w| acc.add(w));
        let restored = policy.covariance().total();
        prop_assert!(relaxed.sub(&restored).frobenius() <= 1e-8 * relaxed.frobenius().max(1e-300));
        prop_assert!(rel_close(policy.objective_tau, sol.primal.tau, 1e-12));
        for b in &cert.beams {
            prop_assert!(b.h_null_leak <= 1e-5);
        }

        // Rank-one feasible policies meet the eavesdropping limit.
        prop_assert!(report.max_c2_excess(&params.cap_limit) <= 1e-6);

        // Per-receiver secrecy is at least log2(1 + Γ) minus the limit.
        for (k, s) in report.secrecy_cap.iter().enumerate() {
            let worst_limit = params.cap_limit.iter().map(|row| row[k]).fold(0.0, f64::max);
            let floor = (1.0 + params.sinr_req[k]).log2() - worst_limit;
            // Certified tolerances: SINR within relative 1e-6, capacity within 1e-6.
            let g = params.sinr_req[k];
            let tol = 1e-6 + 2e-6 * g / ((1.0 + g) * std::f64::consts::LN_2);
            prop_assert!(*s >= floor - tol, "IR{} secrecy {s} below {floor}", k + 1);
        }

        // The rank-one policy maps back to a feasible relaxed point.
        let blocks = out.problem.point_from_covariance(&ch, &params, &policy.covariance(), policy.objective_tau).unwrap();
        let scale = 1.0 + blocks.iter().map(HermitianMatrix::frobenius).fold(0.0, f64::max);
        prop_assert!(out.problem.point_violation(&blocks) <= 1e-6 * scale);
    }

    #[test]
    fn baselines_are_dominated_and_zero_forcing_meets_the_limit(seed in any::<u64>(), n_tx in 5usize..9) {
        let (params, ch) = instance(seed, n_tx, 3.0);
        let settings = BaselineSettings::default();
        let opt = solve(&build_sdp(&ch, &params).unwrap(), &SolverSettings::default());
        let (Ok(b1), Ok(b2)) = (baseline1_solve(&ch, &params, &settings), baseline2_solve(&ch, &params, &settings)) else {
            return Err(TestCaseError::reject("a baseline is infeasible"));
        };
        prop_assume!(opt.status == SolveStatus::Optimal && b1.feasible && b2.feasible);
        let tol = 1e-6 * opt.primal.tau;
        prop_assert!(opt.primal.tau >= b1.objective_tau - tol);
        prop_assert!(b1.objective_tau >= b2.objective_tau - tol);

        let policy = b2.policy().unwrap();
        let report = swipt_core::metrics::evaluate_policy(&ch, &params, &policy).unwrap();
        prop_assert!(report.max_c2_excess(&params.cap_limit) <= 1e-6);
    }

    #[test]
    fn scaling_channels_and_noise_together_scales_tau(seed in any::<u64>(), c in 0.1..10.0f64) {
        let (params, ch) = instance(seed, 6, 3.0);
        let base = solve(&build_sdp(&ch, &params).unwrap(), &SolverSettings::default());
        prop_assume!(base.status == SolveStatus::Optimal);
        let mut scaled_params = params.clone();
        scaled_params.noise_power *= c * c;
        let scaled = solve(&build_sdp(&ch.scaled(c), &scaled_params).unwrap(), &SolverSettings::default());
        prop_assert_eq!(scaled.status, SolveStatus::Optimal);
        prop_assert!(rel_close(scaled.primal.tau, c * c * base.primal.tau, 1e-6), "{} vs {}", scaled.primal.tau, c * c * base.primal.tau);
    }
}

proptest! {
    #![proptest_config(cases(6))]

    #[test]
    fn larger_budget_never_lowers_tau(seed in any::<u64>()) {
        let (params, ch) = instance(seed, 6, 3.0);
        let mut last = f64::NEG_INFINITY;
        for p_dbm in [40.0, 42.0, 44.0, 46.0, 48.0] {
            let mut p = params.clone();
            p.p_max = swipt_core::channel::dbm_to_watts(p_dbm);
            let sol = solve(&build_sdp(&ch, &p).unwrap(), &SolverSettings::default());
            if sol.status != SolveStatus::Optimal {
                prop_assert!(last == f64::NEG_INFINITY, "infeasible at {p_dbm} dBm after a feasible budget");
                continue;
            }
            prop_assert!(sol.primal.tau >= last * (1.0 - 1e-6), "tau fell at {p_dbm} dBm");
            last = sol.primal.tau;
        }
    }
}

#[test]
fn restored_beams_have_unit_rank() {
    let (params, ch) = instance(11, 6, 3.0);
    let out = solve_realization(&ch, &params, &SolverSettings::default(), &RestoreSettings::default()).unwrap();
    let (policy, _) = out.policy.expect("seed 11 is feasible");
    for b in &policy.beams {
        let ev = eigenvalues(&HermitianMatrix::outer(b));
        let top = ev.iter().copied().fold(0.0, f64::max);
        assert!(ev.iter().filter(|&&e| e > 1e-9 * top).count() == 1);
        assert!(vec_norm(b) > 0.0);
    }
}
