mod common;

use common::max_abs_diff;
use mixbound::em::{
    e_step, gradient_matrix, log_likelihood, m_step, run_em, run_restarts, DataMatrix, EmOptions, Init, ParameterTriple,
};
use mixbound::harness::best_loglik_prefixes;
use mixbound::par::Execution;
use mixbound::Matrix;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn counts(m: usize, n: usize) -> impl Strategy<Value = DataMatrix> {
    prop::collection::vec(0u32..=40, m * n).prop_filter_map("empty table", move |v| {
        let data: Vec<f64> = v.into_iter().map(f64::from).collect();
        DataMatrix::new(Matrix::new(m, n, data).unwrap()).ok()
    })
}

fn positive_counts(m: usize, n: usize) -> impl Strategy<Value = DataMatrix> {
    prop::collection::vec(1u32..=40, m * n)
        .prop_map(move |v| DataMatrix::new(Matrix::new(m, n, v.into_iter().map(f64::from).collect()).unwrap()).unwrap())
}

fn case() -> impl Strategy<Value = (DataMatrix, usize, u64)> {
    (3usize..=5, 3usize..=5)
        .prop_flat_map(|(m, n)| (counts(m, n), 1..m.min(n), any::<u64>()))
}

fn theta_for(u: &DataMatrix, r: usize, seed: u64) -> ParameterTriple {
    let (m, n) = u.shape();
    ParameterTriple::random(m, n, r, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn responsibilities_conserve_counts((u, r, seed) in case()) {
        let theta = theta_for(&u, r, seed);
        let v = e_step(&u, &theta).unwrap();
        let diff = max_abs_diff(&v.marginal(), u.counts());
        prop_assert!(diff <= 1e-12 * u.total(), "marginal differs by {diff}");
    }

    #[test]
    fn m_step_is_stochastic((u, r, seed) in case()) {
        let theta = theta_for(&u, r, seed);
        let step = m_step(&e_step(&u, &theta).unwrap(), u.total()).unwrap();
        prop_assert!(step.params.stochasticity_error() < 1e-12);
        prop_assert_eq!(step.params.rank(), r);
    }

    #[test]
    fn log_likelihood_never_decreases((u, r, seed) in case()) {
        let opts = EmOptions { max_iter: 300, ..EmOptions::default() };
        let fit = run_em(&u, r, Init::Seed(seed), &opts).unwrap();
        for w in fit.loglik_trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
        }
        prop_assert_eq!(fit.loglik_trace.len(), fit.iterations + 1);
        prop_assert!(fit.params.stochasticity_error() < 1e-9);
        prop_assert!((fit.p_hat.data().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_fit_is_the_independence_model(u in (2usize..=5, 2usize..=5).prop_flat_map(|(m, n)| counts(m, n)), seed in any::<u64>()) {
        let fit = run_em(&u, 1, Init::Seed(seed), &EmOptions::default()).unwrap();
        let (m, n) = u.shape();
        let c = u.counts();
        let total = u.total();
        let expected = Matrix::from_fn(m, n, |i, j| {
            let row: f64 = c.row(i).iter().sum();
            let col: f64 = c.col(j).iter().sum();
            row * col / (total * total)
        });
        prop_assert!(max_abs_diff(&fit.p_hat, &expected) < 1e-12);
        prop_assert!(fit.critical.critical);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn converged_points_are_fixed(u in positive_counts(4, 4), seed in any::<u64>()) {
        let opts = EmOptions { max_iter: 20_000, tol: 1e-14, ..EmOptions::default() };
        let fit = run_em(&u, 2, Init::Seed(seed), &opts).unwrap();
        prop_assume!(fit.converged);
        let again = run_em(&u, 2, Init::Params(fit.params.clone()), &EmOptions { max_iter: 1, ..opts }).unwrap();
        prop_assert!(max_abs_diff(&again.p_hat, &fit.p_hat) < 1e-12);
        let (ra, rb) = fit.fixed_point_residual;
        prop_assert!(ra.max(rb) < 1e-6 * u.total(), "residual {ra:e} {rb:e}");
    }

    #[test]
    fn interior_optima_have_low_rank_gradient(u in positive_counts(5, 5), seed in any::<u64>()) {
        let r = 2;
        let opts = EmOptions { max_iter: 20_000, tol: 1e-13, ..EmOptions::default() };
        let fit = run_em(&u, r, Init::Seed(seed), &opts).unwrap();
        let smallest = fit.params.a.data().iter().chain(fit.params.b.data()).cloned().fold(f64::INFINITY, f64::min);
        prop_assume!(fit.converged && smallest > 1e-3);
        prop_assert!(fit.critical.critical);
        // P^T R = 0 and R P^T = 0 force rank R <= min(m, n) - rank P.
        let grad = gradient_matrix(&u, &fit.p_hat).unwrap();
        let g = grad.matrix();
        let svd = DMatrix::from_row_slice(g.nrows(), g.ncols(), g.data()).singular_values();
        let scale = u.total();
        let large = svd.iter().filter(|&&s| s > 1e-6 * scale).count();
        prop_assert!(large <= 5 - r, "gradient has {large} large singular values: {svd:?}");
    }

    #[test]
    fn best_restart_dominates(u in positive_counts(4, 4), seed in any::<u64>()) {
        let opts = EmOptions { max_iter: 200, ..EmOptions::default() };
        let restarts = run_restarts(&u, 3, seed, 12, &opts, Execution::Sequential).unwrap();
        let best = restarts.best_run().loglik;
        prop_assert!(restarts.runs.iter().all(|run| run.loglik <= best));
        prop_assert!(restarts.runs[..restarts.best].iter().all(|run| run.loglik < best));
        let prefixes = best_loglik_prefixes(&restarts.runs);
        prop_assert!(prefixes.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(*prefixes.last().unwrap(), best);
    }
}

#[test]
fn restarts_are_deterministic_across_execution_modes() {
    let u = DataMatrix::from_rows(&[&[3, 1, 4, 1], &[5, 9, 2, 6], &[5, 3, 5, 8], &[9, 7, 9, 3]]).unwrap();
    let opts = EmOptions { max_iter: 300, ..EmOptions::default() };
    let seq = run_restarts(&u, 3, 42, 16, &opts, Execution::Sequential).unwrap();
    let par = run_restarts(&u, 3, 42, 16, &opts, Execution::Parallel).unwrap();
    let again = run_restarts(&u, 3, 42, 16, &opts, Execution::Sequential).unwrap();
    assert_eq!(seq.runs, par.runs);
    assert_eq!(seq.runs, again.runs);
    assert_eq!(seq.best, par.best);
    let other = run_restarts(&u, 3, 43, 16, &opts, Execution::Sequential).unwrap();
    assert_ne!(seq.runs[0].p_hat, other.runs[0].p_hat);
}

#[test]
fn log_likelihood_handles_zero_cells() {
    let u = DataMatrix::from_rows(&[&[2, 0], &[0, 2]]).unwrap();
    let p = Matrix::from_f64_rows(&[&[0.5, 0.0], &[0.0, 0.5]]).unwrap();
    assert!((log_likelihood(&u, &p) - 4.0 * 0.5f64.ln()).abs() < 1e-15);
    let q = Matrix::from_f64_rows(&[&[0.0, 0.5], &[0.5, 0.0]]).unwrap();
    assert_eq!(log_likelihood(&u, &q), f64::NEG_INFINITY);
}

#[test]
fn invalid_inputs_are_rejected() {
    let u = DataMatrix::from_rows(&[&[1, 2], &[3, 4]]).unwrap();
    assert!(run_em(&u, 0, Init::Seed(0), &EmOptions::default()).is_err());
    let wrong = ParameterTriple::random(3, 2, 1, &mut ChaCha8Rng::seed_from_u64(0));
    assert!(run_em(&u, 1, Init::Params(wrong), &EmOptions::default()).is_err());
    assert!(run_restarts(&u, 1, 0, 0, &EmOptions::default(), Execution::Sequential).is_err());
    assert!(DataMatrix::from_rows(&[&[0, 0], &[0, 0]]).is_err());
}
