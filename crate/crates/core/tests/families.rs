mod common;

use common::*;
use mixbound::boundary::{boundary_test, BoundaryStatus};
use mixbound::em::{log_likelihood, run_restarts, EmOptions};
use mixbound::families::{
    greencurve_curve_point, greencurve_left_endpoint, greencurve_matrix, rectangle_family, rectangle_in_model,
    uab_closed_form_mle, uab_counts, uab_in_model, uab_matrix,
};
use mixbound::par::Execution;
use mixbound::rank3cert::nnrank3_membership;
use mixbound::scalar::rational;
use mixbound::{Error, Matrix, Rational};

fn member(p: &Matrix<Rational>) -> bool {
    nnrank3_membership(p).unwrap().verdict.is_member()
}

#[test]
fn uab_closed_form_agrees_with_membership() {
    for a in 1..=50u64 {
        for b in 0..=a {
            assert_eq!(uab_in_model(a, b).unwrap(), member(&uab_counts(a, b)), "a = {a}, b = {b}");
        }
    }
}

#[test]
fn rectangle_grid_agrees_with_membership() {
    for i in 0..20 {
        for j in 0..20 {
            let (a, b) = (rational(i, 19), rational(j, 19));
            let p = rectangle_family(&a, &b).unwrap();
            assert_eq!(rectangle_in_model(&a, &b).unwrap(), member(&p), "a = {a}, b = {b}");
        }
    }
}

#[test]
fn rectangle_curve_is_boundary() {
    for k in 1..10 {
        let a = rational(k, 10);
        let b = (rational(1, 1) - &a) / (rational(1, 1) + &a);
        let c = boundary_test(&rectangle_family(&a, &b).unwrap()).unwrap();
        assert_eq!(c.status, BoundaryStatus::Boundary, "a = {a}");
        let inside = &b - rational(1, 1000);
        let c = boundary_test(&rectangle_family(&a, &inside).unwrap()).unwrap();
        assert_eq!(c.status, BoundaryStatus::Interior, "a = {a}, b = {inside}");
        let outside = &b + rational(1, 1000);
        let c = boundary_test(&rectangle_family(&a, &outside).unwrap()).unwrap();
        assert_eq!(c.status, BoundaryStatus::OutsideModel, "a = {a}, b = {outside}");
    }
}

#[test]
fn parameters_outside_the_unit_square_are_rejected() {
    assert!(matches!(rectangle_family(&rational(3, 2), &rational(0, 1)), Err(Error::Domain(_))));
    assert!(matches!(uab_in_model(1, 2), Err(Error::Domain(_))));
}

/// Along the singular curve the family leaves the model as x changes sign.
#[test]
fn greencurve_membership_flips_at_the_origin() {
    for (x, expect) in [(-0.1, true), (-0.05, true), (0.05, false), (0.1, false)] {
        let xr = mixbound::scalar::rationalize(x, 1_000_000).unwrap();
        let y = greencurve_curve_point(&xr, 0.0).unwrap();
        let p = greencurve_matrix(&x, &y);
        assert!(p.data().iter().all(|v| *v > 0.0));
        let d = nnrank3_membership(&p).unwrap();
        assert!(!d.marginal, "x = {x}: marginal decision");
        assert_eq!(d.verdict.is_member(), expect, "x = {x}, y = {y}");
    }
    let (x, y) = greencurve_left_endpoint().unwrap();
    assert!((x + 8.0 + 5.0 * y).abs() < 1e-9);
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// The eight maximizers form one orbit of the symmetry group of the data.
#[test]
fn uab_maximizers_form_a_symmetry_orbit() {
    let mle = uab_closed_form_mle(1, 0).unwrap();
    let exact = mle.exact.unwrap();
    let u = uab_counts(1, 0);
    let perms = permutations(4);
    let first = &exact.matrices[0];
    for (k, target) in exact.matrices.iter().enumerate() {
        let found = perms.iter().any(|rows| {
            perms.iter().any(|cols| {
                let fixes_u = |m: &Matrix<Rational>| permute(m, rows, cols) == u;
                (fixes_u(&u) && &permute(first, rows, cols) == target)
                    || (fixes_u(&u.transpose()) && &permute(&first.transpose(), rows, cols) == target)
            })
        });
        assert!(found, "matrix {k} is not a symmetry image of the first");
    }
    for (i, p) in exact.matrices.iter().enumerate() {
        for q in &exact.matrices[i + 1..] {
            assert_ne!(p, q);
        }
    }
}

#[test]
fn em_reaches_the_closed_form_maximum() {
    for (a, b) in [(1u64, 0u64), (100, 41), (10, 3)] {
        let mle = uab_closed_form_mle(a, b).unwrap();
        let u = uab_matrix(a, b).unwrap();
        let closed = log_likelihood(&u, &mle.matrices[0]);
        let opts = EmOptions {
            max_iter: 20_000,
            tol: 1e-14,
            ..EmOptions::default()
        };
        let best = run_restarts(&u, 3, 11, 40, &opts, Execution::Parallel).unwrap().best_run().loglik;
        assert!((best - closed).abs() < 1e-6, "({a}, {b}): EM {best}, closed form {closed}");
        for p in &mle.matrices {
            assert!((log_likelihood(&u, p) - closed).abs() < 1e-9);
            assert!(p.data().iter().all(|x| *x >= 0.0) && (p.data().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn closed_form_refuses_members_and_ties() {
    assert!(uab_closed_form_mle(100, 42).is_err());
    assert!(uab_closed_form_mle(5, 5).is_err());
}
