mod common;

use common::*;
use mixbound::exactla::matrix_rank;
use mixbound::rank3cert::{bracket3, nested_polygons, nnrank3_membership, nonneg_rank3_factorize, Verdict};
use mixbound::scalar::{int, rational};
use mixbound::{Error, Matrix, Rational};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn verdict(p: &Matrix<Rational>) -> Verdict {
    nnrank3_membership(p).unwrap().verdict
}

fn assert_factorization(p: &Matrix<Rational>) -> Result<(), TestCaseError> {
    let (a, b) = nonneg_rank3_factorize(p).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(a.shape(), (p.nrows(), 3));
    prop_assert_eq!(b.shape(), (3, p.ncols()));
    prop_assert!(a.data().iter().chain(b.data()).all(|x| !x.is_negative()));
    prop_assert_eq!(&a.matmul(&b).unwrap(), p);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn products_of_nonnegative_factors_are_members(seed in any::<u64>(), m in 3usize..=7, n in 3usize..=7) {
        let p = random_rank3_product(m, n, &mut rng(seed));
        prop_assert!(verdict(&p).is_member());
        assert_factorization(&p)?;
    }

    #[test]
    fn membership_is_invariant_under_symmetries(seed in any::<u64>(), m in 3usize..=6, n in 3usize..=6) {
        let mut r = rng(seed);
        let p = random_nonneg(m, n, 6, 0.3, &mut r);
        let member = verdict(&p).is_member();
        let rows = shuffled(m, &mut r);
        let cols = shuffled(n, &mut r);
        let c = rational(r.random_range(1..=50), r.random_range(1..=50));
        prop_assert_eq!(verdict(&p.transpose()).is_member(), member);
        prop_assert_eq!(verdict(&permute(&p, &rows, &cols)).is_member(), member);
        prop_assert_eq!(verdict(&scale(&p, &c)).is_member(), member);
        prop_assert_eq!(verdict(&rescale_lines(&p, &mut r)).is_member(), member);
    }

    #[test]
    fn every_accepted_matrix_factorizes(seed in any::<u64>(), m in 1usize..=6, n in 1usize..=6) {
        let p = random_nonneg(m, n, 5, 0.35, &mut rng(seed));
        let decision = nnrank3_membership(&p).unwrap();
        prop_assert_eq!(decision.rank, matrix_rank(&p, 0.0));
        if decision.verdict.is_member() {
            assert_factorization(&p)?;
        } else {
            prop_assert!(decision.rank >= 3);
            prop_assert!(matches!(nonneg_rank3_factorize(&p), Err(Error::Refused(_))));
        }
    }

    #[test]
    fn rank_at_most_two_is_always_in(seed in any::<u64>(), m in 1usize..=6, n in 1usize..=6) {
        let mut r = rng(seed);
        let a = random_nonneg(m, 2, 9, 0.2, &mut r);
        let b = random_nonneg(2, n, 9, 0.2, &mut r);
        let p = a.matmul(&b).unwrap();
        let v = verdict(&p);
        prop_assert!(v.is_member());
        if matrix_rank(&p, 0.0) < 3 {
            prop_assert_eq!(v, Verdict::RankDeficientIn);
        }
        assert_factorization(&p)?;
    }

    #[test]
    fn float_backend_agrees_on_clear_cases(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_nonneg(5, 5, 6, 0.3, &mut r);
        let exact = nnrank3_membership(&p).unwrap();
        let float = nnrank3_membership(&p.to_f64()).unwrap();
        if !float.marginal {
            prop_assert_eq!(float.verdict.is_member(), exact.verdict.is_member());
        }
    }

    #[test]
    fn inner_hull_lies_in_outer_polygon(seed in any::<u64>()) {
        let p = random_rank3_product(4, 5, &mut rng(seed));
        let nonzero_cols = (0..5).all(|j| p.col(j).iter().any(|x| !x.is_zero()));
        prop_assume!(nonzero_cols && matrix_rank(&p, 0.0) == 3);
        let polys = nested_polygons(&p).unwrap();
        // Inner hull inside the outer polygon always holds for nonnegative P.
        prop_assert!(polys.inner_within_outer(0.0));
    }
}

#[test]
fn bracket_vanishes_for_concurrent_lines() {
    let a = Matrix::from_i64_rows(&[&[1, 0, -1], &[0, 1, -1], &[1, 1, -2], &[1, 2, 0]]).unwrap();
    assert!(bracket3(&a, 0, 1, 2).unwrap().is_zero());
    assert!(!bracket3(&a, 0, 1, 3).unwrap().is_zero());
    assert!(bracket3(&a, 0, 0, 1).is_err());
}

#[test]
fn rejects_negative_entries() {
    let p = Matrix::from_rows(vec![vec![int(1), int(-1)], vec![int(1), int(1)]]).unwrap();
    assert!(matches!(nnrank3_membership(&p), Err(Error::Domain(_))));
}

#[test]
fn zero_matrix_is_a_member() {
    let p: Matrix<Rational> = Matrix::zeros(3, 4);
    assert!(verdict(&p).is_member());
    let (a, b) = nonneg_rank3_factorize(&p).unwrap();
    assert!(a.matmul(&b).unwrap().data().iter().all(|x| x.is_zero()));
}

#[test]
fn out_verdicts_log_failures() {
    let u10 = Matrix::from_i64_rows(&[&[1, 1, 0, 0], &[1, 0, 1, 0], &[0, 1, 0, 1], &[0, 0, 1, 1]]).unwrap();
    let d = nnrank3_membership(&u10).unwrap();
    assert_eq!(d.verdict, Verdict::Out);
    assert!(d.witness.is_none());
    assert!(!d.failure_log.is_empty());
}
