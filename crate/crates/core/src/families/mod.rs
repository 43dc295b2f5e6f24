//! Parametric matrix families with known membership and likelihood answers.

mod greencurve;
mod uab_mle;

pub use greencurve::{
    greencurve_base, greencurve_curve_point, greencurve_det_along, greencurve_left_endpoint, greencurve_matrix,
    GREENCURVE_BASE, GREENCURVE_X, GREENCURVE_Y,
};
pub use uab_mle::{uab_closed_form_mle, uab_mle_matrices, UabExact, UabMle};

use num_traits::{One, Zero};

use crate::em::DataMatrix;
use crate::error::{Error, Result};
use crate::exactla::Matrix;
use crate::scalar::{int, Rational};

fn check_uab(a: u64, b: u64) -> Result<()> {
    if b > a || a == 0 {
        return Err(Error::Domain(format!("need a >= b >= 0 and a > 0, got a = {a}, b = {b}")));
    }
    Ok(())
}

/// The 4x4 pattern with `a` on a Latin-square-like support, `b` elsewhere.
pub fn uab_counts(a: u64, b: u64) -> Matrix<Rational> {
    let (a, b) = (int(a as i64), int(b as i64));
    let layout = ["aabb", "abab", "baba", "bbaa"];
    Matrix::from_fn(4, 4, |i, j| {
        if layout[i].as_bytes()[j] == b'a' {
            a.clone()
        } else {
            b.clone()
        }
    })
}

pub fn uab_matrix(a: u64, b: u64) -> Result<DataMatrix> {
    check_uab(a, b)?;
    DataMatrix::from_rational(&uab_counts(a, b))
}

/// Whether `U_{a,b} / (8(a + b))` has nonnegative rank at most 3, which holds
/// iff `b >= (sqrt 2 - 1) a`, tested as `b^2 + 2ab - a^2 >= 0`.
pub fn uab_in_model(a: u64, b: u64) -> Result<bool> {
    check_uab(a, b)?;
    let (a, b) = (a as i128, b as i128);
    Ok(b * b + 2 * a * b - a * a >= 0)
}

fn check_unit(x: &Rational, name: &str) -> Result<()> {
    if x < &Rational::zero() || x > &Rational::one() {
        return Err(Error::Domain(format!("{name} = {x} is outside [0, 1]")));
    }
    Ok(())
}

/// Matrices whose normalized columns span a rectangle inside a fixed square.
pub fn rectangle_family(a: &Rational, b: &Rational) -> Result<Matrix<Rational>> {
    check_unit(a, "a")?;
    check_unit(b, "b")?;
    let one = Rational::one();
    let (pa, ma, pb, mb) = (&one + a, &one - a, &one + b, &one - b);
    Matrix::from_rows(vec![
        vec![ma.clone(), pa.clone(), pa.clone(), ma.clone()],
        vec![mb.clone(), mb.clone(), pb.clone(), pb.clone()],
        vec![pa.clone(), ma.clone(), ma.clone(), pa],
        vec![pb.clone(), pb, mb.clone(), mb],
    ])
}

/// `ab + a + b <= 1`.
pub fn rectangle_in_model(a: &Rational, b: &Rational) -> Result<bool> {
    check_unit(a, "a")?;
    check_unit(b, "b")?;
    Ok(a * b + a + b <= Rational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::matrix_rank;
    use crate::scalar::rational;

    #[test]
    fn uab_examples() {
        let u = uab_matrix(1, 0).unwrap();
        assert_eq!(
            u.counts(),
            &Matrix::from_f64_rows(&[&[1., 1., 0., 0.], &[1., 0., 1., 0.], &[0., 1., 0., 1.], &[0., 0., 1., 1.]])
                .unwrap()
        );
        assert_eq!(matrix_rank(&uab_counts(1, 1), 0.0), 1);
        assert!(uab_matrix(0, 1).is_err());
        assert!(!uab_in_model(100, 41).unwrap());
        assert!(uab_in_model(100, 42).unwrap());
        assert!(!uab_in_model(1, 0).unwrap());
    }

    #[test]
    fn rectangle_examples() {
        let p = rectangle_family(&int(0), &int(0)).unwrap();
        assert_eq!(matrix_rank(&p, 0.0), 1);
        assert!(rectangle_in_model(&rational(1, 4), &rational(1, 4)).unwrap());
        assert!(!rectangle_in_model(&rational(1, 2), &rational(1, 2)).unwrap());
        assert!(rectangle_family(&int(2), &int(0)).is_err());
    }
}
