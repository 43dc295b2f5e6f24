//! A two-parameter affine family of 4x4 matrices whose rank 3 locus is a
//! quartic plane curve `det P(x, y) = 0`.

use crate::error::{Error, Result};
use crate::exactla::{determinant, Matrix};
use crate::poly::{real_roots, Poly};
use crate::scalar::{int, rational, Rational, Scalar};

pub const GREENCURVE_BASE: [[i64; 4]; 4] = [[51, 9, 64, 9], [27, 63, 8, 8], [3, 34, 40, 31], [30, 25, 80, 35]];
pub const GREENCURVE_X: [[i64; 4]; 4] = [[1, 1, 3, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 1]];
pub const GREENCURVE_Y: [[i64; 4]; 4] = [[5, 4, 1, 1], [5, 1, 5, 1], [1, 5, 1, 5], [1, 1, 5, 5]];

pub fn greencurve_matrix<T: Scalar>(x: &T, y: &T) -> Matrix<T> {
    Matrix::from_fn(4, 4, |i, j| {
        T::from_i64(GREENCURVE_BASE[i][j])
            + x.clone() * T::from_i64(GREENCURVE_X[i][j])
            + y.clone() * T::from_i64(GREENCURVE_Y[i][j])
    })
}

pub fn greencurve_base() -> Matrix<Rational> {
    greencurve_matrix(&int(0), &int(0))
}

/// `det P(x0 + s dx, y0 + s dy)` as a polynomial in `s`, recovered exactly
/// by interpolating five determinants.
pub fn greencurve_det_along(origin: (&Rational, &Rational), direction: (&Rational, &Rational)) -> Poly {
    let points: Vec<(Rational, Rational)> = (-2..=2)
        .map(|k| {
            let s = int(k);
            let x = origin.0 + &s * direction.0;
            let y = origin.1 + &s * direction.1;
            let d = determinant(&greencurve_matrix(&x, &y)).expect("square");
            (s, d)
        })
        .collect();
    Poly::interpolate(&points)
}

fn fine() -> Rational {
    rational(1, 1 << 62)
}

/// The point of the curve above `x` whose `y` is closest to `near_y`.
pub fn greencurve_curve_point(x: &Rational, near_y: f64) -> Result<f64> {
    let poly = greencurve_det_along((x, &int(0)), (&int(0), &int(1)));
    real_roots(&poly, &fine())
        .iter()
        .map(|iv| iv.midpoint_f64())
        .min_by(|p, q| (p - near_y).abs().total_cmp(&(q - near_y).abs()))
        .ok_or_else(|| Error::Numeric(format!("the curve has no point above x = {x}")))
}

/// Where the curve leaves the region `P(x, y) >= 0`: the unique curve point
/// on the edge `x + 5y + 8 = 0`, which is where entry `(2, 3)` vanishes.
pub fn greencurve_left_endpoint() -> Result<(f64, f64)> {
    // x = -8 - 5s, y = s
    let poly = greencurve_det_along((&int(-8), &int(0)), (&int(-5), &int(1)));
    let hits: Vec<(f64, f64)> = real_roots(&poly, &fine())
        .iter()
        .map(|iv| {
            let s = iv.midpoint_f64();
            (-8.0 - 5.0 * s, s)
        })
        .filter(|(x, y)| greencurve_matrix(x, y).is_nonnegative(1e-9))
        .collect();
    match hits.as_slice() {
        [one] => Ok(*one),
        _ => Err(Error::Numeric(format!(
            "expected one nonnegative curve point on the edge, found {}",
            hits.len()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn base_is_singular() {
        assert!(determinant(&greencurve_base()).unwrap().is_zero());
        let poly = greencurve_det_along((&int(0), &int(0)), (&int(0), &int(1)));
        assert!(poly.eval(&int(0)).is_zero());
        assert_eq!(poly.degree(), Some(4));
    }

    #[test]
    fn left_endpoint_matches_six_decimals() {
        let (x, y) = greencurve_left_endpoint().unwrap();
        assert!((x + 3.161429).abs() < 1e-4 && (y + 0.967714).abs() < 1e-4);
        assert!((x + 5.0 * y + 8.0).abs() < 1e-12);
    }
}
