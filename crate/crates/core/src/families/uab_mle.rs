//! Closed-form maximum likelihood estimates for `U_{a,b}` outside the model.
//!
//! The eight maximizers share one parameter `t`, the simple real root of a
//! cubic with integer coefficients in `a, b`. The other entries are rational
//! functions of `t`.

use num_traits::{Signed, Zero};

use super::{check_uab, uab_in_model};
use crate::error::{Error, Result};
use crate::exactla::Matrix;
use crate::poly::{simple_real_roots, Poly, RootInterval};
use crate::scalar::{int, rational, Rational, Scalar};

/// The eight layouts, one string per row, over the symbols
/// `a b s t u v w r`.
const LAYOUTS: [[&str; 4]; 8] = [
    ["aabb", "vwtu", "wvut", "ssrr"],
    ["vtwu", "abab", "srsr", "wuvt"],
    ["tvuw", "rsrs", "baba", "uwtv"],
    ["rrss", "tuvw", "utwv", "bbaa"],
    ["avws", "awvs", "btur", "butr"],
    ["vasw", "tbru", "wasv", "ubrt"],
    ["trbu", "vsaw", "urbt", "wsav"],
    ["rtub", "rutb", "svwa", "swva"],
];

/// Rational values of all parameters, available when `t` is rational.
#[derive(Debug, Clone, PartialEq)]
pub struct UabExact {
    pub t: Rational,
    pub s: Rational,
    pub u: Rational,
    pub v: Rational,
    pub w: Rational,
    pub r: Rational,
    /// The eight estimates, each divided by `8(a + b)`.
    pub matrices: Vec<Matrix<Rational>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UabMle {
    pub a: u64,
    pub b: u64,
    pub cubic: Poly,
    /// Isolating interval of `t`, degenerate when `t` is rational.
    pub t_interval: RootInterval,
    pub t: f64,
    /// `|cubic(t)|` after dividing the cubic by `a^6` and substituting
    /// `t = a tau`, so that the coefficients are of order one.
    pub t_residual: f64,
    pub s: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub r: f64,
    /// The eight estimates, each divided by `8(a + b)`.
    pub matrices: Vec<Matrix<f64>>,
    pub exact: Option<UabExact>,
}

fn cubic(a: i64, b: i64) -> Poly {
    let (a2, a3, a4, a5, a6) = (a * a, a * a * a, a.pow(4), a.pow(5), a.pow(6));
    let (b2, b3) = (b * b, b * b * b);
    Poly::from_desc_i64(&[
        6 * a3 + 16 * a2 * b + 14 * a * b2 + 4 * b3,
        -(20 * a4 + 44 * a3 * b + 8 * a * b3 + 32 * a2 * b2),
        22 * a5 + 43 * a4 * b + 30 * a3 * b2 + 7 * a2 * b3,
        -(8 * a6 + 16 * a5 * b + 10 * a4 * b2 + 2 * a3 * b3),
    ])
}

/// `(s, u, w, r, v)` as functions of `t`.
fn entries<T: Scalar>(a: i64, b: i64, t: &T) -> [T; 5] {
    let c = |x: i64| T::from_i64(x);
    let (a2, a3) = (a * a, a * a * a);
    let den = c(2 * a3 + a2 * b);
    let q = c(3 * a2 + 5 * a * b + 2 * b * b);
    let s = (c(a + b) * t.clone() - c(a2)) / c(a);
    let u = t.clone() * c(b) / c(a);
    let w = -(t.clone() * (q.clone() * t.clone() - c(4 * a3 + 5 * a2 * b + 2 * a * b * b))) / den.clone();
    let r = (c(2 * a2 + a * b) - c(a + b) * t.clone()) / c(a);
    let v = (q * t.clone() * t.clone() - c(6 * a3 + 8 * a2 * b + 3 * a * b * b) * t.clone()
        + c(6 * a3 * b + 2 * a2 * b * b + 4 * a2 * a2))
        / den;
    [s, u, w, r, v]
}

/// Fills the eight layouts, scaling every entry by `scale`.
pub fn uab_mle_matrices<T: Scalar>(values: [&T; 8], scale: &T) -> Vec<Matrix<T>> {
    let [a, b, s, t, u, v, w, r] = values;
    LAYOUTS
        .iter()
        .map(|rows| {
            Matrix::from_fn(4, 4, |i, j| {
                let x = match rows[i].as_bytes()[j] {
                    b'a' => a,
                    b'b' => b,
                    b's' => s,
                    b't' => t,
                    b'u' => u,
                    b'v' => v,
                    b'w' => w,
                    _ => r,
                };
                x.clone() * scale.clone()
            })
        })
        .collect()
}

/// Solves for the eight global maximizers of the likelihood of `U_{a,b}`
/// when `a > b` and `U_{a,b}` lies outside the model.
pub fn uab_closed_form_mle(a: u64, b: u64) -> Result<UabMle> {
    check_uab(a, b)?;
    if a == b || uab_in_model(a, b)? {
        return Err(Error::Domain(format!(
            "closed form needs b < (sqrt 2 - 1) a, got a = {a}, b = {b}"
        )));
    }
    let (ai, bi) = (i64::try_from(a), i64::try_from(b));
    let (ai, bi) = match (ai, bi) {
        (Ok(x), Ok(y)) if x <= 1000 => (x, y),
        _ => return Err(Error::Domain("closed form supports a <= 1000".into())),
    };
    let p = cubic(ai, bi);
    let width = rational(1, 1 << 60) * int(ai);
    let roots = simple_real_roots(&p, &width);
    if roots.len() != 1 {
        return Err(Error::AmbiguousRoot {
            roots: roots.iter().map(RootInterval::midpoint_f64).collect(),
        });
    }
    let t_interval = roots.into_iter().next().unwrap();
    let t = t_interval.midpoint_f64();

    // scaled residual: cubic(a tau) / a^6 at tau = t / a
    let tau = Rational::from_float(t / a as f64).unwrap_or_else(Rational::zero);
    let a6 = int(ai).pow(6);
    let t_residual = (p.eval(&(tau * int(ai))) / a6).abs().to_f64();

    let [s, u, w, r, v] = entries(ai, bi, &t);
    let scale = 1.0 / (8.0 * (a + b) as f64);
    let (af, bf) = (a as f64, b as f64);
    let matrices = uab_mle_matrices([&af, &bf, &s, &t, &u, &v, &w, &r], &scale);

    let exact = t_interval.exact().map(|te| {
        let [s, u, w, r, v] = entries(ai, bi, te);
        let scale = rational(1, 8 * (ai + bi));
        let matrices = uab_mle_matrices([&int(ai), &int(bi), &s, te, &u, &v, &w, &r], &scale);
        UabExact {
            t: te.clone(),
            s,
            u,
            v,
            w,
            r,
            matrices,
        }
    });
    Ok(UabMle {
        a,
        b,
        cubic: p,
        t_interval,
        t,
        t_residual,
        s,
        u,
        v,
        w,
        r,
        matrices,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_at_one_zero_has_a_double_root() {
        assert_eq!(cubic(1, 0), Poly::from_desc_i64(&[6, -20, 22, -8]));
    }

    #[test]
    fn anchor_values() {
        let mle = uab_closed_form_mle(1, 0).unwrap();
        let ex = mle.exact.as_ref().unwrap();
        assert_eq!(ex.t, rational(4, 3));
        assert_eq!((&ex.s, &ex.r, &ex.v), (&rational(1, 3), &rational(2, 3), &rational(2, 3)));
        assert!(ex.w.is_zero() && ex.u.is_zero());
        let p1 = Matrix::from_i64_rows(&[&[3, 3, 0, 0], &[2, 0, 4, 0], &[0, 2, 0, 4], &[1, 1, 2, 2]])
            .unwrap()
            .scale(&rational(1, 24));
        assert_eq!(ex.matrices[0], p1);
        assert!(mle.t_residual < 1e-12);
    }

    #[test]
    fn irrational_roots_are_polished() {
        let mle = uab_closed_form_mle(100, 41).unwrap();
        assert!(mle.exact.is_none());
        assert!(mle.t_residual < 1e-12);
        for m in &mle.matrices {
            assert!((m.sum() - 1.0).abs() < 1e-12, "{}", m.sum() - 1.0);
            assert!(m.is_nonnegative(0.0));
        }
    }

    #[test]
    fn refuses_points_in_the_model() {
        assert!(uab_closed_form_mle(100, 42).is_err());
        assert!(uab_closed_form_mle(3, 3).is_err());
    }
}
