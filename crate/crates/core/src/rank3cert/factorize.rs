//! Rational nonnegative factorizations from a membership witness.
//!
//! In factor coordinates `x in R^3` the polygon `A` is `{x : A x >= 0}` on
//! the plane `1^T A x = 1`, and the points `b_j` span the inner polygon. A
//! passing witness yields a triangle with apex `v = a_i x a_j` whose two
//! other vertices are the exits of the rays `v -> b_i'` and `v -> b_j'`
//! from the outer polygon. With `T` the matrix of triangle vertices,
//! `P = (A T)(T^-1 B)` and both factors are nonnegative.

use num_traits::{One, Signed, Zero};

use super::{check_nonnegative, factor, nnrank3_membership, scan, strip_zero_lines, Verdict};
use crate::error::{Error, Result};
use crate::exactla::{col3, cross, dot, matrix_rank, row3, solve, Matrix};
use crate::scalar::Rational;

/// Returns nonnegative rational `(A, B)` of sizes `m x 3` and `3 x n` with
/// `A B = P` exactly, or a refusal when `P` has nonnegative rank above 3.
pub fn nonneg_rank3_factorize(p: &Matrix<Rational>) -> Result<(Matrix<Rational>, Matrix<Rational>)> {
    check_nonnegative(p)?;
    let decision = nnrank3_membership(p)?;
    if decision.verdict == Verdict::Out {
        return Err(Error::Refused(format!(
            "matrix has nonnegative rank above 3 (rank {})",
            decision.rank
        )));
    }
    let (m, n) = p.shape();
    let stripped = strip_zero_lines(p);
    let Some(sp) = &stripped.p else {
        return Ok((Matrix::zeros(m, 3), Matrix::zeros(3, n)));
    };
    let (left, right) = match matrix_rank(sp, 0.0) {
        1 => rank_one(sp),
        2 => rank_two(sp),
        _ => rank_three(sp)?,
    };
    let mut a = Matrix::zeros(m, 3);
    for (r, &i) in stripped.rows.iter().enumerate() {
        for k in 0..3 {
            a[(i, k)] = left[(r, k)].clone();
        }
    }
    let mut b = Matrix::zeros(3, n);
    for (c, &j) in stripped.cols.iter().enumerate() {
        for k in 0..3 {
            b[(k, j)] = right[(k, c)].clone();
        }
    }
    debug_assert_eq!(a.matmul(&b).ok().as_ref(), Some(p));
    Ok((a, b))
}

fn rank_one(p: &Matrix<Rational>) -> (Matrix<Rational>, Matrix<Rational>) {
    // no zero columns remain, so every column is a positive multiple of column 0
    let (m, n) = p.shape();
    let i0 = (0..m).find(|&i| !p[(i, 0)].is_zero()).expect("nonzero column");
    let a = Matrix::from_fn(m, 3, |i, k| if k == 0 { p[(i, 0)].clone() } else { Rational::zero() });
    let b = Matrix::from_fn(3, n, |k, j| {
        if k == 0 {
            &p[(i0, j)] / &p[(i0, 0)]
        } else {
            Rational::zero()
        }
    });
    (a, b)
}

/// Normalized columns lie on a segment of the simplex; its two endpoints
/// are columns of `P` and every other column is a convex combination.
fn rank_two(p: &Matrix<Rational>) -> (Matrix<Rational>, Matrix<Rational>) {
    let (m, n) = p.shape();
    let sums: Vec<Rational> = (0..n).map(|j| p.col(j).iter().sum()).collect();
    let q = |j: usize| -> Vec<Rational> { p.col(j).iter().map(|x| x / &sums[j]).collect() };
    let base = q(0);
    let (other, coord) = (1..n)
        .find_map(|j| {
            let qj = q(j);
            (0..m).find(|&i| qj[i] != base[i]).map(|i| (qj, i))
        })
        .expect("rank two input has two distinct normalized columns");
    let t: Vec<Rational> = (0..n)
        .map(|j| (&q(j)[coord] - &base[coord]) / (&other[coord] - &base[coord]))
        .collect();
    let jmin = (0..n).min_by(|&x, &y| t[x].cmp(&t[y])).unwrap();
    let jmax = (0..n).max_by(|&x, &y| t[x].cmp(&t[y])).unwrap();
    let (lo, hi) = (q(jmin), q(jmax));
    let width = &t[jmax] - &t[jmin];
    let a = Matrix::from_fn(m, 3, |i, k| match k {
        0 => lo[i].clone(),
        1 => hi[i].clone(),
        _ => Rational::zero(),
    });
    let b = Matrix::from_fn(3, n, |k, j| match k {
        0 => &sums[j] * (&t[jmax] - &t[j]) / &width,
        1 => &sums[j] * (&t[j] - &t[jmin]) / &width,
        _ => Rational::zero(),
    });
    (a, b)
}

fn rank_three(p: &Matrix<Rational>) -> Result<(Matrix<Rational>, Matrix<Rational>)> {
    let f = factor(p)?;
    if let Some(found) = triangle_from_witnesses(&f.a, &f.b)? {
        return Ok(found);
    }
    let (bt, at) = (f.b.transpose(), f.a.transpose());
    if let Some((l, r)) = triangle_from_witnesses(&bt, &at)? {
        return Ok((r.transpose(), l.transpose()));
    }
    Err(Error::Numeric(
        "membership holds but no witness triangle gave a nonnegative factorization".into(),
    ))
}

/// Tries the triangle of every passing witness of `(a, b)` in search order.
fn triangle_from_witnesses(
    a: &Matrix<Rational>,
    b: &Matrix<Rational>,
) -> Result<Option<(Matrix<Rational>, Matrix<Rational>)>> {
    let c: [Rational; 3] = std::array::from_fn(|k| a.col(k).iter().sum());
    for w in scan(a, b, true).passes {
        let Some(t) = witness_triangle(a, b, &c, w.i, w.j, w.ip, w.jp) else {
            continue;
        };
        let Ok(right) = solve(&t, b, 0.0) else {
            continue;
        };
        let left = a.matmul(&t)?;
        if left.is_nonnegative(0.0) && right.is_nonnegative(0.0) {
            return Ok(Some((left, right)));
        }
    }
    Ok(None)
}

/// Columns are the triangle vertices: the apex and the two exit points,
/// each scaled to the plane `c . x = 1`.
fn witness_triangle(
    a: &Matrix<Rational>,
    b: &Matrix<Rational>,
    c: &[Rational; 3],
    i: usize,
    j: usize,
    ip: usize,
    jp: usize,
) -> Option<Matrix<Rational>> {
    let mut v = cross(&row3(a, i), &row3(a, j));
    if (0..a.nrows()).any(|k| dot(&row3(a, k), &v).is_negative()) {
        v = v.map(|x| -x);
    }
    let v = normalize(&v, c)?;
    let q1 = exit_point(a, &v, &normalize(&col3(b, ip), c)?)?;
    let q2 = exit_point(a, &v, &normalize(&col3(b, jp), c)?)?;
    let t = Matrix::from_fn(3, 3, |r, k| [&v, &q1, &q2][k][r].clone());
    (crate::exactla::determinant(&t).ok()? != Rational::zero()).then_some(t)
}

fn normalize(x: &[Rational; 3], c: &[Rational; 3]) -> Option<[Rational; 3]> {
    let s = dot(x, c);
    (s.is_positive()).then(|| std::array::from_fn(|k| &x[k] / &s))
}

/// Last point of the ray from `v` through `b` that stays in `{A x >= 0}`.
fn exit_point(a: &Matrix<Rational>, v: &[Rational; 3], b: &[Rational; 3]) -> Option<[Rational; 3]> {
    let mut t_max: Option<Rational> = None;
    for k in 0..a.nrows() {
        let ak = row3(a, k);
        let (av, ab) = (dot(&ak, v), dot(&ak, b));
        if ab < av {
            let t = &av / (&av - &ab);
            if t_max.as_ref().is_none_or(|cur| t < *cur) {
                t_max = Some(t);
            }
        }
    }
    let t = t_max?;
    let s = Rational::one() - &t;
    Some(std::array::from_fn(|k| &s * &v[k] + &t * &b[k]))
}
