//! Bracket polynomials in the projective plane.
//!
//! Rows `a_i` of an `m x 3` matrix are read as lines and columns `b_j` of a
//! `3 x n` matrix as points. Meets and joins of two elements are both cross
//! products, and a join of three points (or meet of three lines) is a 3x3
//! determinant.

use crate::error::{Error, Result};
use crate::exactla::{col3, cross, det3, dot, row3, Matrix};
use crate::scalar::Scalar;

fn check_factors<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<()> {
    if a.ncols() != 3 || b.nrows() != 3 {
        return Err(Error::Dimension(format!(
            "expected m x 3 and 3 x n factors, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

fn check_index(idx: usize, len: usize, what: &str) -> Result<()> {
    if idx >= len {
        return Err(Error::Index(format!("{what} index {idx} out of range 0..{len}")));
    }
    Ok(())
}

/// `[a_i a_j a_k]`, zero iff the three lines are concurrent.
pub fn bracket3<T: Scalar>(a: &Matrix<T>, i: usize, j: usize, k: usize) -> Result<T> {
    if a.ncols() != 3 {
        return Err(Error::Dimension("bracket3 needs an m x 3 matrix".into()));
    }
    for idx in [i, j, k] {
        check_index(idx, a.nrows(), "row")?;
    }
    if i == j || j == k || i == k {
        return Err(Error::Index(format!("bracket3 indices must be distinct, got ({i}, {j}, {k})")));
    }
    Ok(det3(&row3(a, i), &row3(a, j), &row3(a, k)))
}

/// `(a_i ^ a_j) v b_i' v b_k'`: zero iff the meet of lines `a_i`, `a_j`
/// lies on the line through points `b_i'` and `b_k'`.
pub fn meet_join<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    i: usize,
    j: usize,
    ip: usize,
    kp: usize,
) -> Result<T> {
    check_factors(a, b)?;
    for idx in [i, j] {
        check_index(idx, a.nrows(), "row")?;
    }
    for idx in [ip, kp] {
        check_index(idx, b.ncols(), "column")?;
    }
    let v = cross(&row3(a, i), &row3(a, j));
    Ok(det3(&v, &col3(b, ip), &col3(b, kp)))
}

/// The degree (6, 3) bracket
/// `(((a_i ^ a_j) v b_i') ^ a_k) v (((a_i ^ a_j) v b_j') ^ a_l) v b_k'`.
///
/// Let `v` be the meet of `a_i` and `a_j`. The value vanishes iff `b_k'`
/// lies on the line through the points where `a_k` crosses line `v b_i'`
/// and `a_l` crosses line `v b_j'`.
#[allow(clippy::too_many_arguments)]
pub fn six_three<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    ip: usize,
    jp: usize,
    kp: usize,
) -> Result<T> {
    check_factors(a, b)?;
    for idx in [i, j, k, l] {
        check_index(idx, a.nrows(), "row")?;
    }
    for idx in [ip, jp, kp] {
        check_index(idx, b.ncols(), "column")?;
    }
    let v = cross(&row3(a, i), &row3(a, j));
    let l1 = cross(&v, &col3(b, ip));
    let l2 = cross(&v, &col3(b, jp));
    Ok(six_three_from_lines(&l1, &l2, &row3(a, k), &row3(a, l), &col3(b, kp)))
}

/// Final stage of [`six_three`] once the two lines through the apex are known.
pub(crate) fn six_three_from_lines<T: Scalar>(
    l1: &[T; 3],
    l2: &[T; 3],
    ak: &[T; 3],
    al: &[T; 3],
    bkp: &[T; 3],
) -> T {
    det3(&cross(l1, ak), &cross(l2, al), bkp)
}

/// `[v b_p b_q] = <v x b_p, b_q>`, with `line = v x b_p` precomputed.
pub(crate) fn side<T: Scalar>(line: &[T; 3], point: &[T; 3]) -> T {
    dot(line, point)
}
