use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Default relative rank tolerance for the float backend.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Backend-specific rank and determinant routines.
///
/// The exact backend clears denominators row by row and runs fraction-free
/// (Bareiss) elimination over the integers. The float backend uses singular
/// values for rank and LU for determinants.
pub trait Field: Scalar {
    /// `tol` is relative to the largest singular value; ignored when exact.
    fn rank_of(m: &Matrix<Self>, tol: f64) -> usize;

    fn det_of(m: &Matrix<Self>) -> Self;
}

impl Field for Rational {
    fn rank_of(m: &Matrix<Self>, _tol: f64) -> usize {
        let (mut rows, _) = integer_rows(m);
        bareiss(&mut rows, m.ncols()).rank
    }

    fn det_of(m: &Matrix<Self>) -> Self {
        let (mut rows, multipliers) = integer_rows(m);
        let n = m.nrows();
        let out = bareiss(&mut rows, n);
        if out.rank < n {
            return Rational::zero();
        }
        let mut d = rows[n - 1][n - 1].clone();
        if out.swaps % 2 == 1 {
            d = -d;
        }
        let scale = multipliers.iter().fold(BigInt::one(), |acc, x| acc * x);
        Rational::new(d, scale)
    }
}

impl Field for f64 {
    fn rank_of(m: &Matrix<Self>, tol: f64) -> usize {
        let dm = DMatrix::from_row_slice(m.nrows(), m.ncols(), m.data());
        let sv = dm.singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > tol * max).count()
    }

    fn det_of(m: &Matrix<Self>) -> Self {
        DMatrix::from_row_slice(m.nrows(), m.ncols(), m.data()).determinant()
    }
}

/// Scales each row by the lcm of its denominators.
fn integer_rows(m: &Matrix<Rational>) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    let mut rows = Vec::with_capacity(m.nrows());
    let mut multipliers = Vec::with_capacity(m.nrows());
    for r in m.rows_iter() {
        let l = r
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        rows.push(
            r.iter()
                .map(|x| x.numer() * (&l / x.denom()))
                .collect::<Vec<_>>(),
        );
        multipliers.push(l);
    }
    (rows, multipliers)
}

struct BareissOutcome {
    rank: usize,
    swaps: usize,
}

/// Fraction-free row echelon reduction in place. Every division is exact.
fn bareiss(a: &mut [Vec<BigInt>], ncols: usize) -> BareissOutcome {
    let m = a.len();
    let mut prev = BigInt::one();
    let mut r = 0;
    let mut swaps = 0;
    for c in 0..ncols {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        if p != r {
            a.swap(p, r);
            swaps += 1;
        }
        let (top, rest) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest.iter_mut() {
            let factor = row[c].clone();
            for j in c + 1..ncols {
                let v = &pivot_row[c] * &row[j] - &factor * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    BareissOutcome { rank: r, swaps }
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Debug, Clone)]
pub struct Rref<T> {
    pub reduced: Matrix<T>,
    pub pivots: Vec<usize>,
}

/// Gauss-Jordan reduction. Columns are scanned left to right; the exact
/// backend takes the first nonzero entry as pivot, the float backend the
/// largest in absolute value. Float entries below `tol * max|m|` are zero.
pub fn rref<T: Scalar>(m: &Matrix<T>, tol: f64) -> Rref<T> {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let abs_tol = tol * m.max_abs_f64();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let candidate = if T::is_exact() {
            (r..rows).find(|&i| !a[(i, c)].is_zero())
        } else {
            (r..rows)
                .filter(|&i| !a[(i, c)].is_negligible(abs_tol))
                .max_by(|&i, &j| {
                    a[(i, c)]
                        .magnitude()
                        .partial_cmp(&a[(j, c)].magnitude())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
        };
        let Some(p) = candidate else {
            continue;
        };
        a.swap_rows(p, r);
        let inv = T::one() / a[(r, c)].clone();
        for j in 0..cols {
            a[(r, j)] = a[(r, j)].clone() * inv.clone();
        }
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in 0..cols {
                let v = a[(i, j)].clone() - f.clone() * a[(r, j)].clone();
                a[(i, j)] = v;
            }
            if !T::is_exact() {
                a[(i, c)] = T::zero();
            }
        }
        pivots.push(c);
        r += 1;
    }
    Rref { reduced: a, pivots }
}

/// Linear-algebra rank. Exact on rationals; on floats singular values below
/// `tol * max_sv` count as zero.
pub fn matrix_rank<T: Field>(m: &Matrix<T>, tol: f64) -> usize {
    T::rank_of(m, tol)
}

pub fn determinant<T: Field>(m: &Matrix<T>) -> Result<T> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "determinant of non-square {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(T::det_of(m))
}

/// Factors `p = a * b` with `a` of size `m x r` and `b` of size `r x n`.
///
/// `a` holds the pivot columns of `p` and `b` the nonzero rows of its RREF,
/// padded with zero columns/rows when `rank(p) < r`.
pub fn rank_factorize<T: Scalar>(
    p: &Matrix<T>,
    r: usize,
    tol: f64,
) -> Result<(Matrix<T>, Matrix<T>)> {
    if r == 0 {
        return Err(Error::Dimension("factorization size must be positive".into()));
    }
    let Rref { reduced, pivots } = rref(p, tol);
    let rank = pivots.len();
    if rank > r {
        return Err(Error::RankExcess { rank, max: r });
    }
    let (m, n) = p.shape();
    let a = Matrix::from_fn(m, r, |i, k| {
        if k < rank {
            p[(i, pivots[k])].clone()
        } else {
            T::zero()
        }
    });
    let b = Matrix::from_fn(r, n, |k, j| {
        if k < rank {
            reduced[(k, j)].clone()
        } else {
            T::zero()
        }
    });
    Ok((a, b))
}

/// Solves `a * x = b` for square nonsingular `a`.
pub fn solve<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, tol: f64) -> Result<Matrix<T>> {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n {
        return Err(Error::Dimension("solve: incompatible shapes".into()));
    }
    let k = b.ncols();
    let aug = Matrix::from_fn(n, n + k, |i, j| {
        if j < n {
            a[(i, j)].clone()
        } else {
            b[(i, j - n)].clone()
        }
    });
    let Rref { reduced, pivots } = rref(&aug, tol);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return Err(Error::Numeric("solve: singular coefficient matrix".into()));
    }
    Ok(Matrix::from_fn(n, k, |i, j| reduced[(i, n + j)].clone()))
}

/// Basis of the right null space `{x : m x = 0}`, one vector per free column.
pub fn null_space<T: Scalar>(m: &Matrix<T>, tol: f64) -> Vec<Vec<T>> {
    let Rref { reduced, pivots } = rref(m, tol);
    let n = m.ncols();
    (0..n)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![T::zero(); n];
            v[free] = T::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -reduced[(row, free)].clone();
            }
            v
        })
        .collect()
}

/// Rank of the exact matrix, computed through the rational RREF. Exposed as
/// an independent route for cross-checking the fraction-free path.
pub fn rref_rank<T: Scalar>(m: &Matrix<T>, tol: f64) -> usize {
    rref(m, tol).pivots.len()
}

/// `sign(det)` helper for 3x3 blocks that avoids allocating a matrix.
pub fn det3<T: Scalar>(r0: &[T; 3], r1: &[T; 3], r2: &[T; 3]) -> T {
    let c = super::cross(r1, r2);
    super::dot(r0, &c)
}
