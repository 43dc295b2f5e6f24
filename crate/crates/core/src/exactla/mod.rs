//! Dense linear algebra over the exact rational and the float backend.

mod elimination;
mod matrix;
pub mod text;

pub use elimination::{
    det3, determinant, matrix_rank, null_space, rank_factorize, rref, rref_rank, solve, Field,
    Rref, DEFAULT_RANK_TOL,
};
pub use matrix::Matrix;

use crate::scalar::Scalar;

/// Cross product in R^3. In the projective plane this is both the line
/// through two points and the intersection point of two lines.
pub fn cross<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1].clone() * b[2].clone() - a[2].clone() * b[1].clone(),
        a[2].clone() * b[0].clone() - a[0].clone() * b[2].clone(),
        a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone(),
    ]
}

pub fn dot<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0].clone() * b[0].clone() + a[1].clone() * b[1].clone() + a[2].clone() * b[2].clone()
}

pub fn is_zero3<T: Scalar>(v: &[T; 3]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// Row `i` of an `m x 3` matrix as a fixed-size vector.
pub fn row3<T: Scalar>(m: &Matrix<T>, i: usize) -> [T; 3] {
    [m[(i, 0)].clone(), m[(i, 1)].clone(), m[(i, 2)].clone()]
}

/// Column `j` of a `3 x n` matrix as a fixed-size vector.
pub fn col3<T: Scalar>(m: &Matrix<T>, j: usize) -> [T; 3] {
    [m[(0, j)].clone(), m[(1, j)].clone(), m[(2, j)].clone()]
}
