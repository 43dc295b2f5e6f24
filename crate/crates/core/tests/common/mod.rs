#![allow(dead_code)]

use mixbound::em::ParameterTriple;
use mixbound::scalar::{int, rational};
use mixbound::{Matrix, Rational};
use num_traits::Zero;
use rand::Rng;

/// Nonnegative rational matrix with entries `p/q`, `p` in `0..=max`,
/// `q` in `1..=max`. `zero_prob` controls how often an entry is zero.
pub fn random_nonneg<R: Rng>(rows: usize, cols: usize, max: i64, zero_prob: f64, rng: &mut R) -> Matrix<Rational> {
    Matrix::from_fn(rows, cols, |_, _| {
        if rng.random_bool(zero_prob) {
            Rational::zero()
        } else {
            rational(rng.random_range(1..=max), rng.random_range(1..=max))
        }
    })
}

/// Product of random nonnegative `m x 3` and `3 x n` factors.
pub fn random_rank3_product<R: Rng>(m: usize, n: usize, rng: &mut R) -> Matrix<Rational> {
    let a = random_nonneg(m, 3, 9, 0.15, rng);
    let b = random_nonneg(3, n, 9, 0.15, rng);
    a.matmul(&b).unwrap()
}

pub fn int_matrix(rows: &[&[i64]]) -> Matrix<Rational> {
    Matrix::from_i64_rows(rows).unwrap()
}

pub fn scale(m: &Matrix<Rational>, c: &Rational) -> Matrix<Rational> {
    m.map(|x| x * c)
}

pub fn normalized(m: &Matrix<Rational>) -> Matrix<Rational> {
    let total = m.sum();
    m.map(|x| x / &total)
}

pub fn permute(m: &Matrix<Rational>, rows: &[usize], cols: &[usize]) -> Matrix<Rational> {
    m.select_rows(rows).select_cols(cols)
}

pub fn shuffled<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    v
}

/// Positive diagonal rescaling of rows and columns.
pub fn rescale_lines<R: Rng>(m: &Matrix<Rational>, rng: &mut R) -> Matrix<Rational> {
    let dr: Vec<Rational> = (0..m.nrows()).map(|_| int(rng.random_range(1..=7))).collect();
    let dc: Vec<Rational> = (0..m.ncols()).map(|_| rational(1, rng.random_range(1..=7))).collect();
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| &m[(i, j)] * &dr[i] * &dc[j])
}

/// Mixture parameters for `P = A B` with nonnegative factors, normalized so
/// that `A` is column stochastic and `B` row stochastic.
pub fn triple_from_factors(a: &Matrix<f64>, b: &Matrix<f64>) -> ParameterTriple {
    let r = a.ncols();
    let mut lambda = vec![0.0; r];
    let mut na = a.clone();
    let mut nb = b.clone();
    for k in 0..r {
        let ca: f64 = a.col(k).iter().sum();
        let rb: f64 = b.row(k).iter().sum();
        lambda[k] = ca * rb;
        for i in 0..a.nrows() {
            na[(i, k)] = if ca > 0.0 { a[(i, k)] / ca } else { 1.0 / a.nrows() as f64 };
        }
        for j in 0..b.ncols() {
            nb[(k, j)] = if rb > 0.0 { b[(k, j)] / rb } else { 1.0 / b.ncols() as f64 };
        }
    }
    ParameterTriple::new(na, lambda, nb).unwrap()
}

pub fn max_abs_diff(x: &Matrix<f64>, y: &Matrix<f64>) -> f64 {
    x.data().iter().zip(y.data()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}
