//! Likelihood gradient, EM fixed-point equations and the duality test for
//! critical points.

use serde::{Deserialize, Serialize};

use super::{DataMatrix, ParameterTriple};
use crate::error::{Error, Result};
use crate::exactla::{matrix_rank, Matrix, DEFAULT_RANK_TOL};

/// `R` with `r_ij = u_++ - u_ij / p_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMatrix(pub Matrix<f64>);

impl GradientMatrix {
    pub fn matrix(&self) -> &Matrix<f64> {
        &self.0
    }
}

/// Cells with `u_ij = 0` get `r_ij = u_++` whatever `p_ij` is; an observed
/// cell with `p_ij = 0` is an error.
pub fn gradient_matrix(u: &DataMatrix, p: &Matrix<f64>) -> Result<GradientMatrix> {
    if p.shape() != u.shape() {
        return Err(Error::Dimension("gradient: P and U differ in shape".into()));
    }
    let total = u.total();
    let mut data = Vec::with_capacity(p.data().len());
    for (idx, (&c, &q)) in u.counts().data().iter().zip(p.data()).enumerate() {
        if c == 0.0 {
            data.push(total);
        } else if q > 0.0 {
            data.push(total - c / q);
        } else {
            let n = p.ncols();
            return Err(Error::Numeric(format!(
                "p[{}][{}] = 0 at an observed cell",
                idx / n,
                idx % n
            )));
        }
    }
    Ok(GradientMatrix(Matrix::new(p.nrows(), p.ncols(), data)?))
}

fn max_abs(m: &Matrix<f64>) -> f64 {
    m.max_abs_f64()
}

/// `(max|A * (R B^T)|, max|B * (A^T R)|)` with `*` the entrywise product.
/// Both vanish exactly at EM fixed points.
pub fn fixed_point_residual(theta: &ParameterTriple, grad: &GradientMatrix) -> Result<(f64, f64)> {
    let r = grad.matrix();
    let rbt = r.matmul(&theta.b.transpose())?;
    let atr = theta.a.transpose().matmul(r)?;
    Ok((
        max_abs(&theta.a.hadamard(&rbt)?),
        max_abs(&theta.b.hadamard(&atr)?),
    ))
}

/// Outcome of the duality test. Residuals are normalized by
/// `u_++ * max p_ij`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criticality {
    pub critical: bool,
    pub pt_r: f64,
    pub r_pt: f64,
    pub rel_tol: f64,
    pub rank_p: usize,
}

impl Criticality {
    pub fn residual(&self) -> f64 {
        self.pt_r.max(self.r_pt)
    }
}

/// `P` is critical for the likelihood on the rank variety iff `P^T R = 0`
/// and `R P^T = 0`. Both products are compared against
/// `rel_tol * u_++ * max p_ij`.
pub fn is_critical(u: &DataMatrix, p: &Matrix<f64>, rel_tol: f64) -> Result<Criticality> {
    let rank_p = matrix_rank(p, DEFAULT_RANK_TOL);
    let grad = match gradient_matrix(u, p) {
        Ok(g) => g,
        Err(Error::Numeric(_)) => {
            return Ok(Criticality {
                critical: false,
                pt_r: f64::INFINITY,
                r_pt: f64::INFINITY,
                rel_tol,
                rank_p,
            })
        }
        Err(e) => return Err(e),
    };
    let r = grad.matrix();
    let scale = u.total() * p.max_abs_f64();
    let pt_r = max_abs(&p.transpose().matmul(r)?) / scale;
    let r_pt = max_abs(&r.matmul(&p.transpose())?) / scale;
    Ok(Criticality {
        critical: pt_r < rel_tol && r_pt < rel_tol,
        pt_r,
        r_pt,
        rel_tol,
        rank_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::DEFAULT_CRIT_TOL;

    fn u10() -> DataMatrix {
        DataMatrix::from_rows(&[&[1, 1, 0, 0], &[1, 0, 1, 0], &[0, 1, 0, 1], &[0, 0, 1, 1]]).unwrap()
    }

    fn p1() -> Matrix<f64> {
        Matrix::from_fn(4, 4, |i, j| {
            [[3., 3., 0., 0.], [2., 0., 4., 0.], [0., 2., 0., 4.], [1., 1., 2., 2.]][i][j] / 24.0
        })
    }

    /// A nonnegative factorization of `P1` with the weights pulled out.
    fn p1_params() -> ParameterTriple {
        let a = Matrix::from_f64_rows(&[
            &[3.0, 0.0, 0.0],
            &[0.0, 2.0, 0.0],
            &[0.0, 0.0, 2.0],
            &[0.0, 1.0, 1.0],
        ])
        .unwrap();
        let b = Matrix::from_f64_rows(&[
            &[1.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 2.0, 0.0],
            &[0.0, 1.0, 0.0, 2.0],
        ])
        .unwrap();
        stochastic_form(&a, &b, 24.0)
    }

    fn stochastic_form(a: &Matrix<f64>, b: &Matrix<f64>, scale: f64) -> ParameterTriple {
        let r = a.ncols();
        let mut na = a.clone();
        let mut nb = b.clone();
        let mut lambda = vec![0.0; r];
        for k in 0..r {
            let ca: f64 = a.col(k).iter().sum();
            let rb: f64 = b.row(k).iter().sum();
            lambda[k] = ca * rb / scale;
            for i in 0..a.nrows() {
                na[(i, k)] /= ca;
            }
            nb.row_mut(k).iter_mut().for_each(|x| *x /= rb);
        }
        ParameterTriple::new(na, lambda, nb).unwrap()
    }

    #[test]
    fn saturated_fit_has_zero_gradient() {
        let u = DataMatrix::from_rows(&[&[1, 2], &[3, 4]]).unwrap();
        let g = gradient_matrix(&u, &u.empirical()).unwrap();
        assert!(g.matrix().max_abs_f64() < 1e-12);
        let c = is_critical(&u, &u.empirical(), DEFAULT_CRIT_TOL).unwrap();
        assert!(c.critical);
    }

    #[test]
    fn p1_is_a_fixed_point_but_not_critical() {
        let u = u10();
        let theta = p1_params();
        let p = theta.product();
        for (x, y) in p.data().iter().zip(p1().data()) {
            assert!((x - y).abs() < 1e-15);
        }
        let g = gradient_matrix(&u, &p).unwrap();
        let (ra, rb) = fixed_point_residual(&theta, &g).unwrap();
        assert!(ra < 1e-10 && rb < 1e-10, "{ra} {rb}");
        let c = is_critical(&u, &p, DEFAULT_CRIT_TOL).unwrap();
        assert!(!c.critical);
        assert_eq!(c.rank_p, 3);
    }

    #[test]
    fn observed_cell_with_zero_probability_is_rejected() {
        let u = u10();
        let p = Matrix::from_fn(4, 4, |i, _| if i == 0 { 0.0 } else { 1.0 / 12.0 });
        assert!(gradient_matrix(&u, &p).is_err());
        assert!(!is_critical(&u, &p, 1e-6).unwrap().critical);
    }
}
