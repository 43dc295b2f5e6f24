//! EM for the two-variable mixture model `P = A diag(lambda) B`.
//!
//! `A` is column stochastic (`m x r`), `lambda` a probability vector and `B`
//! row stochastic (`r x n`). The data is a nonnegative integer count table.

mod critical;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

pub use critical::{fixed_point_residual, gradient_matrix, is_critical, Criticality, GradientMatrix};

use crate::error::{Error, Result};
use crate::exactla::Matrix;
use crate::par::{map_indexed, stream_seed, Execution};
use crate::scalar::Rational;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 2000;
pub const DEFAULT_CRIT_TOL: f64 = 1e-6;

/// Observed count table `U` with its total `u_++`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    counts: Matrix<f64>,
    total: f64,
}

impl DataMatrix {
    /// Entries must be nonnegative integers (stored as floats) with a
    /// positive total.
    pub fn new(counts: Matrix<f64>) -> Result<Self> {
        if let Some(bad) = counts
            .data()
            .iter()
            .find(|x| !x.is_finite() || **x < 0.0 || x.fract() != 0.0)
        {
            return Err(Error::Domain(format!(
                "counts must be nonnegative integers, found {bad}"
            )));
        }
        let total = counts.sum();
        if total <= 0.0 {
            return Err(Error::Domain("count table has zero total".into()));
        }
        Ok(DataMatrix { counts, total })
    }

    pub fn from_rows(rows: &[&[u64]]) -> Result<Self> {
        Self::new(Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| x as f64).collect())
                .collect(),
        )?)
    }

    pub fn from_rational(m: &Matrix<Rational>) -> Result<Self> {
        if m.data().iter().any(|x| !x.is_integer()) {
            return Err(Error::Domain("counts must be integers".into()));
        }
        Self::new(m.to_f64())
    }

    pub fn counts(&self) -> &Matrix<f64> {
        &self.counts
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn shape(&self) -> (usize, usize) {
        self.counts.shape()
    }

    /// `U / u_++`, the saturated-model estimate.
    pub fn empirical(&self) -> Matrix<f64> {
        self.counts.scale(&(1.0 / self.total))
    }
}

/// Mixture parameters `(A, lambda, B)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterTriple {
    #[serde(with = "matrix_serde")]
    pub a: Matrix<f64>,
    pub lambda: Vec<f64>,
    #[serde(with = "matrix_serde")]
    pub b: Matrix<f64>,
}

impl ParameterTriple {
    pub fn new(a: Matrix<f64>, lambda: Vec<f64>, b: Matrix<f64>) -> Result<Self> {
        let r = lambda.len();
        if a.ncols() != r || b.nrows() != r {
            return Err(Error::Dimension(format!(
                "A is {}x{}, lambda has {r} entries, B is {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(ParameterTriple { a, lambda, b })
    }

    /// Draws each column of `A`, `lambda` and each row of `B` uniformly from
    /// its simplex by normalizing standard exponential variates.
    pub fn random(m: usize, n: usize, r: usize, rng: &mut impl rand::Rng) -> Self {
        let mut a = Matrix::from_fn(m, r, |_, _| Exp1.sample(rng));
        let mut lambda: Vec<f64> = (0..r).map(|_| Exp1.sample(rng)).collect();
        let mut b = Matrix::from_fn(r, n, |_, _| Exp1.sample(rng));
        for k in 0..r {
            let s: f64 = a.col(k).iter().sum();
            for i in 0..m {
                a[(i, k)] /= s;
            }
            let s: f64 = b.row(k).iter().sum();
            b.row_mut(k).iter_mut().for_each(|x| *x /= s);
        }
        let s: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|x| *x /= s);
        ParameterTriple { a, lambda, b }
    }

    pub fn rank(&self) -> usize {
        self.lambda.len()
    }

    /// `P = A diag(lambda) B`.
    pub fn product(&self) -> Matrix<f64> {
        let (m, r, n) = (self.a.nrows(), self.rank(), self.b.ncols());
        Matrix::from_fn(m, n, |i, j| {
            (0..r)
                .map(|k| self.a[(i, k)] * self.lambda[k] * self.b[(k, j)])
                .sum()
        })
    }

    /// Largest deviation from the stochasticity constraints, or infinity if
    /// some entry is negative.
    pub fn stochasticity_error(&self) -> f64 {
        let neg = self
            .a
            .data()
            .iter()
            .chain(&self.lambda)
            .chain(self.b.data())
            .any(|&x| x < 0.0);
        if neg {
            return f64::INFINITY;
        }
        let r = self.rank();
        let mut err = (self.lambda.iter().sum::<f64>() - 1.0).abs();
        for k in 0..r {
            err = err.max((self.a.col(k).iter().sum::<f64>() - 1.0).abs());
            err = err.max((self.b.row(k).iter().sum::<f64>() - 1.0).abs());
        }
        err
    }
}

/// The E-step table `v_ikj`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponsibilityTensor {
    m: usize,
    r: usize,
    n: usize,
    data: Vec<f64>,
}

impl ResponsibilityTensor {
    pub fn zeros(m: usize, r: usize, n: usize) -> Self {
        ResponsibilityTensor {
            m,
            r,
            n,
            data: vec![0.0; m * r * n],
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.m, self.r, self.n)
    }

    pub fn get(&self, i: usize, k: usize, j: usize) -> f64 {
        self.data[(i * self.r + k) * self.n + j]
    }

    pub fn set(&mut self, i: usize, k: usize, j: usize, v: f64) {
        self.data[(i * self.r + k) * self.n + j] = v;
    }

    /// `sum_k v_ikj`, which reproduces `u_ij` wherever `p_ij > 0`.
    pub fn marginal(&self) -> Matrix<f64> {
        Matrix::from_fn(self.m, self.n, |i, j| {
            (0..self.r).map(|k| self.get(i, k, j)).sum()
        })
    }
}

/// `sum u_ij log p_ij`, skipping cells with `u_ij = 0`. Returns negative
/// infinity when some observed cell has `p_ij = 0`.
pub fn log_likelihood(u: &DataMatrix, p: &Matrix<f64>) -> f64 {
    let mut total = 0.0;
    for (&c, &q) in u.counts.data().iter().zip(p.data()) {
        if c == 0.0 {
            continue;
        }
        if q <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total += c * q.ln();
    }
    total
}

fn check_shapes(u: &DataMatrix, theta: &ParameterTriple) -> Result<()> {
    if theta.a.nrows() != u.shape().0 || theta.b.ncols() != u.shape().1 {
        return Err(Error::Dimension(format!(
            "parameters describe a {}x{} table, data is {}x{}",
            theta.a.nrows(),
            theta.b.ncols(),
            u.shape().0,
            u.shape().1
        )));
    }
    Ok(())
}

/// Splits each count among the mixture components in proportion to
/// `a_ik lambda_k b_kj`. Cells with zero mixture density get zero.
pub fn e_step(u: &DataMatrix, theta: &ParameterTriple) -> Result<ResponsibilityTensor> {
    check_shapes(u, theta)?;
    let (m, n) = u.shape();
    let r = theta.rank();
    let mut v = ResponsibilityTensor::zeros(m, r, n);
    for i in 0..m {
        for j in 0..n {
            let w: Vec<f64> = (0..r)
                .map(|k| theta.a[(i, k)] * theta.lambda[k] * theta.b[(k, j)])
                .collect();
            let p: f64 = w.iter().sum();
            if p > 0.0 {
                for (k, wk) in w.iter().enumerate() {
                    v.set(i, k, j, wk / p * u.counts[(i, j)]);
                }
            }
        }
    }
    Ok(v)
}

/// Output of an M-step: the new parameters and the components whose weight
/// vanished (these receive uniform `A` columns and `B` rows).
#[derive(Debug, Clone, PartialEq)]
pub struct MStep {
    pub params: ParameterTriple,
    pub degenerate: Vec<usize>,
}

pub fn m_step(v: &ResponsibilityTensor, u_plus: f64) -> Result<MStep> {
    if u_plus <= 0.0 {
        return Err(Error::Domain("u_++ must be positive".into()));
    }
    let (m, r, n) = v.shape();
    let mut a = Matrix::zeros(m, r);
    let mut b = Matrix::zeros(r, n);
    for i in 0..m {
        for k in 0..r {
            for j in 0..n {
                let x = v.get(i, k, j);
                a[(i, k)] += x;
                b[(k, j)] += x;
            }
        }
    }
    let (lambda, degenerate) = normalize_components(&mut a, &mut b, u_plus);
    Ok(MStep {
        params: ParameterTriple { a, lambda, b },
        degenerate,
    })
}

/// Turns component mass tables into stochastic factors. `a` holds
/// `sum_j v_ikj` and `b` holds `sum_i v_ikj`.
fn normalize_components(a: &mut Matrix<f64>, b: &mut Matrix<f64>, u_plus: f64) -> (Vec<f64>, Vec<usize>) {
    let (m, r) = a.shape();
    let n = b.ncols();
    let mut lambda = vec![0.0; r];
    let mut degenerate = Vec::new();
    for k in 0..r {
        let mass: f64 = (0..m).map(|i| a[(i, k)]).sum();
        lambda[k] = mass / u_plus;
        if mass > 0.0 {
            for i in 0..m {
                a[(i, k)] /= mass;
            }
            let row_mass: f64 = b.row(k).iter().sum();
            b.row_mut(k).iter_mut().for_each(|x| *x /= row_mass);
        } else {
            degenerate.push(k);
            for i in 0..m {
                a[(i, k)] = 1.0 / m as f64;
            }
            b.row_mut(k).iter_mut().for_each(|x| *x = 1.0 / n as f64);
        }
    }
    let s: f64 = lambda.iter().sum();
    if s > 0.0 {
        lambda.iter_mut().for_each(|x| *x /= s);
    }
    (lambda, degenerate)
}

/// One E-step followed by one M-step without materializing the tensor.
fn em_round(u: &DataMatrix, theta: &ParameterTriple, p: &Matrix<f64>) -> MStep {
    let (m, n) = u.shape();
    let r = theta.rank();
    let ratio = Matrix::from_fn(m, n, |i, j| {
        let q = p[(i, j)];
        if q > 0.0 {
            u.counts[(i, j)] / q
        } else {
            0.0
        }
    });
    let mut a = Matrix::zeros(m, r);
    let mut b = Matrix::zeros(r, n);
    for k in 0..r {
        let lk = theta.lambda[k];
        for i in 0..m {
            let s: f64 = (0..n).map(|j| ratio[(i, j)] * theta.b[(k, j)]).sum();
            a[(i, k)] = theta.a[(i, k)] * lk * s;
        }
        for j in 0..n {
            let s: f64 = (0..m).map(|i| theta.a[(i, k)] * ratio[(i, j)]).sum();
            b[(k, j)] = lk * theta.b[(k, j)] * s;
        }
    }
    let (lambda, degenerate) = normalize_components(&mut a, &mut b, u.total);
    MStep {
        params: ParameterTriple { a, lambda, b },
        degenerate,
    }
}

/// Where an EM run starts.
#[derive(Debug, Clone)]
pub enum Init {
    Seed(u64),
    Params(ParameterTriple),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub crit_tol: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            crit_tol: DEFAULT_CRIT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmResult {
    pub params: ParameterTriple,
    pub p_hat: Matrix<f64>,
    pub loglik: f64,
    /// Log-likelihood of the starting point and of every iterate.
    pub loglik_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Max-abs entries of `A * (R B^T)` and `B * (A^T R)`.
    pub fixed_point_residual: (f64, f64),
    pub critical: Criticality,
    /// Components that lost all weight at some iteration.
    pub degenerate: Vec<usize>,
    pub seed: Option<u64>,
}

/// Runs EM until the largest entrywise change of `P` drops below `tol` or
/// `max_iter` rounds have been made.
pub fn run_em(u: &DataMatrix, r: usize, init: Init, opts: &EmOptions) -> Result<EmResult> {
    let (m, n) = u.shape();
    if r == 0 {
        return Err(Error::Domain("mixture size must be positive".into()));
    }
    let (mut theta, seed) = match init {
        Init::Seed(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            (ParameterTriple::random(m, n, r, &mut rng), Some(s))
        }
        Init::Params(t) => {
            if t.rank() != r {
                return Err(Error::Dimension(format!(
                    "initial parameters have {} components, expected {r}",
                    t.rank()
                )));
            }
            (t, None)
        }
    };
    check_shapes(u, &theta)?;
    let mut p = theta.product();
    let mut ll = log_likelihood(u, &p);
    if !ll.is_finite() {
        return Err(Error::Numeric(
            "initial parameters give zero probability to an observed cell".into(),
        ));
    }
    let mut trace = vec![ll];
    let mut degenerate = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let step = em_round(u, &theta, &p);
        for k in step.degenerate {
            if !degenerate.contains(&k) {
                degenerate.push(k);
            }
        }
        theta = step.params;
        let next = theta.product();
        let change = next
            .data()
            .iter()
            .zip(p.data())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        p = next;
        ll = log_likelihood(u, &p);
        iterations += 1;
        if !ll.is_finite() {
            return Err(Error::Numeric(format!(
                "log-likelihood became {ll} at iteration {iterations}"
            )));
        }
        trace.push(ll);
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    let fixed_point_residual = match gradient_matrix(u, &p) {
        Ok(grad) => fixed_point_residual(&theta, &grad)?,
        Err(_) => (f64::INFINITY, f64::INFINITY),
    };
    let critical = is_critical(u, &p, opts.crit_tol)?;
    Ok(EmResult {
        params: theta,
        p_hat: p,
        loglik: ll,
        loglik_trace: trace,
        iterations,
        converged,
        fixed_point_residual,
        critical,
        degenerate,
        seed,
    })
}

/// A batch of EM runs from independent random starts.
#[derive(Debug, Clone)]
pub struct Restarts {
    pub runs: Vec<EmResult>,
    /// Index of the run with the largest log-likelihood (first on ties).
    pub best: usize,
}

impl Restarts {
    pub fn best_run(&self) -> &EmResult {
        &self.runs[self.best]
    }
}

/// Seed of restart `index` under `master_seed`.
pub fn restart_seed(master_seed: u64, index: usize) -> u64 {
    stream_seed(master_seed, index as u64)
}

/// Runs `restarts` EM fits with seeds derived from `master_seed`. Runs are
/// independent, so parallel and sequential execution agree exactly.
pub fn run_restarts(
    u: &DataMatrix,
    r: usize,
    master_seed: u64,
    restarts: usize,
    opts: &EmOptions,
    exec: Execution,
) -> Result<Restarts> {
    if restarts == 0 {
        return Err(Error::Config("at least one restart is required".into()));
    }
    let runs = map_indexed(restarts, exec, |idx| {
        run_em(u, r, Init::Seed(restart_seed(master_seed, idx)), opts)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let best = best_index(&runs);
    Ok(Restarts { runs, best })
}

fn best_index(runs: &[EmResult]) -> usize {
    let mut best = 0;
    for (idx, run) in runs.iter().enumerate() {
        if run.loglik > runs[best].loglik {
            best = idx;
        }
    }
    best
}

mod matrix_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::exactla::Matrix;

    pub fn serialize<S: Serializer>(m: &Matrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = m.rows_iter().collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Matrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}
