//! Seeded Monte-Carlo experiments: how often the MLE fails to be critical on
//! uniform and planted data, and how often sampled algebraic-boundary points
//! lie on the topological boundary.
//!
//! Trial `k` draws everything from `stream_seed(seed, k)`, so reports do not
//! depend on the execution mode or thread count.

mod report;

pub use report::{ExperimentReport, TrialRecord, CSV_HEADER};

use std::time::Instant;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::boundary::{boundary_test, patterns_of_kind, sample_algebraic_boundary, BoundaryStatus, EntryDist, PatternKind, ZeroPattern};
use crate::em::{run_em, run_restarts, DataMatrix, EmOptions, EmResult, Init, ParameterTriple};
use crate::error::{Error, Result};
use crate::exactla::{text::PROMOTE_DENOMINATOR, Matrix};
use crate::par::{map_indexed, stream_seed, Execution};
use crate::rank3cert::nnrank3_membership;
use crate::scalar::{rationalize, Rational};

/// How table 1 data matrices are drawn before scaling to integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataDist {
    /// Independent uniform `[0, 1)` entries.
    #[default]
    UniformEntries,
    /// Uniform on the probability simplex (normalized exponentials).
    Simplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Table1 {
        #[serde(default)]
        data: DataDist,
        /// Total count the data matrix is scaled to before rounding.
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// Multinomial samples of size `t m n` from a planted integer factorization.
    Planted { t: u32 },
    BoundaryFraction {
        #[serde(default)]
        dist: EntryDist,
        /// Stratum to sample; the first kind (a) pattern when absent.
        #[serde(default)]
        pattern: Option<ZeroPattern>,
    },
}

fn default_scale() -> f64 {
    1e6
}

impl Mode {
    pub fn table1() -> Mode {
        Mode::Table1 {
            data: DataDist::default(),
            scale: default_scale(),
        }
    }

    pub fn boundary_fraction(dist: EntryDist) -> Mode {
        Mode::BoundaryFraction { dist, pattern: None }
    }

    fn fits_em(&self) -> bool {
        !matches!(self, Mode::BoundaryFraction { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub num_matrices: usize,
    pub num_restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub crit_tol: f64,
    /// Extra EM iterations from the best restart before the criticality
    /// test. Zero disables polishing.
    pub polish_iter: usize,
    pub polish_tol: f64,
    /// Classify flagged estimates geometrically after rationalizing their
    /// factors.
    pub classify_flagged: bool,
    pub seed: u64,
    pub mode: Mode,
    pub exec: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: 4,
            n: 4,
            r: 3,
            num_matrices: 200,
            num_restarts: 100,
            max_iter: 500,
            tol: 1e-10,
            crit_tol: 1e-6,
            polish_iter: 20_000,
            polish_tol: 1e-15,
            classify_flagged: false,
            seed: 1,
            mode: Mode::table1(),
            exec: Execution::default(),
        }
    }
}

impl ExperimentConfig {
    /// 2000 restarts of up to 2000 iterations each.
    pub fn full_scale(mut self) -> Self {
        self.num_restarts = 2000;
        self.max_iter = 2000;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.m == 0 || self.n == 0 || self.num_matrices == 0 {
            return fail("m, n and num_matrices must be positive".into());
        }
        if self.mode.fits_em() {
            if self.r == 0 || self.r >= self.m.min(self.n) {
                return fail(format!("need 0 < r < min(m, n), got r = {}", self.r));
            }
            if self.num_restarts == 0 || self.max_iter == 0 {
                return fail("num_restarts and max_iter must be positive".into());
            }
        }
        match &self.mode {
            Mode::Table1 { scale, .. } if !(scale.is_finite() && *scale >= 1.0) => {
                fail(format!("scale must be at least 1, got {scale}"))
            }
            Mode::Planted { t: 0 } => fail("planted sample factor T must be positive".into()),
            Mode::BoundaryFraction { dist, pattern } => {
                dist.validate()?;
                match pattern {
                    Some(p) if (p.m, p.n) != (self.m, self.n) => {
                        fail(format!("pattern is {}x{}, experiment is {}x{}", p.m, p.n, self.m, self.n))
                    }
                    Some(p) => p.validate(),
                    None if self.m < 3 || self.n < 4 => fail("default stratum needs m >= 3, n >= 4".into()),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    fn em_options(&self) -> EmOptions {
        EmOptions {
            max_iter: self.max_iter,
            tol: self.tol,
            crit_tol: self.crit_tol,
        }
    }
}

/// Stream index of the data draw inside a trial; restarts use `0..restarts`.
const DATA_STREAM: u64 = u64::MAX;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let started = Instant::now();
    let pattern = match &cfg.mode {
        Mode::BoundaryFraction { pattern: Some(p), .. } => Some(p.clone()),
        Mode::BoundaryFraction { pattern: None, .. } => patterns_of_kind(cfg.m, cfg.n, PatternKind::A).into_iter().next(),
        _ => None,
    };
    let records = map_indexed(cfg.num_matrices, cfg.exec, |k| {
        let seed = stream_seed(cfg.seed, k as u64);
        match &cfg.mode {
            Mode::Table1 { data, scale } => {
                let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, DATA_STREAM));
                let u = table1_data(cfg.m, cfg.n, *data, *scale, &mut rng)?;
                em_trial(cfg, k, seed, &u)
            }
            Mode::Planted { t } => {
                let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, DATA_STREAM));
                let u = planted_data(cfg.m, cfg.n, cfg.r, *t, &mut rng)?;
                em_trial(cfg, k, seed, &u)
            }
            Mode::BoundaryFraction { dist, .. } => {
                let pattern = pattern.as_ref().expect("validated");
                boundary_trial(k, seed, pattern, *dist)
            }
        }
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport::new(cfg.clone(), records, started.elapsed().as_secs_f64()))
}

pub fn table1_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if !matches!(cfg.mode, Mode::Table1 { .. }) {
        return Err(Error::Config("table1_experiment needs table1 mode".into()));
    }
    run_experiment(cfg)
}

pub fn planted_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if !matches!(cfg.mode, Mode::Planted { .. }) {
        return Err(Error::Config("planted_experiment needs planted mode".into()));
    }
    run_experiment(cfg)
}

pub fn boundary_fraction_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if !matches!(cfg.mode, Mode::BoundaryFraction { .. }) {
        return Err(Error::Config("boundary_fraction_experiment needs boundary_fraction mode".into()));
    }
    run_experiment(cfg)
}

/// Random data matrix rounded to integers after scaling to total `scale`.
pub fn table1_data<R: Rng + ?Sized>(m: usize, n: usize, dist: DataDist, scale: f64, rng: &mut R) -> Result<DataMatrix> {
    let raw: Vec<f64> = (0..m * n)
        .map(|_| match dist {
            DataDist::UniformEntries => rng.random::<f64>(),
            DataDist::Simplex => rng.sample(Exp1),
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let counts = raw.iter().map(|x| (x / total * scale).round()).collect();
    DataMatrix::new(Matrix::new(m, n, counts)?)
}

/// Counts from `t m n` draws of `AB / sum(AB)`, with integer factors
/// uniform on `0..=100`.
pub fn planted_data<R: Rng + ?Sized>(m: usize, n: usize, r: usize, t: u32, rng: &mut R) -> Result<DataMatrix> {
    let weights = loop {
        let a = Matrix::from_fn(m, r, |_, _| rng.random_range(0..=100u32) as f64);
        let b = Matrix::from_fn(r, n, |_, _| rng.random_range(0..=100u32) as f64);
        let p = a.matmul(&b)?;
        if p.sum() > 0.0 {
            break p.into_data();
        }
    };
    let cell = WeightedIndex::new(&weights).map_err(|e| Error::Numeric(e.to_string()))?;
    let mut counts = vec![0.0; m * n];
    for _ in 0..t as usize * m * n {
        counts[cell.sample(rng)] += 1.0;
    }
    DataMatrix::new(Matrix::new(m, n, counts)?)
}

fn em_trial(cfg: &ExperimentConfig, index: usize, seed: u64, u: &DataMatrix) -> Result<TrialRecord> {
    let opts = cfg.em_options();
    let restarts = run_restarts(u, cfg.r, seed, cfg.num_restarts, &opts, Execution::Sequential)?;
    let best = restarts.best_run();
    let fit = if cfg.polish_iter > 0 {
        let polish = EmOptions {
            max_iter: cfg.polish_iter,
            tol: cfg.polish_tol,
            crit_tol: cfg.crit_tol,
        };
        run_em(u, cfg.r, Init::Params(best.params.clone()), &polish)?
    } else {
        best.clone()
    };
    let flagged = !fit.critical.critical;
    let geometric = if flagged && cfg.classify_flagged {
        Some(classify_estimate(&fit.params)?)
    } else {
        None
    };
    Ok(TrialRecord::from_fit(index, seed, u, &fit, restarts.best, flagged, geometric))
}

/// Boundary status of `A diag(lambda) B` after rounding the factors to
/// rationals, which keeps the product nonnegative of rank at most `r`.
pub fn classify_estimate(params: &ParameterTriple) -> Result<BoundaryStatus> {
    let round = |x: &f64| rationalize(*x, PROMOTE_DENOMINATOR).ok_or_else(|| Error::Numeric("non-finite parameter".into()));
    let (a, b) = (&params.a, &params.b);
    let scaled = Matrix::from_fn(a.nrows(), a.ncols(), |i, k| a[(i, k)] * params.lambda[k]);
    let qa: Matrix<Rational> = Matrix::new(scaled.nrows(), scaled.ncols(), scaled.data().iter().map(round).collect::<Result<_>>()?)?;
    let qb: Matrix<Rational> = Matrix::new(b.nrows(), b.ncols(), b.data().iter().map(round).collect::<Result<_>>()?)?;
    Ok(boundary_test(&qa.matmul(&qb)?)?.status)
}

fn boundary_trial(index: usize, seed: u64, pattern: &ZeroPattern, dist: EntryDist) -> Result<TrialRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, DATA_STREAM));
    let sample = sample_algebraic_boundary(pattern, &mut rng, dist)?;
    let member = nnrank3_membership(&sample.p)?.verdict.is_member();
    let status = boundary_test(&sample.p)?.status;
    Ok(TrialRecord::from_boundary(index, seed, member, status))
}

/// Best log-likelihood over the first `k` restarts for every `k`.
pub fn best_loglik_prefixes(runs: &[EmResult]) -> Vec<f64> {
    runs.iter()
        .scan(f64::NEG_INFINITY, |best, run| {
            *best = best.max(run.loglik);
            Some(*best)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: Mode) -> ExperimentConfig {
        ExperimentConfig {
            num_matrices: 4,
            num_restarts: 3,
            max_iter: 50,
            polish_iter: 100,
            mode,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn validation() {
        assert!(ExperimentConfig { r: 4, ..Default::default() }.validate().is_err());
        assert!(small(Mode::Planted { t: 0 }).validate().is_err());
        assert!(small(Mode::boundary_fraction(EntryDist::Integers { lo: 0, hi: 4 })).validate().is_err());
        assert!(ExperimentConfig::default().validate().is_ok());
    }

    #[test]
    fn data_generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = table1_data(4, 5, DataDist::Simplex, 1e6, &mut rng).unwrap();
        assert!((u.total() - 1e6).abs() <= 20.0);
        let u = planted_data(4, 4, 3, 10, &mut rng).unwrap();
        assert_eq!(u.total(), 160.0);
    }

    #[test]
    fn rank_one_fits_are_never_flagged() {
        let cfg = ExperimentConfig { r: 1, ..small(Mode::table1()) };
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.flagged, 0);
    }

    #[test]
    fn execution_mode_does_not_change_reports() {
        for mode in [Mode::table1(), Mode::Planted { t: 10 }, Mode::boundary_fraction(EntryDist::default())] {
            let par = run_experiment(&small(mode.clone())).unwrap();
            let seq = run_experiment(&ExperimentConfig { exec: Execution::Sequential, ..small(mode) }).unwrap();
            assert_eq!(par.records, seq.records);
        }
    }
}
