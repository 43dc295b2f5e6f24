//! Exact certification of nonnegative rank at most three.
//!
//! A nonnegative matrix `P` of rank 3 has nonnegative rank 3 iff some
//! triangle nests between the polygon of its normalized columns and the
//! polygon cut from the simplex by its column span. The test below searches
//! for such a triangle through sign conditions on bracket polynomials of an
//! arbitrary rank factorization.

mod brackets;
mod factorize;
mod polygons;

use serde::Serialize;

pub use brackets::{bracket3, meet_join, six_three};
pub use factorize::nonneg_rank3_factorize;
pub use polygons::{nested_polygons, NestedPolygons};

use brackets::{side, six_three_from_lines};
use crate::error::{Error, Result};
use crate::exactla::{col3, cross, dot, is_zero3, rank_factorize, row3, Field, Matrix, DEFAULT_RANK_TOL};
use crate::scalar::{Backend, Scalar, Sign};

/// Relative width of the zero band used for float sign tests.
pub const FLOAT_SIGN_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    In,
    Out,
    RankDeficientIn,
}

impl Verdict {
    pub fn is_member(self) -> bool {
        self != Verdict::Out
    }
}

/// Indices certifying membership, in terms of the original matrix. When
/// `swapped` is set, `i, j` index columns of `P` and `iprime, jprime` rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Witness {
    pub i: usize,
    pub j: usize,
    pub iprime: usize,
    pub jprime: usize,
    pub swapped: bool,
}

/// First sign condition violated by a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum Failure {
    /// Lines `a_i`, `a_j` coincide, so they have no single meet point.
    CoincidentLines,
    /// Lines `a_k` lie on both sides of the meet point.
    LinesStraddle { k: usize },
    /// The apex coincides with `b_i'` or `b_j'`, so the supporting line is
    /// undetermined.
    DegenerateSupport,
    /// Points lie on both sides of the line through the apex and `b_i'`.
    FirstSupportStraddles { kprime: usize },
    /// Points lie on both sides of the line through the apex and `b_j'`.
    SecondSupportStraddles { kprime: usize },
    /// The degree (6, 3) brackets for `(k, l)` and `(l, k)` differ in sign.
    SixThree { k: usize, l: usize, kprime: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateFailure {
    pub i: usize,
    pub j: usize,
    /// `None` when the failure does not depend on the point pair.
    pub iprime: Option<usize>,
    pub jprime: Option<usize>,
    pub swapped: bool,
    #[serde(flatten)]
    pub failure: Failure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipDecision {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub rank: usize,
    pub backend: Backend,
    /// Set when a float sign fell inside the zero band.
    pub marginal: bool,
    /// Filled only for `Out` verdicts on rank 3 input.
    pub failure_log: Vec<CandidateFailure>,
}

/// `P` with zero rows and columns removed, plus the surviving indices.
#[derive(Debug, Clone)]
pub(crate) struct Stripped<T> {
    pub p: Option<Matrix<T>>,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

pub(crate) fn check_nonnegative<T: Scalar>(p: &Matrix<T>) -> Result<()> {
    if let Some(x) = p.data().iter().find(|x| **x < T::zero()) {
        return Err(Error::Domain(format!("matrix has a negative entry {x:?}")));
    }
    if !T::is_exact() && p.data().iter().any(|x| !x.to_f64().is_finite()) {
        return Err(Error::Domain("matrix has a non-finite entry".into()));
    }
    Ok(())
}

pub(crate) fn strip_zero_lines<T: Scalar>(p: &Matrix<T>) -> Stripped<T> {
    let rows: Vec<usize> = (0..p.nrows())
        .filter(|&i| p.row(i).iter().any(|x| !x.is_zero()))
        .collect();
    let cols: Vec<usize> = (0..p.ncols())
        .filter(|&j| (0..p.nrows()).any(|i| !p[(i, j)].is_zero()))
        .collect();
    let p = (!rows.is_empty()).then(|| p.select_rows(&rows).select_cols(&cols));
    Stripped { p, rows, cols }
}

/// Zero band for a value of degree `da` in the entries of `A` and `db` in
/// the entries of `B`. Exact backends ignore it.
#[derive(Debug, Clone, Copy)]
struct Band {
    scale_a: f64,
    scale_b: f64,
}

impl Band {
    fn new<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Self {
        Band {
            scale_a: a.max_abs_f64(),
            scale_b: b.max_abs_f64(),
        }
    }

    fn width(&self, da: i32, db: i32) -> f64 {
        FLOAT_SIGN_BAND * self.scale_a.powi(da) * self.scale_b.powi(db)
    }
}

/// Tracks whether any banded sign decision was marginal.
struct SignCtx {
    band: Band,
    marginal: bool,
}

impl SignCtx {
    fn sign<T: Scalar>(&mut self, x: &T, da: i32, db: i32) -> Sign {
        let s = x.banded_sign(self.band.width(da, db));
        self.marginal |= s.marginal;
        s.sign
    }

    fn is_zero3<T: Scalar>(&mut self, v: &[T; 3], da: i32, db: i32) -> bool {
        if T::is_exact() {
            return is_zero3(v);
        }
        v.iter().all(|x| self.sign(x, da, db) == Sign::Zero)
    }
}

/// A family passes when its nonzero members share one sign. Returns the
/// index of the first member contradicting the sign seen so far.
fn same_sign_or_zero(signs: impl Iterator<Item = (usize, Sign)>) -> std::result::Result<(), usize> {
    let mut seen = Sign::Zero;
    for (idx, s) in signs {
        if s == Sign::Zero {
            continue;
        }
        if seen == Sign::Zero {
            seen = s;
        } else if s != seen {
            return Err(idx);
        }
    }
    Ok(())
}

/// A `(k, l, k')` triple at which the product of the two degree (6, 3)
/// brackets vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Contact {
    pub k: usize,
    pub l: usize,
    pub kprime: usize,
}

/// Result of testing one `(i, j, i', j')` candidate on factors `(A, B)`.
enum Outcome {
    Pass { contacts: Vec<Contact> },
    Fail(Failure),
}

/// Candidates are indexed by factor rows `i < j` of `a` and columns
/// `i' < j'` of `b`. The conditions are symmetric under `i <-> j` and
/// `i' <-> j'`, so unordered pairs cover every ordered candidate.
struct Search<'a, T> {
    a: &'a Matrix<T>,
    b: &'a Matrix<T>,
    ctx: SignCtx,
}

impl<'a, T: Scalar> Search<'a, T> {
    fn new(a: &'a Matrix<T>, b: &'a Matrix<T>) -> Self {
        Search {
            a,
            b,
            ctx: SignCtx {
                band: Band::new(a, b),
                marginal: false,
            },
        }
    }

    /// Checks the apex conditions for rows `(i, j)`. On success returns the
    /// apex `v = a_i x a_j`.
    fn apex(&mut self, i: usize, j: usize) -> std::result::Result<[T; 3], Failure> {
        let v = cross(&row3(self.a, i), &row3(self.a, j));
        if self.ctx.is_zero3(&v, 2, 0) {
            return Err(Failure::CoincidentLines);
        }
        let m = self.a.nrows();
        let signs: Vec<(usize, Sign)> = (0..m)
            .filter(|&k| k != i && k != j)
            .map(|k| (k, self.ctx.sign(&dot(&v, &row3(self.a, k)), 3, 0)))
            .collect();
        same_sign_or_zero(signs.into_iter()).map_err(|k| Failure::LinesStraddle { k })?;
        Ok(v)
    }

    /// Checks the point conditions for `(i', j')` given the apex of `(i, j)`.
    /// Zero products are recorded as contacts.
    fn candidate(&mut self, i: usize, j: usize, v: &[T; 3], ip: usize, jp: usize) -> Outcome {
        let (m, n) = (self.a.nrows(), self.b.ncols());
        let l1 = cross(v, &col3(self.b, ip));
        let l2 = cross(v, &col3(self.b, jp));
        if self.ctx.is_zero3(&l1, 2, 1) || self.ctx.is_zero3(&l2, 2, 1) {
            return Outcome::Fail(Failure::DegenerateSupport);
        }
        for (line, skip, first) in [(&l1, ip, true), (&l2, jp, false)] {
            let signs: Vec<(usize, Sign)> = (0..n)
                .filter(|&k| k != skip)
                .map(|k| (k, self.ctx.sign(&side(line, &col3(self.b, k)), 2, 2)))
                .collect();
            if let Err(kprime) = same_sign_or_zero(signs.into_iter()) {
                return Outcome::Fail(if first {
                    Failure::FirstSupportStraddles { kprime }
                } else {
                    Failure::SecondSupportStraddles { kprime }
                });
            }
        }
        let rest: Vec<usize> = (0..m).filter(|&k| k != i && k != j).collect();
        let mut contacts = Vec::new();
        for (x, &k) in rest.iter().enumerate() {
            let ak = row3(self.a, k);
            for &l in &rest[x + 1..] {
                let al = row3(self.a, l);
                for kp in (0..n).filter(|&kp| kp != ip && kp != jp) {
                    let bkp = col3(self.b, kp);
                    let s1 = self.ctx.sign(&six_three_from_lines(&l1, &l2, &ak, &al, &bkp), 6, 3);
                    let s2 = self.ctx.sign(&six_three_from_lines(&l1, &l2, &al, &ak, &bkp), 6, 3);
                    if s1 == Sign::Zero || s2 == Sign::Zero {
                        contacts.push(Contact { k, l, kprime: kp });
                    } else if s1 != s2 {
                        return Outcome::Fail(Failure::SixThree { k, l, kprime: kp });
                    }
                }
            }
        }
        Outcome::Pass { contacts }
    }
}

/// A passing candidate in factor coordinates.
#[derive(Debug, Clone)]
pub(crate) struct FactorWitness {
    pub i: usize,
    pub j: usize,
    pub ip: usize,
    pub jp: usize,
    pub contacts: Vec<Contact>,
}

/// Failing candidate `(i, j)`, with the point pair when the failure depends
/// on it.
pub(crate) type ScanFailure = (usize, usize, Option<(usize, usize)>, Failure);

/// Scans all candidates of one orientation. Stops at the first pass unless
/// `all` is set.
pub(crate) struct Scan {
    pub passes: Vec<FactorWitness>,
    pub failures: Vec<ScanFailure>,
    pub marginal: bool,
}

pub(crate) fn scan<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, all: bool) -> Scan {
    let mut search = Search::new(a, b);
    let (m, n) = (a.nrows(), b.ncols());
    let mut out = Scan {
        passes: Vec::new(),
        failures: Vec::new(),
        marginal: false,
    };
    'outer: for i in 0..m {
        for j in i + 1..m {
            let v = match search.apex(i, j) {
                Ok(v) => v,
                Err(f) => {
                    out.failures.push((i, j, None, f));
                    continue;
                }
            };
            for ip in 0..n {
                for jp in ip + 1..n {
                    match search.candidate(i, j, &v, ip, jp) {
                        Outcome::Pass { contacts } => {
                            out.passes.push(FactorWitness { i, j, ip, jp, contacts });
                            if !all {
                                break 'outer;
                            }
                        }
                        Outcome::Fail(f) => out.failures.push((i, j, Some((ip, jp)), f)),
                    }
                }
            }
        }
    }
    out.marginal = search.ctx.marginal;
    out
}

pub(crate) struct Factored<T> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
}

pub(crate) fn rank_tol<T: Scalar>() -> f64 {
    if T::is_exact() {
        0.0
    } else {
        DEFAULT_RANK_TOL
    }
}

/// Decides whether `P` has nonnegative rank at most three.
///
/// Rank below three is accepted outright. Otherwise the first passing
/// candidate is searched lexicographically in `(i, j, i', j')`, first on a
/// rank factorization `P = AB` and then on the swapped pair `(B^T, A^T)`.
pub fn nnrank3_membership<T: Field>(p: &Matrix<T>) -> Result<MembershipDecision> {
    check_nonnegative(p)?;
    let stripped = strip_zero_lines(p);
    let Some(sp) = &stripped.p else {
        return Ok(decision::<T>(Verdict::RankDeficientIn, None, 0, false, Vec::new()));
    };
    let rank = crate::exactla::matrix_rank(sp, rank_tol::<T>());
    if rank < 3 {
        return Ok(decision::<T>(Verdict::RankDeficientIn, None, rank, false, Vec::new()));
    }
    if rank > 3 {
        return Ok(decision::<T>(Verdict::Out, None, rank, false, Vec::new()));
    }
    let f = factor(sp)?;
    let (bt, at) = (f.b.transpose(), f.a.transpose());
    let mut marginal = false;
    let mut log = Vec::new();
    for swapped in [false, true] {
        let (fa, fb) = if swapped { (&bt, &at) } else { (&f.a, &f.b) };
        let s = scan(fa, fb, false);
        marginal |= s.marginal;
        let (line_map, point_map) = if swapped {
            (&stripped.cols, &stripped.rows)
        } else {
            (&stripped.rows, &stripped.cols)
        };
        if let Some(w) = s.passes.first() {
            let witness = Witness {
                i: line_map[w.i],
                j: line_map[w.j],
                iprime: point_map[w.ip],
                jprime: point_map[w.jp],
                swapped,
            };
            return Ok(decision::<T>(Verdict::In, Some(witness), rank, marginal, Vec::new()));
        }
        log.extend(s.failures.into_iter().map(|(i, j, pts, failure)| CandidateFailure {
            i: line_map[i],
            j: line_map[j],
            iprime: pts.map(|(ip, _)| point_map[ip]),
            jprime: pts.map(|(_, jp)| point_map[jp]),
            swapped,
            failure: remap_failure(failure, line_map, point_map),
        }));
    }
    Ok(decision::<T>(Verdict::Out, None, rank, marginal, log))
}

pub(crate) fn factor<T: Scalar>(p: &Matrix<T>) -> Result<Factored<T>> {
    let (a, b) = rank_factorize(p, 3, rank_tol::<T>())?;
    Ok(Factored { a, b })
}

fn remap_failure(f: Failure, lines: &[usize], points: &[usize]) -> Failure {
    match f {
        Failure::LinesStraddle { k } => Failure::LinesStraddle { k: lines[k] },
        Failure::FirstSupportStraddles { kprime } => Failure::FirstSupportStraddles { kprime: points[kprime] },
        Failure::SecondSupportStraddles { kprime } => Failure::SecondSupportStraddles { kprime: points[kprime] },
        Failure::SixThree { k, l, kprime } => Failure::SixThree {
            k: lines[k],
            l: lines[l],
            kprime: points[kprime],
        },
        other => other,
    }
}

fn decision<T: Scalar>(
    verdict: Verdict,
    witness: Option<Witness>,
    rank: usize,
    marginal: bool,
    failure_log: Vec<CandidateFailure>,
) -> MembershipDecision {
    MembershipDecision {
        verdict,
        witness,
        rank,
        backend: T::BACKEND,
        marginal,
        failure_log,
    }
}
