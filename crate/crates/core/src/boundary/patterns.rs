//! Zero-patterned factorizations that parametrize the components of the
//! algebraic boundary, their count, and random points on them.

use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactla::Matrix;
use crate::scalar::{int, rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComponentCount {
    /// Hyperplanes `p_ij = 0`.
    pub coordinate: u128,
    pub kind_a: u128,
    pub kind_b: u128,
    pub total: u128,
    /// Dimension of each non-coordinate component inside the rank 3 variety.
    pub dimension: i64,
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of irreducible components of the algebraic boundary of the
/// `m x n` rank 3 model, with the split by component type.
pub fn component_count(m: usize, n: usize) -> Result<ComponentCount> {
    if m == 0 || n == 0 {
        return Err(Error::Dimension("component count needs m, n >= 1".into()));
    }
    let coordinate = (m * n) as u128;
    let kind_a = 36 * binom(m, 3) * binom(n, 4);
    let kind_b = 36 * binom(m, 4) * binom(n, 3);
    let total = coordinate + kind_a + kind_b;
    let (mi, ni) = (m as i128, n as i128);
    let closed = mi * ni + mi * (mi - 1) * (mi - 2) * (mi + ni - 6) * ni * (ni - 1) * (ni - 2) / 4;
    debug_assert_eq!(closed, total as i128);
    Ok(ComponentCount {
        coordinate,
        kind_a,
        kind_b,
        total,
        dimension: 3 * m as i64 + 3 * n as i64 - 11,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    /// Three zeros in `A` on distinct rows and columns, four in `B` on
    /// distinct columns covering all three rows.
    A,
    /// The transpose: three zeros in `B`, four in `A`.
    B,
}

/// Zero positions of an `m x 3` factor `A` and a `3 x n` factor `B`.
/// Positions are `(row, col)` within each factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZeroPattern {
    pub kind: PatternKind,
    pub m: usize,
    pub n: usize,
    pub a_zeros: Vec<(usize, usize)>,
    pub b_zeros: Vec<(usize, usize)>,
}

fn distinct<T: PartialEq>(xs: &[T]) -> bool {
    xs.iter().enumerate().all(|(k, x)| !xs[..k].contains(x))
}

fn is_transversal(zeros: &[(usize, usize)]) -> bool {
    let rows: Vec<usize> = zeros.iter().map(|z| z.0).collect();
    let cols: Vec<usize> = zeros.iter().map(|z| z.1).collect();
    zeros.len() == 3 && distinct(&rows) && distinct(&cols)
}

/// Four zeros, distinct along `line`, whose other coordinate covers `0..3`.
fn is_covering(zeros: &[(usize, usize)], line: impl Fn(&(usize, usize)) -> usize, other: impl Fn(&(usize, usize)) -> usize) -> bool {
    let lines: Vec<usize> = zeros.iter().map(&line).collect();
    zeros.len() == 4 && distinct(&lines) && (0..3).all(|k| zeros.iter().any(|z| other(z) == k))
}

impl ZeroPattern {
    pub fn validate(&self) -> Result<()> {
        let in_a = self.a_zeros.iter().all(|&(i, k)| i < self.m && k < 3);
        let in_b = self.b_zeros.iter().all(|&(k, j)| k < 3 && j < self.n);
        if !in_a || !in_b {
            return Err(Error::Index("zero position outside the factor".into()));
        }
        let ok = match self.kind {
            PatternKind::A => is_transversal(&self.a_zeros) && is_covering(&self.b_zeros, |z| z.1, |z| z.0),
            PatternKind::B => is_transversal(&self.b_zeros) && is_covering(&self.a_zeros, |z| z.0, |z| z.1),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("zero positions do not form a kind {:?} pattern", self.kind)))
        }
    }

    /// Swaps the roles of the two factors.
    pub fn transpose(&self) -> ZeroPattern {
        let flip = |zs: &[(usize, usize)]| zs.iter().map(|&(x, y)| (y, x)).collect();
        ZeroPattern {
            kind: match self.kind {
                PatternKind::A => PatternKind::B,
                PatternKind::B => PatternKind::A,
            },
            m: self.n,
            n: self.m,
            a_zeros: flip(&self.b_zeros),
            b_zeros: flip(&self.a_zeros),
        }
    }

    /// Factors with the given positive values in the free positions, filled
    /// row-major through `A` and then `B`.
    pub fn fill(&self, mut next: impl FnMut() -> Rational) -> (Matrix<Rational>, Matrix<Rational>) {
        let a = Matrix::from_fn(self.m, 3, |i, k| {
            if self.a_zeros.contains(&(i, k)) {
                Rational::zero()
            } else {
                next()
            }
        });
        let b = Matrix::from_fn(3, self.n, |k, j| {
            if self.b_zeros.contains(&(k, j)) {
                Rational::zero()
            } else {
                next()
            }
        });
        (a, b)
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            cur.push(x);
            go(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// The 36 maps from four items onto three labels, in lexicographic order.
fn surjections_4_onto_3() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(36);
    for code in 0..81usize {
        let f = [code / 27, code / 9 % 3, code / 3 % 3, code % 3];
        if (0..3).all(|k| f.contains(&k)) {
            out.push(f);
        }
    }
    out
}

/// Patterns of one kind. Components of `A` are labelled so that the zero
/// of component `k` sits in the `k`-th smallest chosen row, which removes
/// the relabelling symmetry of the three mixture components.
pub fn patterns_of_kind(m: usize, n: usize, kind: PatternKind) -> Vec<ZeroPattern> {
    if kind == PatternKind::B {
        return patterns_of_kind(n, m, PatternKind::A)
            .iter()
            .map(ZeroPattern::transpose)
            .collect();
    }
    let surj = surjections_4_onto_3();
    let mut out = Vec::new();
    for rows in combinations(m, 3) {
        for cols in combinations(n, 4) {
            for f in &surj {
                out.push(ZeroPattern {
                    kind,
                    m,
                    n,
                    a_zeros: rows.iter().enumerate().map(|(k, &i)| (i, k)).collect(),
                    b_zeros: cols.iter().zip(f).map(|(&j, &k)| (k, j)).collect(),
                });
            }
        }
    }
    out
}

/// All patterns of kind (a) followed by all of kind (b).
pub fn enumerate_zero_patterns(m: usize, n: usize) -> Vec<ZeroPattern> {
    let mut all = patterns_of_kind(m, n, PatternKind::A);
    all.extend(patterns_of_kind(m, n, PatternKind::B));
    all
}

/// Distribution of the free entries of a sampled factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum EntryDist {
    /// `p/q` with `p` and `q` independent and uniform on `1..=max`.
    RationalHeight { max: u32 },
    /// `p/q` uniform on the pairs `1 <= p <= q <= max`.
    UnitRational { max: u32 },
    /// Integers uniform on `lo..=hi`.
    Integers { lo: u32, hi: u32 },
}

impl Default for EntryDist {
    fn default() -> Self {
        EntryDist::RationalHeight { max: 100 }
    }
}

impl EntryDist {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            EntryDist::RationalHeight { max } | EntryDist::UnitRational { max } => max >= 1,
            EntryDist::Integers { lo, hi } => lo >= 1 && lo <= hi,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("entry distribution {self:?} has no positive support")))
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Rational {
        match *self {
            EntryDist::RationalHeight { max } => {
                rational(rng.random_range(1..=max) as i64, rng.random_range(1..=max) as i64)
            }
            EntryDist::UnitRational { max } => loop {
                let (p, q) = (rng.random_range(1..=max), rng.random_range(1..=max));
                if p <= q {
                    break rational(p as i64, q as i64);
                }
            },
            EntryDist::Integers { lo, hi } => int(rng.random_range(lo..=hi) as i64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    /// `A B` scaled to total mass 1.
    pub p: Matrix<Rational>,
    pub a: Matrix<Rational>,
    pub b: Matrix<Rational>,
}

/// Draws a point on the component of `pattern` with free entries from `dist`.
pub fn sample_algebraic_boundary<R: Rng + ?Sized>(
    pattern: &ZeroPattern,
    rng: &mut R,
    dist: EntryDist,
) -> Result<BoundarySample> {
    pattern.validate()?;
    dist.validate()?;
    let (a, b) = pattern.fill(|| dist.draw(rng));
    let p = a.matmul(&b)?;
    let total = p.sum();
    Ok(BoundarySample {
        p: p.scale(&(Rational::from_integer(1.into()) / total)),
        a,
        b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts() {
        let c = component_count(4, 4).unwrap();
        assert_eq!((c.coordinate, c.kind_a, c.kind_b, c.total), (16, 144, 144, 304));
        assert_eq!(c.dimension, 13);
        assert_eq!(component_count(5, 5).unwrap().total, 3625);
        assert!(component_count(0, 3).is_err());
    }

    #[test]
    fn pattern_lists_match_counts() {
        for (m, n) in [(4, 4), (4, 3), (3, 4), (5, 4), (3, 3)] {
            let c = component_count(m, n).unwrap();
            let a = patterns_of_kind(m, n, PatternKind::A);
            let b = patterns_of_kind(m, n, PatternKind::B);
            assert_eq!(a.len() as u128, c.kind_a);
            assert_eq!(b.len() as u128, c.kind_b);
            for p in a.iter().chain(&b) {
                p.validate().unwrap();
            }
            let mut all = enumerate_zero_patterns(m, n);
            let len = all.len();
            all.sort_by(|x, y| (&x.a_zeros, &x.b_zeros).cmp(&(&y.a_zeros, &y.b_zeros)));
            all.dedup();
            assert_eq!(all.len(), len);
        }
    }

    #[test]
    fn rejects_malformed_patterns() {
        let p = ZeroPattern {
            kind: PatternKind::A,
            m: 4,
            n: 4,
            a_zeros: vec![(0, 0), (1, 0), (2, 2)],
            b_zeros: vec![(0, 0), (0, 1), (1, 2), (2, 3)],
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn samples_are_normalized() {
        let pattern = &patterns_of_kind(4, 4, PatternKind::B)[7];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dist in [EntryDist::default(), EntryDist::UnitRational { max: 100 }, EntryDist::Integers { lo: 1, hi: 4 }] {
            let s = sample_algebraic_boundary(pattern, &mut rng, dist).unwrap();
            assert_eq!(s.p.sum(), int(1));
            assert!(s.a.is_nonnegative(0.0) && s.b.is_nonnegative(0.0));
            for &(i, k) in &pattern.a_zeros {
                assert!(s.a[(i, k)].is_zero());
            }
        }
        let unit = EntryDist::UnitRational { max: 10 };
        assert!((0..200).all(|_| {
            let x = unit.draw(&mut rng);
            x > int(0) && x <= int(1)
        }));
    }
}
