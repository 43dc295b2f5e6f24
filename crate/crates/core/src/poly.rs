//! Univariate polynomials over the rationals with Sturm-sequence real root
//! isolation.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::scalar::{Rational, Scalar};

/// Dense polynomial, coefficients stored lowest degree first with no
/// trailing zeros. The zero polynomial has an empty coefficient list.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    /// Builds from integer coefficients, highest degree first.
    pub fn from_desc_i64(desc: &[i64]) -> Self {
        Self::new(desc.iter().rev().map(|&c| Rational::from_i64(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_i64(k as i64))
                .collect(),
        )
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.leading();
        Poly::new(self.coeffs.iter().map(|c| c / &lc).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let mut rem = self.coeffs.clone();
        let Some(sd) = self.degree() else {
            return (Poly::new(vec![]), Poly::new(vec![]));
        };
        if sd < dd {
            return (Poly::new(vec![]), self.clone());
        }
        let lc = d.leading();
        let mut q = vec![Rational::zero(); sd - dd + 1];
        for k in (0..=sd - dd).rev() {
            let c = &rem[k + dd] / &lc;
            if !c.is_zero() {
                for (i, dc) in d.coeffs.iter().enumerate() {
                    rem[k + i] -= &c * dc;
                }
            }
            q[k] = c;
        }
        rem.truncate(dd);
        (Poly::new(q), Poly::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `self / gcd(self, self')`: same roots, all simple.
    pub fn squarefree(&self) -> Poly {
        let g = self.gcd(&self.derivative());
        if g.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        self.div_rem(&g).0.monic()
    }

    /// Sturm chain `p, p', -rem(p, p'), ...`.
    pub fn sturm_sequence(&self) -> Vec<Poly> {
        let mut seq = vec![self.clone(), self.derivative()];
        while !seq[seq.len() - 1].is_zero() {
            let n = seq.len();
            let r = seq[n - 2].div_rem(&seq[n - 1]).1.neg();
            seq.push(r);
        }
        seq.pop();
        seq
    }

    /// Upper bound on the absolute value of every real root (Cauchy).
    pub fn root_bound(&self) -> Rational {
        let lc = self.leading().abs();
        let max = self
            .coeffs
            .iter()
            .take(self.coeffs.len().saturating_sub(1))
            .map(|c| c.abs() / &lc)
            .fold(Rational::zero(), |a, b| if b > a { b } else { a });
        max + Rational::one()
    }

    /// The unique polynomial of degree below `points.len()` through the
    /// given points, which must have distinct abscissae.
    pub fn interpolate(points: &[(Rational, Rational)]) -> Poly {
        let mut acc = Poly::new(Vec::new());
        for (k, (xk, yk)) in points.iter().enumerate() {
            let mut basis = Poly::new(vec![yk.clone()]);
            for (l, (xl, _)) in points.iter().enumerate() {
                if l != k {
                    let d = xk - xl;
                    basis = basis.mul(&Poly::new(vec![-xl / &d, Rational::one() / d]));
                }
            }
            acc = acc.add(&basis);
        }
        acc
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |c: &[Rational], k: usize| c.get(k).cloned().unwrap_or_else(Rational::zero);
        Poly::new((0..n).map(|k| get(&self.coeffs, k) + get(&other.coeffs, k)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::new(Vec::new());
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            for (j, y) in other.coeffs.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        Poly::new(out)
    }
}

fn sign_changes(seq: &[Poly], x: &Rational) -> usize {
    let signs: Vec<bool> = seq
        .iter()
        .map(|p| p.eval(x))
        .filter(|v| !v.is_zero())
        .map(|v| v.is_positive())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Number of distinct real roots of the chain's head in `(lo, hi]`.
fn count_roots(seq: &[Poly], lo: &Rational, hi: &Rational) -> usize {
    sign_changes(seq, lo) - sign_changes(seq, hi)
}

/// A half-open interval `(lo, hi]` containing exactly one real root. When
/// the root is known exactly, `lo == hi == root`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl RootInterval {
    pub fn exact(&self) -> Option<&Rational> {
        (self.lo == self.hi).then_some(&self.lo)
    }

    pub fn midpoint_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / Rational::from_i64(2)).to_f64()
    }
}

/// Isolates the distinct real roots of `p`, in increasing order, and refines
/// each interval to width at most `width`. Rational roots are detected and
/// returned exactly.
pub fn real_roots(p: &Poly, width: &Rational) -> Vec<RootInterval> {
    if p.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let sf = p.squarefree();
    let seq = sf.sturm_sequence();
    let bound = sf.root_bound();
    let mut pending = vec![(-bound.clone(), bound)];
    let mut out = Vec::new();
    while let Some((lo, hi)) = pending.pop() {
        match count_roots(&seq, &lo, &hi) {
            0 => {}
            1 => out.push(refine(&sf, &seq, lo, hi, width)),
            _ => {
                let mid = (&lo + &hi) / Rational::from_i64(2);
                pending.push((mid.clone(), hi));
                pending.push((lo, mid));
            }
        }
    }
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    out
}

fn refine(
    sf: &Poly,
    seq: &[Poly],
    mut lo: Rational,
    mut hi: Rational,
    width: &Rational,
) -> RootInterval {
    if sf.eval(&hi).is_zero() {
        return RootInterval { lo: hi.clone(), hi };
    }
    let two = Rational::from_i64(2);
    while &hi - &lo > *width {
        let mid = (&lo + &hi) / &two;
        if sf.eval(&mid).is_zero() {
            return RootInterval {
                lo: mid.clone(),
                hi: mid,
            };
        }
        if count_roots(seq, &lo, &mid) == 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if let Some(r) = rational_root_near(sf, &lo, &hi) {
        return RootInterval { lo: r.clone(), hi: r };
    }
    RootInterval { lo, hi }
}

/// A rational root `p/q` of an integer polynomial has `q` dividing the
/// leading coefficient, so rounding `root * lc` recovers it.
fn rational_root_near(sf: &Poly, lo: &Rational, hi: &Rational) -> Option<Rational> {
    let lcm = sf
        .coeffs
        .iter()
        .fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
    let lc = (sf.leading() * Rational::from_integer(lcm)).to_integer();
    let lc = Rational::from_integer(lc.abs());
    let mid = (lo + hi) / Rational::from_i64(2);
    let candidate = (mid * &lc).round() / &lc;
    (sf.eval(&candidate).is_zero() && &candidate >= lo && &candidate <= hi).then_some(candidate)
}

/// Roots of `p` of multiplicity one, each isolated and refined.
pub fn simple_real_roots(p: &Poly, width: &Rational) -> Vec<RootInterval> {
    let repeated = p.gcd(&p.derivative());
    let repeated_seq = (repeated.degree().unwrap_or(0) > 0).then(|| repeated.squarefree().sturm_sequence());
    real_roots(p, width)
        .into_iter()
        .filter(|iv| match (&repeated_seq, iv.exact()) {
            (None, _) => true,
            (Some(_), Some(r)) => !repeated.eval(r).is_zero(),
            (Some(seq), None) => count_roots(seq, &iv.lo, &iv.hi) == 0,
        })
        .collect()
}
