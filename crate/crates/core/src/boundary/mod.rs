//! Topological and algebraic boundary of the rank 3 mixture model.

mod patterns;

use serde::Serialize;

pub use patterns::{
    component_count, enumerate_zero_patterns, patterns_of_kind, sample_algebraic_boundary, BoundarySample,
    ComponentCount, EntryDist, PatternKind, ZeroPattern,
};

use crate::error::{Error, Result};
use crate::exactla::{matrix_rank, Matrix};
use crate::rank3cert::{check_nonnegative, factor, nnrank3_membership, scan, Contact, Verdict, Witness};
use crate::scalar::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryStatus {
    Interior,
    Boundary,
    OutsideModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryReason {
    /// Some `p_ij = 0`.
    ZeroEntry,
    /// Every witness triangle is forced to touch the inner polygon.
    TouchingWitnesses,
    /// Nonnegative rank exceeds 3.
    NotMember,
    /// A witness has no vanishing degree (6, 3) product.
    UntouchedWitness,
    /// Positive and of rank at most 2.
    PositiveLowRank,
}

/// A passing witness together with its vanishing `(k, l, k')` products.
/// For swapped witnesses `k, l` index columns of `P` and `k'` rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TouchingWitness {
    pub witness: Witness,
    pub contacts: Vec<Contact>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryClassification {
    pub status: BoundaryStatus,
    pub reason: BoundaryReason,
    /// All passing witnesses when the reason is `TouchingWitnesses`; the
    /// untouched witness when it is `UntouchedWitness`.
    pub touching: Vec<TouchingWitness>,
}

impl BoundaryClassification {
    fn simple(status: BoundaryStatus, reason: BoundaryReason) -> Self {
        BoundaryClassification {
            status,
            reason,
            touching: Vec::new(),
        }
    }
}

/// Decides whether `P` lies on the topological boundary of the model.
///
/// Members with a zero entry are on the boundary. A positive member of
/// rank 3 is on the boundary iff every witness, in both orientations, has
/// some `(k, l, k')` whose two degree (6, 3) brackets have a zero product.
pub fn boundary_test(p: &Matrix<Rational>) -> Result<BoundaryClassification> {
    check_nonnegative(p)?;
    let membership = nnrank3_membership(p)?;
    if membership.verdict == Verdict::Out {
        return Ok(BoundaryClassification::simple(
            BoundaryStatus::OutsideModel,
            BoundaryReason::NotMember,
        ));
    }
    if p.has_zero_entry(0.0) {
        return Ok(BoundaryClassification::simple(
            BoundaryStatus::Boundary,
            BoundaryReason::ZeroEntry,
        ));
    }
    if matrix_rank(p, 0.0) < 3 {
        return Ok(BoundaryClassification::simple(
            BoundaryStatus::Interior,
            BoundaryReason::PositiveLowRank,
        ));
    }
    let f = factor(p)?;
    let (bt, at) = (f.b.transpose(), f.a.transpose());
    let mut touching = Vec::new();
    for swapped in [false, true] {
        let (fa, fb) = if swapped { (&bt, &at) } else { (&f.a, &f.b) };
        for w in scan(fa, fb, true).passes {
            let tw = TouchingWitness {
                witness: Witness {
                    i: w.i,
                    j: w.j,
                    iprime: w.ip,
                    jprime: w.jp,
                    swapped,
                },
                contacts: w.contacts,
            };
            if tw.contacts.is_empty() {
                return Ok(BoundaryClassification {
                    status: BoundaryStatus::Interior,
                    reason: BoundaryReason::UntouchedWitness,
                    touching: vec![tw],
                });
            }
            touching.push(tw);
        }
    }
    if touching.is_empty() {
        return Err(Error::Numeric(
            "membership found a witness that the exhaustive scan did not".into(),
        ));
    }
    Ok(BoundaryClassification {
        status: BoundaryStatus::Boundary,
        reason: BoundaryReason::TouchingWitnesses,
        touching,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn anchors() {
        let touching = Matrix::from_i64_rows(&[&[6, 13, 3, 1], &[4, 16, 6, 2], &[12, 4, 8, 12], &[5, 9, 10, 9]])
            .unwrap();
        let c = boundary_test(&touching).unwrap();
        assert_eq!(c.status, BoundaryStatus::Boundary);
        assert_eq!(c.reason, BoundaryReason::TouchingWitnesses);

        let rank_one = Matrix::from_fn(3, 4, |i, j| int((i as i64 + 1) * (j as i64 + 2)));
        assert_eq!(boundary_test(&rank_one).unwrap().status, BoundaryStatus::Interior);

        let u10 = Matrix::from_i64_rows(&[&[1, 1, 0, 0], &[1, 0, 1, 0], &[0, 1, 0, 1], &[0, 0, 1, 1]])
            .unwrap();
        assert_eq!(boundary_test(&u10).unwrap().status, BoundaryStatus::OutsideModel);

        let zero = Matrix::from_i64_rows(&[&[0, 1], &[1, 1]]).unwrap();
        assert_eq!(boundary_test(&zero).unwrap().reason, BoundaryReason::ZeroEntry);
    }
}
