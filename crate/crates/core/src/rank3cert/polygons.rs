//! The nested polygons `B ⊆ A` inside the probability simplex.
//!
//! `A` is the slice of the column span of `P` by the simplex and `B` the
//! convex hull of the normalized columns of `P`. Both live on a plane, so
//! they are also reported in a 2D affine chart of that plane.

use std::cmp::Ordering;

use super::{check_nonnegative, factor, rank_tol};
use crate::error::{Error, Result};
use crate::exactla::{col3, cross, dot, matrix_rank, row3, Field, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct NestedPolygons<T> {
    /// Vertices of the outer polygon in the simplex, in cyclic order.
    pub outer: Vec<Vec<T>>,
    /// Vertices of the inner polygon, in the same cyclic orientation.
    pub inner: Vec<Vec<T>>,
    /// `outer` and `inner` in a 2D affine chart of their common plane.
    pub outer_2d: Vec<[T; 2]>,
    pub inner_2d: Vec<[T; 2]>,
    /// Every normalized column `P^j / P_+j`, in column order.
    pub columns: Vec<Vec<T>>,
}

impl<T: Scalar> NestedPolygons<T> {
    /// Whether every inner vertex satisfies every outer edge inequality,
    /// with `tol` slack on floats.
    pub fn inner_within_outer(&self, tol: f64) -> bool {
        self.inner_2d
            .iter()
            .all(|p| polygon_contains(&self.outer_2d, p, tol))
    }
}

fn orient<T: Scalar>(o: &[T; 2], a: &[T; 2], b: &[T; 2]) -> T {
    (a[0].clone() - o[0].clone()) * (b[1].clone() - o[1].clone())
        - (a[1].clone() - o[1].clone()) * (b[0].clone() - o[0].clone())
}

fn polygon_contains<T: Scalar>(poly: &[[T; 2]], p: &[T; 2], tol: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    // the cycle is counterclockwise, see `cyclic_order`
    (0..n).all(|k| {
        let o = orient(&poly[k], &poly[(k + 1) % n], p);
        o >= T::zero() || o.is_negligible(tol)
    })
}

/// Sorts points counterclockwise around their centroid.
fn cyclic_order<T: Scalar>(pts: &[[T; 2]]) -> Vec<usize> {
    let n = pts.len();
    let inv = T::one() / T::from_i64(n as i64);
    let g = [0, 1].map(|c| pts.iter().fold(T::zero(), |acc, p| acc + p[c].clone()) * inv.clone());
    let half = |p: &[T; 2]| -> bool {
        let y = p[1].clone() - g[1].clone();
        let x = p[0].clone() - g[0].clone();
        y > T::zero() || (y == T::zero() && x > T::zero())
    };
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        let (ha, hb) = (half(&pts[a]), half(&pts[b]));
        if ha != hb {
            return if ha { Ordering::Less } else { Ordering::Greater };
        }
        let o = orient(&g, &pts[a], &pts[b]);
        if o > T::zero() {
            Ordering::Less
        } else if o < T::zero() {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    });
    idx
}

/// Indices of the convex hull vertices, counterclockwise, collinear points
/// dropped.
fn hull<T: Scalar>(pts: &[[T; 2]], tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        pts[a][0]
            .partial_cmp(&pts[b][0])
            .unwrap_or(Ordering::Equal)
            .then(pts[a][1].partial_cmp(&pts[b][1]).unwrap_or(Ordering::Equal))
    });
    idx.dedup_by(|a, b| pts[*a] == pts[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let turn_left = |o: usize, a: usize, b: usize| {
        let x = orient(&pts[o], &pts[a], &pts[b]);
        x > T::zero() && !x.is_negligible(tol)
    };
    let mut lower: Vec<usize> = Vec::new();
    for &p in &idx {
        while lower.len() >= 2 && !turn_left(lower[lower.len() - 2], lower[lower.len() - 1], p) {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &p in idx.iter().rev() {
        while upper.len() >= 2 && !turn_left(upper[upper.len() - 2], upper[upper.len() - 1], p) {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Builds both polygons of a nonnegative rank 3 matrix without zero columns.
pub fn nested_polygons<T: Field>(p: &Matrix<T>) -> Result<NestedPolygons<T>> {
    check_nonnegative(p)?;
    let rank = matrix_rank(p, rank_tol::<T>());
    if rank != 3 {
        return Err(Error::Domain(format!("nested polygons need rank 3, matrix has rank {rank}")));
    }
    if (0..p.ncols()).any(|j| p.col(j).iter().all(|x| x.is_zero())) {
        return Err(Error::Domain("nested polygons need nonzero columns".into()));
    }
    let f = factor(p)?;
    let (a, b) = (&f.a, &f.b);
    let m = a.nrows();
    let c: [T; 3] = std::array::from_fn(|k| a.col(k).into_iter().fold(T::zero(), |x, y| x + y));
    let tol = if T::is_exact() { 0.0 } else { 1e-12 };

    // In factor coordinates, outer vertices are meets of two constraint lines
    // that satisfy every other constraint.
    let mut outer_x: Vec<[T; 3]> = Vec::new();
    for k in 0..m {
        for l in k + 1..m {
            let x = cross(&row3(a, k), &row3(a, l));
            let s = dot(&c, &x);
            if s.is_negligible(tol * a.max_abs_f64().powi(3)) {
                continue;
            }
            let x = x.map(|e| e / s.clone());
            let feasible = (0..m).all(|r| {
                let v = dot(&row3(a, r), &x);
                v >= T::zero() || v.is_negligible(tol)
            });
            let duplicate = outer_x
                .iter()
                .any(|y| (0..3).all(|t| (y[t].clone() - x[t].clone()).is_negligible(tol)));
            if feasible && !duplicate {
                outer_x.push(x);
            }
        }
    }
    let columns_x: Vec<[T; 3]> = (0..b.ncols())
        .map(|j| {
            let bj = col3(b, j);
            let s = dot(&c, &bj);
            bj.map(|e| e / s.clone())
        })
        .collect();

    // Chart: drop the coordinate with the largest |c_d|, which is nonzero
    // because c . x = 1 on the plane.
    let d = (0..3)
        .max_by(|&x, &y| c[x].magnitude().partial_cmp(&c[y].magnitude()).unwrap_or(Ordering::Equal))
        .unwrap();
    let keep: Vec<usize> = (0..3).filter(|&t| t != d).collect();
    let chart = |x: &[T; 3]| -> [T; 2] { [x[keep[0]].clone(), x[keep[1]].clone()] };
    let lift = |x: &[T; 3]| -> Vec<T> {
        (0..m)
            .map(|i| dot(&row3(a, i), x))
            .collect()
    };

    let outer_2d: Vec<[T; 2]> = outer_x.iter().map(chart).collect();
    let order = cyclic_order(&outer_2d);
    let outer_2d: Vec<[T; 2]> = order.iter().map(|&k| outer_2d[k].clone()).collect();
    let outer: Vec<Vec<T>> = order.iter().map(|&k| lift(&outer_x[k])).collect();

    let col_2d: Vec<[T; 2]> = columns_x.iter().map(chart).collect();
    let inner_idx = hull(&col_2d, tol);
    let inner_2d: Vec<[T; 2]> = inner_idx.iter().map(|&k| col_2d[k].clone()).collect();
    let columns: Vec<Vec<T>> = (0..p.ncols())
        .map(|j| {
            let col = p.col(j);
            let s = col.iter().cloned().fold(T::zero(), |x, y| x + y);
            col.into_iter().map(|x| x / s.clone()).collect()
        })
        .collect();
    let inner = inner_idx.iter().map(|&k| columns[k].clone()).collect();
    Ok(NestedPolygons {
        outer,
        inner,
        outer_2d,
        inner_2d,
        columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rational, Rational};

    fn rectangle(a: Rational, b: Rational) -> Matrix<Rational> {
        let one = int(1);
        Matrix::from_rows(vec![
            vec![&one - &a, &one + &a, &one + &a, &one - &a],
            vec![&one - &b, &one - &b, &one + &b, &one + &b],
            vec![&one + &a, &one - &a, &one - &a, &one + &a],
            vec![&one + &b, &one + &b, &one - &b, &one - &b],
        ])
        .unwrap()
    }

    #[test]
    fn rectangle_family_gives_square_and_rectangle() {
        let np = nested_polygons(&rectangle(rational(1, 4), rational(1, 3))).unwrap();
        assert_eq!(np.outer.len(), 4);
        assert_eq!(np.inner.len(), 4);
        for v in &np.outer {
            // the outer square lies on x1 - x2 + x3 - x4 = 0
            assert_eq!(&v[0] - &v[1] + &v[2] - &v[3], int(0));
            assert_eq!(v.iter().sum::<Rational>(), int(1));
            assert_eq!(v.iter().filter(|x| **x == int(0)).count(), 2);
        }
        assert!(np.inner_within_outer(0.0));
    }

    #[test]
    fn inner_equals_outer_for_the_design_matrix() {
        // columns are the four vertices of the square of the rectangle family
        let p = Matrix::from_i64_rows(&[&[1, 1, 0, 0], &[1, 0, 0, 1], &[0, 0, 1, 1], &[0, 1, 1, 0]]).unwrap();
        let np = nested_polygons(&p).unwrap();
        let mut outer = np.outer.clone();
        let mut inner = np.inner.clone();
        outer.sort();
        inner.sort();
        assert_eq!(outer, inner);
    }

    #[test]
    fn rejects_wrong_rank() {
        let p = Matrix::from_fn(3, 3, |_, _| int(1));
        assert!(matches!(nested_polygons(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn float_backend_agrees() {
        let p = rectangle(rational(1, 4), rational(1, 3));
        let exact = nested_polygons(&p).unwrap();
        let float = nested_polygons(&p.to_f64()).unwrap();
        assert_eq!(exact.outer.len(), float.outer.len());
        assert_eq!(exact.inner.len(), float.inner.len());
        assert!(float.inner_within_outer(1e-12));
    }
}
