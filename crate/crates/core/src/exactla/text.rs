//! Plain-text matrix format shared by the library and the CLI.
//!
//! One row per line, entries separated by commas. Rational entries are
//! written as integers or `p/q`, float entries in decimal or scientific
//! notation. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, rationalize, Backend, Rational, Scalar};

/// Denominator used when float entries are promoted to rationals.
pub const PROMOTE_DENOMINATOR: i64 = 1_000_000_000_000;

/// A matrix read from text, in whichever backend its entries call for.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMatrix {
    Exact(Matrix<Rational>),
    Float(Matrix<f64>),
}

impl AnyMatrix {
    pub fn backend(&self) -> Backend {
        match self {
            AnyMatrix::Exact(_) => Backend::Exact,
            AnyMatrix::Float(_) => Backend::Float,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            AnyMatrix::Exact(m) => m.shape(),
            AnyMatrix::Float(m) => m.shape(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        match self {
            AnyMatrix::Exact(m) => m.to_f64(),
            AnyMatrix::Float(m) => m.clone(),
        }
    }

    /// Exact view. Rational input is returned unchanged; float entries are
    /// rounded to denominator [`PROMOTE_DENOMINATOR`].
    pub fn promote(&self) -> Result<Matrix<Rational>> {
        match self {
            AnyMatrix::Exact(m) => Ok(m.clone()),
            AnyMatrix::Float(m) => promote(m),
        }
    }
}

/// Rounds every entry to a rational with denominator [`PROMOTE_DENOMINATOR`].
pub fn promote(m: &Matrix<f64>) -> Result<Matrix<Rational>> {
    let data = m
        .data()
        .iter()
        .map(|&x| {
            rationalize(x, PROMOTE_DENOMINATOR)
                .ok_or_else(|| Error::Numeric(format!("cannot promote non-finite entry {x}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Matrix::new(m.nrows(), m.ncols(), data)
}

/// Largest absolute entrywise change caused by [`promote`].
pub fn promotion_perturbation(m: &Matrix<f64>, promoted: &Matrix<Rational>) -> f64 {
    m.data()
        .iter()
        .zip(promoted.data())
        .map(|(x, q)| (x - q.to_f64()).abs())
        .fold(0.0, f64::max)
}

fn is_float_token(t: &str) -> bool {
    !t.contains('/') && t.contains(['.', 'e', 'E'])
}

fn split_rows(text: &str) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter_map(|(idx, line)| {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                None
            } else {
                Some((idx + 1, line.split(',').map(str::trim).collect()))
            }
        })
        .collect()
}

fn check_shape(rows: &[(usize, Vec<&str>)]) -> Result<usize> {
    let Some((_, first)) = rows.first() else {
        return Err(Error::Parse {
            line: 0,
            message: "no matrix rows found".into(),
        });
    };
    let n = first.len();
    for (line, r) in rows {
        if r.len() != n {
            return Err(Error::Parse {
                line: *line,
                message: format!("expected {n} entries, found {}", r.len()),
            });
        }
    }
    Ok(n)
}

/// Parses a matrix. Files containing any decimal or scientific entry are
/// read as floats; otherwise entries are read as exact rationals.
pub fn parse_matrix(text: &str) -> Result<AnyMatrix> {
    let rows = split_rows(text);
    check_shape(&rows)?;
    let any_float = rows
        .iter()
        .any(|(_, r)| r.iter().any(|t| is_float_token(t)));
    if any_float {
        parse_float_rows(&rows).map(AnyMatrix::Float)
    } else {
        parse_exact_rows(&rows).map(AnyMatrix::Exact)
    }
}

/// Parses every entry exactly, including decimal literals.
pub fn parse_exact(text: &str) -> Result<Matrix<Rational>> {
    let rows = split_rows(text);
    check_shape(&rows)?;
    parse_exact_rows(&rows)
}

pub fn parse_float(text: &str) -> Result<Matrix<f64>> {
    let rows = split_rows(text);
    check_shape(&rows)?;
    parse_float_rows(&rows)
}

fn parse_exact_rows(rows: &[(usize, Vec<&str>)]) -> Result<Matrix<Rational>> {
    let mut out = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        let parsed = r
            .iter()
            .map(|t| {
                parse_rational(t).ok_or_else(|| Error::Parse {
                    line: *line,
                    message: format!("invalid rational entry {t:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(parsed);
    }
    Matrix::from_rows(out)
}

fn parse_float_rows(rows: &[(usize, Vec<&str>)]) -> Result<Matrix<f64>> {
    let mut out = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        let parsed = r
            .iter()
            .map(|t| parse_float_token(t, *line))
            .collect::<Result<Vec<_>>>()?;
        out.push(parsed);
    }
    Matrix::from_rows(out)
}

fn parse_float_token(t: &str, line: usize) -> Result<f64> {
    let bad = || Error::Parse {
        line,
        message: format!("invalid numeric entry {t:?}"),
    };
    let value = if t.contains('/') {
        parse_rational(t).ok_or_else(bad)?.to_f64()
    } else {
        t.parse::<f64>().map_err(|_| bad())?
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

/// Writes a matrix in the shared format. Floats use 17 significant digits so
/// the output parses back bit-identically.
pub fn write_matrix<T: Scalar>(m: &Matrix<T>) -> String {
    let mut s = String::new();
    for row in m.rows_iter() {
        let cells: Vec<String> = row.iter().map(Scalar::to_text).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn exact_files_stay_exact() {
        let m = parse_matrix("# U\n1, 1/2\n\n3,4\n").unwrap();
        let AnyMatrix::Exact(m) = m else { panic!() };
        assert_eq!(m[(0, 1)], rational(1, 2));
        assert_eq!(m.shape(), (2, 2));
    }

    #[test]
    fn decimal_files_are_float() {
        let m = parse_matrix("0.5,1\n2,1e-3\n").unwrap();
        assert_eq!(m.backend(), Backend::Float);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_matrix("1,2\n# c\n3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_matrix("1,2\nx,4\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(parse_matrix("# nothing\n").is_err());
        assert!(parse_float("1.0,nan\n").is_err());
    }

    #[test]
    fn round_trip() {
        let e = parse_exact("1/3,-2\n0,7/5\n").unwrap();
        assert_eq!(parse_exact(&write_matrix(&e)).unwrap(), e);
        let f = Matrix::from_f64_rows(&[&[0.1, 1.0 / 3.0], &[1e-300, 2.5]]).unwrap();
        let back = parse_float(&write_matrix(&f)).unwrap();
        for (a, b) in f.data().iter().zip(back.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn promotion_reports_perturbation() {
        let f = Matrix::from_f64_rows(&[&[1.0 / 3.0, 0.25]]).unwrap();
        let q = promote(&f).unwrap();
        assert_eq!(q[(0, 1)], rational(1, 4));
        assert!(promotion_perturbation(&f, &q) < 1e-12);
    }
}
