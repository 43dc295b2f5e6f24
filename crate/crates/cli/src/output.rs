use std::fs;
use std::io::{ErrorKind, Write};
use std::path::Path;

use mixbound::exactla::text::{parse_exact, parse_float, parse_matrix, promote, promotion_perturbation, write_matrix, AnyMatrix};
use mixbound::{Backend, Error, Matrix, Rational, Result, Scalar};
use serde_json::{json, Value};

use crate::{BackendArg, Common};

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

/// An input matrix on the backend chosen by flag or by file contents.
pub enum Loaded {
    Exact {
        matrix: Matrix<Rational>,
        /// Largest entry change when float input was promoted.
        perturbation: Option<f64>,
    },
    Float(Matrix<f64>),
}

impl Loaded {
    pub fn backend_name(&self) -> &'static str {
        match self {
            Loaded::Exact { perturbation: Some(_), .. } => "promote",
            Loaded::Exact { .. } => "exact",
            Loaded::Float(_) => "float",
        }
    }

    pub fn perturbation(&self) -> Option<f64> {
        match self {
            Loaded::Exact { perturbation, .. } => *perturbation,
            Loaded::Float(_) => None,
        }
    }
}

pub fn load(path: &Path, backend: Option<BackendArg>) -> Result<Loaded> {
    let text = read(path)?;
    Ok(match backend {
        Some(BackendArg::Exact) => Loaded::Exact {
            matrix: parse_exact(&text)?,
            perturbation: None,
        },
        Some(BackendArg::Float) => Loaded::Float(parse_float(&text)?),
        Some(BackendArg::Promote) => {
            let float = parse_float(&text)?;
            let matrix = promote(&float)?;
            let perturbation = Some(promotion_perturbation(&float, &matrix));
            Loaded::Exact { matrix, perturbation }
        }
        None => match parse_matrix(&text)? {
            AnyMatrix::Exact(matrix) => Loaded::Exact {
                matrix,
                perturbation: None,
            },
            AnyMatrix::Float(m) => Loaded::Float(m),
        },
    })
}

/// Rationals as strings `p/q`, floats as JSON numbers.
pub fn matrix_json<T: Scalar>(m: &Matrix<T>) -> Value {
    let rows: Vec<Value> = m
        .rows_iter()
        .map(|row| {
            row.iter()
                .map(|x| match T::BACKEND {
                    Backend::Exact => Value::String(x.to_text()),
                    Backend::Float => json!(x.to_f64()),
                })
                .collect()
        })
        .collect();
    Value::Array(rows)
}

pub fn write_matrix_file<T: Scalar>(path: &Path, m: &Matrix<T>) -> Result<()> {
    write(path, &write_matrix(m))
}

/// Adds the schema tag and writes the report to the chosen destination.
pub fn emit(common: &Common, mut value: Value) -> Result<()> {
    if let Value::Object(map) = &mut value {
        map.insert("schema".into(), Value::String("1".into()));
    }
    let text = serde_json::to_string_pretty(&value).map_err(|e| Error::Config(e.to_string()))?;
    emit_text(common, &text)
}

pub fn emit_text(common: &Common, text: &str) -> Result<()> {
    match &common.output {
        Some(path) => write(path, &format!("{text}\n")),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(Error::Config(format!("cannot write to stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

pub fn to_value<T: serde::Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::Config(e.to_string()))
}
