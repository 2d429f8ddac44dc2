//! JSON encodings of scalars and dense matrices.
//!
//! Rational values are written as integers when integral and `"p/q"` strings
//! otherwise; floats are plain JSON numbers.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::framework::{rational_to_value, value_to_rational, FrameworkError};
use crate::numerics::{Backend, Matrix, Rational, Scalar};

pub fn scalar_value<T: Scalar>(x: &T) -> Value {
    match T::BACKEND {
        Backend::Rational => rational_to_value(&x.to_rational().expect("rational backend")),
        Backend::Float => {
            let f = x.to_f64();
            serde_json::Number::from_f64(f).map_or_else(|| Value::String(f.to_string()), Value::Number)
        }
    }
}

pub fn vector_value<T: Scalar>(v: &[T]) -> Value {
    Value::Array(v.iter().map(scalar_value).collect())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    backend: Backend,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Value>>,
}

pub fn write_matrix<T: Scalar>(m: &Matrix<T>) -> String {
    let file = MatrixFile {
        backend: T::BACKEND,
        rows: m.rows(),
        cols: m.cols(),
        entries: (0..m.rows()).map(|i| m.row(i).iter().map(scalar_value).collect()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("serializable");
    text.push('\n');
    text
}

/// Reads a matrix file exactly, whatever backend wrote it. Floats written by
/// the float backend come back as the rationals they denote.
pub fn read_matrix(text: &str) -> Result<Matrix<Rational>, FrameworkError> {
    read_matrix_with_backend(text).map(|(_, m)| m)
}

/// Like [`read_matrix`], also returning the backend recorded in the file.
pub fn read_matrix_with_backend(text: &str) -> Result<(Backend, Matrix<Rational>), FrameworkError> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| FrameworkError::Parse {
        line: Some(e.line()),
        field: "matrix".into(),
        message: e.to_string(),
    })?;
    if file.entries.len() != file.rows || file.entries.iter().any(|r| r.len() != file.cols) {
        return Err(FrameworkError::Parse {
            line: None,
            field: "entries".into(),
            message: format!("expected {}x{} entries", file.rows, file.cols),
        });
    }
    let mut data = Vec::with_capacity(file.rows * file.cols);
    for (i, row) in file.entries.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            data.push(value_to_rational(v, &format!("entries[{i}][{j}]"))?);
        }
    }
    Ok((file.backend, Matrix::from_vec(file.rows, file.cols, data)))
}
