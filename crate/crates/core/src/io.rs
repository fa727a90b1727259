//! JSON file formats for matrices and vectors.
//!
//! A matrix file looks like
//! `{"n_rows":2,"n_cols":2,"precision":"exact","entries":[["0","0"],["1/2","0"],...]}`
//! with row-major `[re, im]` pairs given as decimal strings, `p/q` strings or
//! plain JSON numbers. Writing uses a lossless text form, so rational entries
//! and float entries both read back bit-exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::backend::DynMatrix;
use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};
use crate::precision::Precision;
use crate::scalar::{Field, parse_rational};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    n_rows: usize,
    n_cols: usize,
    precision: Precision,
    entries: Vec<[Value; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorFile {
    dim: usize,
    precision: Precision,
    components: Vec<[Value; 2]>,
}

fn literal(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::parse(format!("expected a number or string, got {other}"))),
    }
}

fn parse_entry<T: Field>(pair: &[Value; 2], ctx: T::Ctx, file_precision: Precision) -> Result<Complex<T>> {
    let one = |v: &Value| -> Result<T> {
        let s = literal(v)?;
        if T::EXACT || file_precision.is_exact() {
            Ok(T::from_rational(&parse_rational(&s)?, ctx))
        } else {
            T::parse_str(&s, ctx)
        }
    };
    Ok(Complex::new(one(&pair[0])?, one(&pair[1])?))
}

fn render<T: Field>(z: &Complex<T>) -> [Value; 2] {
    [
        Value::String(z.re.to_exact_string()),
        Value::String(z.im.to_exact_string()),
    ]
}

/// Serializes a matrix to the JSON file format.
pub fn matrix_to_json<T: Field>(m: &Matrix<T>) -> Result<String> {
    let file = MatrixFile {
        n_rows: m.rows(),
        n_cols: m.cols(),
        precision: m.precision(),
        entries: m.entries().iter().map(render).collect(),
    };
    Ok(serde_json::to_string(&file)?)
}

fn parse_matrix_file(text: &str) -> Result<MatrixFile> {
    let file: MatrixFile = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("malformed matrix file: {e}")))?;
    if file.n_rows == 0 || file.n_cols == 0 {
        return Err(Error::parse("matrix dimensions must be positive"));
    }
    if file.entries.len() != file.n_rows * file.n_cols {
        return Err(Error::parse(format!(
            "{} entries for a {}x{} matrix",
            file.entries.len(),
            file.n_rows,
            file.n_cols
        )));
    }
    Ok(file)
}

fn build_matrix<T: Field>(file: &MatrixFile, ctx: T::Ctx) -> Result<Matrix<T>> {
    let data = file
        .entries
        .iter()
        .map(|p| parse_entry::<T>(p, ctx, file.precision))
        .collect::<Result<Vec<_>>>()?;
    Matrix::new(file.n_rows, file.n_cols, ctx, data)
}

/// Parses a matrix in the precision recorded in the file.
pub fn matrix_from_json(text: &str) -> Result<DynMatrix> {
    let file = parse_matrix_file(text)?;
    Ok(match file.precision {
        Precision::Exact => DynMatrix::Exact(build_matrix(&file, ())?),
        Precision::BigFloat { bits } => DynMatrix::Big(build_matrix(&file, bits)?),
        Precision::Machine => DynMatrix::Machine(build_matrix(&file, ())?),
    })
}

/// Parses a matrix into a given backend.
///
/// Float files cannot be read into the exact backend; exact files can be
/// read into any backend (rounded once per entry).
pub fn matrix_from_json_as<T: Field>(text: &str, ctx: T::Ctx) -> Result<Matrix<T>> {
    let file = parse_matrix_file(text)?;
    if T::EXACT && !file.precision.is_exact() {
        return Err(Error::invalid(format!(
            "exact precision needs an exact matrix file, this one is {}",
            file.precision
        )));
    }
    build_matrix(&file, ctx)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DynMatrix> {
    matrix_from_json(&std::fs::read_to_string(path)?)
}

pub fn load_matrix_as<T: Field>(path: impl AsRef<Path>, ctx: T::Ctx) -> Result<Matrix<T>> {
    matrix_from_json_as(&std::fs::read_to_string(path)?, ctx)
}

pub fn save_matrix<T: Field>(m: &Matrix<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, matrix_to_json(m)?)?;
    Ok(())
}

pub fn vector_to_json<T: Field>(v: &Vector<T>) -> Result<String> {
    let file = VectorFile {
        dim: v.dim(),
        precision: T::precision(v.ctx()),
        components: v.as_slice().iter().map(render).collect(),
    };
    Ok(serde_json::to_string(&file)?)
}

/// Parses a vector file (`{"dim", "precision", "components"}`) into a backend.
pub fn vector_from_json_as<T: Field>(text: &str, ctx: T::Ctx) -> Result<Vector<T>> {
    let file: VectorFile = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("malformed vector file: {e}")))?;
    if file.components.len() != file.dim {
        return Err(Error::parse(format!(
            "{} components for a {}-vector",
            file.components.len(),
            file.dim
        )));
    }
    if T::EXACT && !file.precision.is_exact() {
        return Err(Error::invalid("exact precision needs an exact vector file"));
    }
    let data = file
        .components
        .iter()
        .map(|p| parse_entry::<T>(p, ctx, file.precision))
        .collect::<Result<Vec<_>>>()?;
    Vector::new(ctx, data)
}

pub fn load_vector_as<T: Field>(path: impl AsRef<Path>, ctx: T::Ctx) -> Result<Vector<T>> {
    vector_from_json_as(&std::fs::read_to_string(path)?, ctx)
}

pub fn save_vector<T: Field>(v: &Vector<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, vector_to_json(v)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_block_a;
    use proptest::prelude::*;
    use rug::{Float, Rational};

    #[test]
    fn exact_round_trip() {
        let a = build_block_a(4, &Rational::from((3, 2))).unwrap();
        let json = matrix_to_json(&a).unwrap();
        assert!(json.contains("\"3/2\""));
        match matrix_from_json(&json).unwrap() {
            DynMatrix::Exact(b) => assert_eq!(a, b),
            other => panic!("wrong backend {:?}", other.precision()),
        }
    }

    #[test]
    fn float_round_trips_are_bit_exact() {
        let m = Matrix::<Float>::from_fn(2, 2, 200, |i, j| {
            let x = Float::with_val(200, (i + 2 * j + 1) as u32).sqrt();
            Complex::new(x.clone(), -x / 3u32)
        });
        let back = matrix_from_json_as::<Float>(&matrix_to_json(&m).unwrap(), 200).unwrap();
        assert_eq!(back, m);
        let f = Matrix::<f64>::from_fn(1, 3, (), |_, j| Complex::new(0.1 * j as f64, 1.0 / 3.0));
        let back = matrix_from_json_as::<f64>(&matrix_to_json(&f).unwrap(), ()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn machine_file_loads_as_machine() {
        let json = r#"{"n_rows":1,"n_cols":2,"precision":"machine","entries":[[0.5,0],["-1.25","2"]]}"#;
        let m = matrix_from_json(json).unwrap();
        assert_eq!(m.precision(), Precision::Machine);
        assert!(matrix_from_json_as::<Rational>(json, ()).is_err());
    }

    #[test]
    fn malformed_files_are_rejected() {
        let short = r#"{"n_rows":2,"n_cols":2,"precision":"exact","entries":[["1","0"]]}"#;
        assert!(matches!(matrix_from_json(short), Err(Error::Parse(_))));
        let garbage = r#"{"n_rows":1,"n_cols":1,"precision":"exact","entries":[["x","0"]]}"#;
        assert!(matrix_from_json(garbage).is_err());
        assert!(matrix_from_json("not json").is_err());
        let bad_prec = r#"{"n_rows":1,"n_cols":1,"precision":"big:12","entries":[["1","0"]]}"#;
        assert!(matrix_from_json(bad_prec).is_err());
    }

    #[test]
    fn files_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.json");
        let a = build_block_a(6, &Rational::from((1, 2))).unwrap();
        save_matrix(&a, &path).unwrap();
        assert_eq!(load_matrix_as::<Rational>(&path, ()).unwrap(), a);
        let v = Vector::<Rational>::basis(3, 1, ());
        let vp = dir.path().join("v.json");
        save_vector(&v, &vp).unwrap();
        assert_eq!(load_vector_as::<Rational>(&vp, ()).unwrap(), v);
    }

    proptest! {
        #[test]
        fn rational_entries_round_trip(vals in prop::collection::vec((-1000i64..1000, 1i64..1000), 6)) {
            let data = vals
                .chunks(2)
                .map(|c| Complex::new(Rational::from((c[0].0, c[0].1)), Rational::from((c[1].0, c[1].1))))
                .collect();
            let m = Matrix::<Rational>::new(1, 3, (), data).unwrap();
            let back = matrix_from_json_as::<Rational>(&matrix_to_json(&m).unwrap(), ()).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
