//! Runtime backend selection.

use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::io;
use crate::matrix::Matrix;
use crate::models::ModelSpec;
use crate::precision::Precision;

/// A matrix whose backend is chosen at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum DynMatrix {
    Exact(Matrix<Rational>),
    Big(Matrix<Float>),
    Machine(Matrix<f64>),
}

/// Runs a generic expression on whichever backend a [`DynMatrix`] holds.
#[macro_export]
macro_rules! with_matrix {
    ($m:expr, $a:ident => $body:expr) => {
        match $m {
            $crate::backend::DynMatrix::Exact($a) => $body,
            $crate::backend::DynMatrix::Big($a) => $body,
            $crate::backend::DynMatrix::Machine($a) => $body,
        }
    };
}

impl DynMatrix {
    pub fn precision(&self) -> Precision {
        with_matrix!(self, m => m.precision())
    }

    pub fn rows(&self) -> usize {
        with_matrix!(self, m => m.rows())
    }

    pub fn cols(&self) -> usize {
        with_matrix!(self, m => m.cols())
    }

    /// Builds a model in the requested backend.
    pub fn build(spec: &ModelSpec, precision: Precision) -> Result<Self> {
        Ok(match precision {
            Precision::Exact => DynMatrix::Exact(spec.build(())?),
            Precision::BigFloat { bits } => DynMatrix::Big(spec.build(bits)?),
            Precision::Machine => DynMatrix::Machine(spec.build(())?),
        })
    }

    /// Re-expresses the matrix in another backend. Only exact matrices can
    /// move into the exact backend.
    pub fn convert(&self, precision: Precision) -> Result<Self> {
        if precision.is_exact() && !self.precision().is_exact() {
            return Err(Error::invalid(format!(
                "cannot convert a {} matrix to exact precision",
                self.precision()
            )));
        }
        with_matrix!(self, m => Ok(match precision {
            Precision::Exact => DynMatrix::Exact(m.convert(())?),
            Precision::BigFloat { bits } => DynMatrix::Big(m.convert(bits)?),
            Precision::Machine => DynMatrix::Machine(m.convert(())?),
        }))
    }

    pub fn to_json(&self) -> Result<String> {
        with_matrix!(self, m => io::matrix_to_json(m))
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        with_matrix!(self, m => io::save_matrix(m, path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_and_convert() {
        let spec = ModelSpec::block_transfer(4, Rational::from(2));
        let exact = DynMatrix::build(&spec, Precision::Exact).unwrap();
        assert_eq!(exact.precision(), Precision::Exact);
        let big = exact.convert(Precision::BigFloat { bits: 128 }).unwrap();
        assert_eq!(big.precision(), Precision::BigFloat { bits: 128 });
        assert!(big.convert(Precision::Exact).is_err());
        let machine = DynMatrix::build(&spec, Precision::Machine).unwrap();
        assert_eq!(machine, exact.convert(Precision::Machine).unwrap());
        assert_eq!((machine.rows(), machine.cols()), (4, 4));
    }
}
