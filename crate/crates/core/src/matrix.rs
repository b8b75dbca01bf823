//! Column-major sample matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A `dim x count` real matrix whose columns are samples.
///
/// Construction checks that the matrix is non-empty and every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T: Scalar>(DMatrix<T>);

impl<T: Scalar> FeatureMatrix<T> {
    pub fn new(data: DMatrix<T>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::EmptyMatrix {
                rows: data.nrows(),
                cols: data.ncols(),
            });
        }
        for (j, col) in data.column_iter().enumerate() {
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
        Ok(Self(data))
    }

    /// Builds from samples laid out one after another (column-major).
    pub fn from_column_slice(dim: usize, count: usize, values: &[T]) -> Result<Self> {
        if values.len() != dim * count {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {dim}x{count} matrix",
                values.len()
            )));
        }
        Self::new(DMatrix::from_column_slice(dim, count, values))
    }

    /// Wraps the result of an internal computation on finite inputs.
    pub(crate) fn from_trusted(data: DMatrix<T>) -> Self {
        debug_assert!(data.nrows() > 0 && data.ncols() > 0);
        Self(data)
    }

    /// Like [`FeatureMatrix::new`], but reports non-finite output as a numerical failure.
    pub(crate) fn from_computed(data: DMatrix<T>, what: &str) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular(format!("{what} produced non-finite values")));
        }
        Ok(Self::from_trusted(data))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.0.ncols()
    }

    #[inline]
    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.0
    }

    /// Keeps the listed sample columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptyMatrix {
                rows: self.dim(),
                cols: 0,
            });
        }
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.count()) {
            return Err(Error::ShapeMismatch(format!(
                "column {bad} out of range for {} samples",
                self.count()
            )));
        }
        Ok(Self(self.0.select_columns(columns)))
    }

    /// Converts to another scalar type through `f64`.
    pub fn cast<U: Scalar>(&self) -> FeatureMatrix<U> {
        FeatureMatrix(self.0.map(|v| U::lit(v.as_f64())))
    }
}

impl<T: Scalar> AsRef<DMatrix<T>> for FeatureMatrix<T> {
    fn as_ref(&self) -> &DMatrix<T> {
        &self.0
    }
}

impl<T: Scalar> TryFrom<DMatrix<T>> for FeatureMatrix<T> {
    type Error = Error;

    fn try_from(value: DMatrix<T>) -> Result<Self> {
        Self::new(value)
    }
}
