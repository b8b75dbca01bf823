//! Reading and writing matrices, labels and models.
//!
//! Text matrices are CSV with one sample per row; they are transposed on
//! load so samples become columns. Binary files use the layouts in
//! [`crate::codec`]. Files are written to a temporary sibling and renamed into
//! place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::codec;
use crate::deep::DeepTransformer;
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Binary,
}

impl MatrixFormat {
    /// `.csv` (any case) is text, everything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::Binary,
        }
    }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    Ok(bytes)
}

/// Loads a matrix, recognising the binary format by its magic bytes.
pub fn load_matrix<T: Scalar>(path: &Path) -> Result<FeatureMatrix<T>> {
    let bytes = read(path)?;
    let m = if codec::is_binary_matrix(&bytes) {
        codec::decode_matrix(&bytes, path)?
    } else {
        parse_csv(&bytes, path)?
    };
    FeatureMatrix::new(m)
}

/// Parses sample-per-row CSV into a sample-per-column matrix.
pub fn parse_csv<T: Scalar>(bytes: &[u8], path: &Path) -> Result<DMatrix<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes);
    let mut values: Vec<T> = Vec::new();
    let mut width = 0usize;
    let mut rows = 0usize;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Header {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        rows += 1;
        if rows == 1 {
            width = rec.len();
        } else if rec.len() != width {
            return Err(Error::Ragged {
                path: path.to_path_buf(),
                row: rows,
                expected: width,
                found: rec.len(),
            });
        }
        for (j, tok) in rec.iter().enumerate() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row: rows,
                col: j + 1,
                token: tok.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    path: path.to_path_buf(),
                    row: rows,
                    col: j + 1,
                });
            }
            values.push(T::lit(v));
        }
    }
    if rows == 0 {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    // Row-major samples are exactly the column-major layout of the transpose.
    Ok(DMatrix::from_column_slice(width, rows, &values))
}

/// Renders a matrix as sample-per-row CSV using shortest round-trip formatting.
pub fn format_csv<T: Scalar>(m: &DMatrix<T>) -> String {
    let mut s = String::with_capacity(m.len() * 20);
    for col in m.column_iter() {
        for (i, v) in col.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&v.as_f64().to_string());
        }
        s.push('\n');
    }
    s
}

pub fn save_matrix<T: Scalar>(path: &Path, m: &FeatureMatrix<T>) -> Result<()> {
    save_matrix_as(path, m, MatrixFormat::from_path(path))
}

pub fn save_matrix_as<T: Scalar>(path: &Path, m: &FeatureMatrix<T>, format: MatrixFormat) -> Result<()> {
    let bytes = match format {
        MatrixFormat::Csv => format_csv(m.as_matrix()).into_bytes(),
        MatrixFormat::Binary => codec::encode_matrix(m.as_matrix()),
    };
    write_atomic(path, &bytes)
}

/// One label per line; blank lines are skipped and surrounding spaces trimmed.
pub fn load_labels(path: &Path) -> Result<Vec<String>> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Header {
        path: path.to_path_buf(),
        reason: format!("labels are not UTF-8: {e}"),
    })?;
    let labels: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    if labels.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    Ok(labels)
}

pub fn save_labels(path: &Path, labels: &[String]) -> Result<()> {
    let mut s = String::new();
    for l in labels {
        s.push_str(l);
        s.push('\n');
    }
    write_atomic(path, s.as_bytes())
}

pub fn load_model<T: Scalar>(path: &Path) -> Result<DeepTransformer<T>> {
    codec::decode_model(&read(path)?, path)
}

pub fn save_model<T: Scalar>(path: &Path, model: &DeepTransformer<T>) -> Result<()> {
    write_atomic(path, &codec::encode_model(model))
}
