//! Binary containers for matrices and trained models.
//!
//! All integers are little-endian `u64`, all reals little-endian IEEE-754
//! `f64`. A matrix block is `rows, cols` followed by `rows * cols` values in
//! row-major order.
//!
//! Matrix file:
//!
//! ```text
//! "CDTLMAT\0"  u8 version=1  <matrix block>
//! ```
//!
//! Model file:
//!
//! ```text
//! "CDTLMDL\0"  u8 version=1  u8 kind (0 semi, 1 symmetric)  u64 depth
//! depth times, for domain 1 then domain 2:
//!     f64 lambda  f64 epsilon  f64 mu  u64 tau (0 = dense)  <matrix block T>
//! <matrix block M12>
//! <matrix block M21>          (symmetric models only)
//! ```
//!
//! No trailing bytes are allowed.

use std::path::Path;

use nalgebra::DMatrix;

use crate::coupled::MappingMatrix;
use crate::deep::{DeepTransformer, Domain, ModelKind};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::transform::{RegularizationParams, SparsityBudget, TransformLayer};

pub const MATRIX_MAGIC: &[u8; 8] = b"CDTLMAT\0";
pub const MODEL_MAGIC: &[u8; 8] = b"CDTLMDL\0";
pub const FORMAT_VERSION: u8 = 1;

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_matrix<T: Scalar>(out: &mut Vec<u8>, m: &DMatrix<T>) {
    put_u64(out, m.nrows() as u64);
    put_u64(out, m.ncols() as u64);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            put_f64(out, m[(i, j)].as_f64());
        }
    }
}

/// Byte cursor that reports errors against a file path.
struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8], path: &'a Path) -> Self {
        Self { bytes, pos: 0, path }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else {
            return Err(Error::Truncated {
                path: self.path.to_path_buf(),
                reason: format!("missing {what} at byte {}", self.pos),
            });
        };
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn header(&mut self, magic: &[u8; 8]) -> Result<()> {
        let got = self.take(8, "magic")?;
        if got != magic {
            return Err(self.bad_header(format!(
                "expected magic {:?}, found {:?}",
                String::from_utf8_lossy(magic),
                String::from_utf8_lossy(got)
            )));
        }
        let v = self.u8("version")?;
        if v != FORMAT_VERSION {
            return Err(self.bad_header(format!("unsupported version {v}")));
        }
        Ok(())
    }

    fn bad_header(&self, reason: String) -> Error {
        Error::Header {
            path: self.path.to_path_buf(),
            reason,
        }
    }

    fn matrix<T: Scalar>(&mut self, what: &str) -> Result<DMatrix<T>> {
        let rows = self.u64(what)?;
        let cols = self.u64(what)?;
        let overflow = || Error::DimensionOverflow {
            path: self.path.to_path_buf(),
            rows,
            cols,
        };
        let len = rows.checked_mul(cols).ok_or_else(overflow)?;
        let bytes = len.checked_mul(8).ok_or_else(overflow)?;
        let (Ok(r), Ok(c), Ok(bytes)) = (usize::try_from(rows), usize::try_from(cols), usize::try_from(bytes)) else {
            return Err(overflow());
        };
        if bytes > self.bytes.len() - self.pos {
            return Err(Error::Truncated {
                path: self.path.to_path_buf(),
                reason: format!("{what} declares {rows}x{cols} but the file is shorter"),
            });
        }
        let mut m = DMatrix::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                let v = self.f64(what)?;
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue {
                        path: self.path.to_path_buf(),
                        row: i + 1,
                        col: j + 1,
                    });
                }
                m[(i, j)] = T::lit(v);
            }
        }
        Ok(m)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(self.bad_header(format!(
                "{} trailing bytes after payload",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

pub fn is_binary_matrix(bytes: &[u8]) -> bool {
    bytes.starts_with(MATRIX_MAGIC)
}

pub fn encode_matrix<T: Scalar>(m: &DMatrix<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(25 + 8 * m.len());
    out.extend_from_slice(MATRIX_MAGIC);
    out.push(FORMAT_VERSION);
    put_matrix(&mut out, m);
    out
}

/// Decodes a matrix file. `path` is only used in error messages.
pub fn decode_matrix<T: Scalar>(bytes: &[u8], path: &Path) -> Result<DMatrix<T>> {
    if bytes.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    let mut r = Reader::new(bytes, path);
    r.header(MATRIX_MAGIC)?;
    let m = r.matrix("matrix")?;
    r.finish()?;
    Ok(m)
}

pub fn encode_model<T: Scalar>(model: &DeepTransformer<T>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    out.push(FORMAT_VERSION);
    out.push(match model.kind() {
        ModelKind::Semi => 0,
        ModelKind::Symmetric => 1,
    });
    put_u64(&mut out, model.depth() as u64);
    for j in 0..model.depth() {
        for domain in [Domain::One, Domain::Two] {
            let layer = &model.layers(domain)[j];
            put_f64(&mut out, layer.params.lambda.as_f64());
            put_f64(&mut out, layer.params.epsilon.as_f64());
            put_f64(&mut out, layer.params.mu.as_f64());
            put_u64(&mut out, layer.budget.tau().unwrap_or(0) as u64);
            put_matrix(&mut out, &layer.t);
        }
    }
    put_matrix(&mut out, model.map_12().as_matrix());
    if let Some(m) = model.map_21() {
        put_matrix(&mut out, m.as_matrix());
    }
    out
}

pub fn decode_model<T: Scalar>(bytes: &[u8], path: &Path) -> Result<DeepTransformer<T>> {
    if bytes.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    let mut r = Reader::new(bytes, path);
    r.header(MODEL_MAGIC)?;
    let kind = match r.u8("kind")? {
        0 => ModelKind::Semi,
        1 => ModelKind::Symmetric,
        k => return Err(r.bad_header(format!("unknown model kind {k}"))),
    };
    let depth = r.u64("depth")?;
    // Each layer pair needs well over 64 bytes, so this bounds allocation.
    if depth == 0 || depth > (bytes.len() / 64) as u64 {
        return Err(r.bad_header(format!("implausible depth {depth}")));
    }
    let mut layers1 = Vec::new();
    let mut layers2 = Vec::new();
    for _ in 0..depth {
        for stack in [&mut layers1, &mut layers2] {
            let lambda = T::lit(r.f64("lambda")?);
            let epsilon = T::lit(r.f64("epsilon")?);
            let mu = T::lit(r.f64("mu")?);
            let params = RegularizationParams::new(lambda, epsilon, mu)
                .map_err(|e| r.bad_header(e.to_string()))?;
            let tau = r.u64("tau")?;
            let budget = if tau == 0 {
                SparsityBudget::dense()
            } else {
                SparsityBudget::sparse(usize::try_from(tau).map_err(|_| r.bad_header("tau overflow".into()))?)?
            };
            let t = r.matrix("transform")?;
            stack.push(TransformLayer { t, params, budget });
        }
    }
    let map_12 = MappingMatrix::new(r.matrix("map_12")?)?;
    let map_21 = match kind {
        ModelKind::Symmetric => Some(MappingMatrix::new(r.matrix("map_21")?)?),
        ModelKind::Semi => None,
    };
    r.finish()?;
    let model = DeepTransformer::from_parts(kind, layers1, layers2, map_12, map_21)
        .map_err(|e| r.bad_header(e.to_string()))?;
    for layer in model.layers(Domain::One).iter().chain(model.layers(Domain::Two)) {
        layer.budget.check(layer.dim()).map_err(|e| r.bad_header(e.to_string()))?;
    }
    Ok(model)
}
