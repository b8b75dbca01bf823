//! Planted coupled-domain data with known transforms and mappings.
//!
//! Each subject gets a Gaussian latent code `c`. Its domain-1 code is `c`,
//! its domain-2 code is `M12 c`, and the observed features are
//! `X_i = T_i^-1 Z_i` plus optional noise. Columns are ordered subject-major:
//! column `s * r + j` is sample `j` of subject `s`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::condition_number;
use crate::matrix::FeatureMatrix;
use crate::scalar::Scalar;

/// Attempts at drawing a matrix within the condition bound.
pub const MAX_DRAWS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub dim: usize,
    pub subjects: usize,
    pub samples_per_subject: usize,
    /// Noise column norm relative to the RMS clean column norm of each domain.
    pub noise: f64,
    /// Upper bound on the condition number of every ground-truth matrix.
    pub cond_bound: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            dim: 32,
            subjects: 100,
            samples_per_subject: 5,
            noise: 0.0,
            cond_bound: 50.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.subjects == 0 || self.samples_per_subject == 0 {
            return Err(Error::InvalidParams(
                "dim, subjects and samples per subject must all be >= 1".into(),
            ));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::InvalidParams(format!("noise must be >= 0, got {}", self.noise)));
        }
        if self.cond_bound.is_nan() {
            return Err(Error::InvalidParams("condition bound is NaN".into()));
        }
        Ok(())
    }
}

/// The matrices the data was generated from.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<T: Scalar> {
    pub t1: DMatrix<T>,
    pub t2: DMatrix<T>,
    pub m12: DMatrix<T>,
    /// Inverse of `m12`.
    pub m21: DMatrix<T>,
}

#[derive(Debug, Clone)]
pub struct SyntheticData<T: Scalar> {
    pub x1: FeatureMatrix<T>,
    pub x2: FeatureMatrix<T>,
    pub labels: Vec<String>,
    pub truth: GroundTruth<T>,
    /// Noise-free codes `Z1`, `Z2`.
    pub z1: FeatureMatrix<T>,
    pub z2: FeatureMatrix<T>,
    pub samples_per_subject: usize,
}

impl<T: Scalar> SyntheticData<T> {
    /// Column indices of the given per-subject sample numbers, subject-major.
    pub fn columns_for_samples(&self, samples: &[usize]) -> Vec<usize> {
        let r = self.samples_per_subject;
        let subjects = self.labels.len() / r;
        (0..subjects)
            .flat_map(|s| samples.iter().filter(|&&j| j < r).map(move |&j| s * r + j))
            .collect()
    }

    pub fn labels_for(&self, columns: &[usize]) -> Vec<String> {
        columns.iter().map(|&c| self.labels[c].clone()).collect()
    }
}

pub fn subject_label(s: usize) -> String {
    format!("subject{s:04}")
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let qr = gaussian(rng, d, d).qr();
    let (q, r) = qr.unpack();
    // Fix column signs so the draw is Haar-distributed.
    let mut q = q;
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `U diag(s) V^T` with log-uniform singular values in `[1, bound]`.
fn well_conditioned(rng: &mut ChaCha8Rng, d: usize, bound: f64) -> Result<DMatrix<f64>> {
    for _ in 0..MAX_DRAWS {
        if bound < 1.0 {
            break;
        }
        let u = orthogonal(rng, d);
        let v = orthogonal(rng, d);
        let log_bound = bound.ln();
        let s = DVector::from_fn(d, |_, _| (rng.random::<f64>() * log_bound).exp());
        let m = &u * DMatrix::from_diagonal(&s) * v.transpose();
        if condition_number(&m) <= bound * (1.0 + 1e-9) {
            return Ok(m);
        }
    }
    Err(Error::ConditionInfeasible {
        bound,
        attempts: MAX_DRAWS,
    })
}

fn invert(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("ground-truth matrix is not invertible".into()))
}

fn add_noise(rng: &mut ChaCha8Rng, x: &mut DMatrix<f64>, level: f64) {
    if level == 0.0 {
        return;
    }
    let rms = (x.norm_squared() / x.ncols() as f64).sqrt();
    let scale = level * rms / (x.nrows() as f64).sqrt();
    for v in x.iter_mut() {
        *v += scale * rng.sample::<f64, _>(StandardNormal);
    }
}

/// Generates a planted coupled dataset. Deterministic for a fixed spec.
pub fn gen_synthetic_coupled<T: Scalar>(spec: &SyntheticSpec) -> Result<SyntheticData<T>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.dim;
    let r = spec.samples_per_subject;
    let n = spec.subjects * r;

    let t1 = well_conditioned(&mut rng, d, spec.cond_bound)?;
    let t2 = well_conditioned(&mut rng, d, spec.cond_bound)?;
    let m12 = well_conditioned(&mut rng, d, spec.cond_bound)?;
    let m21 = invert(&m12)?;

    let latent = gaussian(&mut rng, d, spec.subjects);
    let z1 = DMatrix::from_fn(d, n, |i, c| latent[(i, c / r)]);
    let z2 = &m12 * &z1;
    let mut x1 = invert(&t1)? * &z1;
    let mut x2 = invert(&t2)? * &z2;
    add_noise(&mut rng, &mut x1, spec.noise);
    add_noise(&mut rng, &mut x2, spec.noise);

    let labels = (0..n).map(|c| subject_label(c / r)).collect();
    let cast = |m: &DMatrix<f64>| m.map(T::lit);
    Ok(SyntheticData {
        x1: FeatureMatrix::new(cast(&x1))?,
        x2: FeatureMatrix::new(cast(&x2))?,
        labels,
        truth: GroundTruth {
            t1: cast(&t1),
            t2: cast(&t2),
            m12: cast(&m12),
            m21: cast(&m21),
        },
        z1: FeatureMatrix::new(cast(&z1))?,
        z2: FeatureMatrix::new(cast(&z2))?,
        samples_per_subject: r,
    })
}
