//! Single-domain transform learning.
//!
//! Learns a square transform `T` and codes `Z` minimising
//!
//! ```text
//! ||T X - Z||_F^2 + lambda * (epsilon * ||T||_F^2 - log |det T|)   s.t. ||z_j||_0 <= tau
//! ```
//!
//! by alternating two exact sub-problem solvers: hard thresholding for `Z`
//! and a closed-form transform update for `T`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_with_jitter, frob_sq, log_abs_det, mul_tr, svd, Svd};
use crate::matrix::FeatureMatrix;
use crate::scalar::Scalar;

/// Relative diagonal jitter used when the regularised Gram matrix fails to factor.
pub const GRAM_JITTER: f64 = 1e-10;

/// Weights of the regularisers shared by every objective in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationParams<T> {
    /// Weight of the `epsilon ||T||^2 - log |det T|` regulariser.
    pub lambda: T,
    /// Frobenius-penalty scale.
    pub epsilon: T,
    /// Weight of the cross-domain coupling term.
    pub mu: T,
}

impl<T: Scalar> RegularizationParams<T> {
    pub fn new(lambda: T, epsilon: T, mu: T) -> Result<Self> {
        let p = Self {
            lambda,
            epsilon,
            mu,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= T::zero()) {
            return Err(Error::InvalidParams(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.epsilon.is_finite() && self.epsilon > T::zero()) {
            return Err(Error::InvalidParams(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.mu.is_finite() && self.mu >= T::zero()) {
            return Err(Error::InvalidParams(format!("mu must be >= 0, got {}", self.mu)));
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> RegularizationParams<U> {
        RegularizationParams {
            lambda: U::lit(self.lambda.as_f64()),
            epsilon: U::lit(self.epsilon.as_f64()),
            mu: U::lit(self.mu.as_f64()),
        }
    }
}

impl<T: Scalar> Default for RegularizationParams<T> {
    fn default() -> Self {
        Self {
            lambda: T::lit(0.1),
            epsilon: T::lit(1.0),
            mu: T::lit(1.0),
        }
    }
}

/// Number of coefficients kept per code column; `None` means dense coding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SparsityBudget {
    tau: Option<usize>,
}

impl SparsityBudget {
    pub const fn dense() -> Self {
        Self { tau: None }
    }

    pub fn sparse(tau: usize) -> Result<Self> {
        if tau == 0 {
            return Err(Error::InvalidBudget { tau, dim: 0 });
        }
        Ok(Self { tau: Some(tau) })
    }

    pub fn tau(&self) -> Option<usize> {
        self.tau
    }

    pub fn is_dense(&self) -> bool {
        self.tau.is_none()
    }

    /// Checks the budget against a code dimension.
    pub fn check(&self, dim: usize) -> Result<()> {
        match self.tau {
            Some(tau) if tau == 0 || tau > dim => Err(Error::InvalidBudget { tau, dim }),
            _ => Ok(()),
        }
    }
}

/// One learned square transform with the settings it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformLayer<T: Scalar> {
    pub t: DMatrix<T>,
    pub params: RegularizationParams<T>,
    pub budget: SparsityBudget,
}

impl<T: Scalar> TransformLayer<T> {
    pub fn identity(dim: usize, params: RegularizationParams<T>, budget: SparsityBudget) -> Self {
        Self {
            t: DMatrix::identity(dim, dim),
            params,
            budget,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn with_budget(mut self, budget: SparsityBudget) -> Self {
        self.budget = budget;
        self
    }

    /// Dense analysis `T x`.
    pub fn apply(&self, x: &FeatureMatrix<T>) -> Result<FeatureMatrix<T>> {
        if x.dim() != self.t.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "transform expects dimension {}, input has {}",
                self.t.ncols(),
                x.dim()
            )));
        }
        FeatureMatrix::from_computed(&self.t * x.as_matrix(), "transform application")
    }

    /// Sign of `det T` (-1, 0 or 1) and `log |det T|`.
    pub fn log_abs_det(&self) -> (T, T) {
        log_abs_det(&self.t)
    }
}

/// Term-by-term value of a transform-learning objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown<T> {
    /// Sum of `||T X - Z||_F^2` over domains.
    pub residual: T,
    /// `lambda * epsilon * ||T||_F^2` summed over domains.
    pub frob_penalty: T,
    /// `-lambda * log |det T|` summed over domains; `+inf` for a singular transform.
    pub logdet_penalty: T,
    /// `mu`-weighted mapping residuals; zero for single-domain objectives.
    pub coupling: T,
    pub total: T,
}

impl<T: Scalar> CostBreakdown<T> {
    pub fn from_parts(residual: T, frob_penalty: T, logdet_penalty: T, coupling: T) -> Self {
        Self {
            residual,
            frob_penalty,
            logdet_penalty,
            coupling,
            total: residual + frob_penalty + logdet_penalty + coupling,
        }
    }

    /// Adds the per-domain terms of another breakdown.
    pub(crate) fn combine(self, other: Self) -> Self {
        Self::from_parts(
            self.residual + other.residual,
            self.frob_penalty + other.frob_penalty,
            self.logdet_penalty + other.logdet_penalty,
            self.coupling + other.coupling,
        )
    }

    pub(crate) fn with_coupling(self, coupling: T) -> Self {
        Self::from_parts(self.residual, self.frob_penalty, self.logdet_penalty, coupling)
    }
}

/// Iteration limits for alternating minimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions<T> {
    pub iters: usize,
    /// Stop once the relative decrease of the total cost falls below this.
    /// Zero disables early stopping.
    pub tol: T,
}

impl<T: Scalar> FitOptions<T> {
    pub fn new(iters: usize, tol: T) -> Result<Self> {
        let o = Self { iters, tol };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        if self.iters == 0 {
            return Err(Error::InvalidParams("iters must be >= 1".into()));
        }
        if !(self.tol.is_finite() && self.tol >= T::zero()) {
            return Err(Error::InvalidParams(format!("tol must be >= 0, got {}", self.tol)));
        }
        Ok(())
    }
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            iters: 50,
            tol: T::lit(1e-6),
        }
    }
}

/// Relative decrease from `prev` to `cur`, negative when the cost went up.
pub(crate) fn relative_decrease<T: Scalar>(prev: T, cur: T) -> T {
    (prev - cur) / prev.abs().max(T::tiny())
}

/// Keeps the `tau` largest-magnitude entries of every column.
///
/// Ties at the cut-off keep the lowest row index. This is the exact minimiser
/// of `||T X - Z||_F^2` subject to at most `tau` non-zeros per column.
pub fn sparse_code_update<T: Scalar>(
    tx: &FeatureMatrix<T>,
    budget: SparsityBudget,
) -> Result<FeatureMatrix<T>> {
    budget.check(tx.dim())?;
    let Some(tau) = budget.tau() else {
        return Ok(tx.clone());
    };
    let d = tx.dim();
    if tau == d {
        return Ok(tx.clone());
    }
    let mut out = tx.as_matrix().clone();
    let mut order: Vec<usize> = Vec::with_capacity(d);
    for mut col in out.column_iter_mut() {
        order.clear();
        order.extend(0..d);
        // Stable sort: equal magnitudes stay in row order.
        order.sort_by(|&a, &b| {
            col[b]
                .abs()
                .partial_cmp(&col[a].abs())
                .unwrap_or(Ordering::Equal)
        });
        for &i in &order[tau..] {
            col[i] = T::zero();
        }
    }
    Ok(FeatureMatrix::from_trusted(out))
}

/// Closed-form minimiser over `T` of
/// `||T X - Z||^2 + lambda * (epsilon ||T||^2 - log |det T|)`.
///
/// With `X X^T + lambda epsilon I = L L^T` and `L^-1 X Z^T = U S V^T`, the
/// minimiser is `T = 0.5 V (S + (S^2 + 2 lambda I)^(1/2)) U^T L^-1`.
/// The returned layer carries `params` and a dense budget.
pub fn transform_update<T: Scalar>(
    x: &FeatureMatrix<T>,
    z: &FeatureMatrix<T>,
    params: &RegularizationParams<T>,
) -> Result<TransformLayer<T>> {
    params.validate()?;
    let d = x.dim();
    if z.dim() != d || z.count() != x.count() {
        return Err(Error::ShapeMismatch(format!(
            "codes are {}x{} but data is {}x{}",
            z.dim(),
            z.count(),
            d,
            x.count()
        )));
    }
    let x = x.as_matrix();
    let z = z.as_matrix();

    let mut gram = mul_tr(x, x);
    let shift = params.lambda * params.epsilon;
    for i in 0..d {
        gram[(i, i)] += shift;
    }
    let chol = cholesky_with_jitter(gram, T::lit(GRAM_JITTER), "regularised data Gram matrix")?;
    let l_inv = chol
        .l()
        .solve_lower_triangular(&DMatrix::identity(d, d))
        .ok_or_else(|| Error::Singular("Cholesky factor is singular".into()))?;

    let a = &l_inv * mul_tr(x, z);
    let Svd { u, s, v } = svd(&a)?;
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let gains: DVector<T> = s.map(|s| half * (s + (s * s + two * params.lambda).sqrt()));

    // V * diag(gains) * U^T * L^-1
    let mut v_scaled = v;
    for (j, g) in gains.iter().enumerate() {
        v_scaled.column_mut(j).scale_mut(*g);
    }
    let t = mul_tr(&v_scaled, &u) * l_inv;
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("transform update produced non-finite values".into()));
    }
    Ok(TransformLayer {
        t,
        params: *params,
        budget: SparsityBudget::dense(),
    })
}

/// Evaluates the regularised single-domain objective term by term.
pub fn objective_eval<T: Scalar>(
    layer: &TransformLayer<T>,
    x: &FeatureMatrix<T>,
    z: &FeatureMatrix<T>,
) -> Result<CostBreakdown<T>> {
    let t = &layer.t;
    if !t.is_square() || t.ncols() != x.dim() || z.dim() != t.nrows() || z.count() != x.count() {
        return Err(Error::ShapeMismatch(format!(
            "transform {}x{}, data {}x{}, codes {}x{}",
            t.nrows(),
            t.ncols(),
            x.dim(),
            x.count(),
            z.dim(),
            z.count()
        )));
    }
    let p = &layer.params;
    let residual = frob_sq(&(t * x.as_matrix() - z.as_matrix()));
    let frob_penalty = p.lambda * p.epsilon * frob_sq(t);
    Ok(CostBreakdown::from_parts(
        residual,
        frob_penalty,
        logdet_penalty(t, p.lambda),
        T::zero(),
    ))
}

pub(crate) fn logdet_penalty<T: Scalar>(t: &DMatrix<T>, lambda: T) -> T {
    if lambda == T::zero() {
        return T::zero();
    }
    let (_, log) = log_abs_det(t);
    if log.is_finite() {
        -lambda * log
    } else {
        T::infinity()
    }
}

/// Result of [`transform_learn`].
#[derive(Debug, Clone)]
pub struct TransformFit<T: Scalar> {
    pub layer: TransformLayer<T>,
    /// Codes from the last coding step (the ones the final transform was fitted to).
    pub codes: FeatureMatrix<T>,
    /// Objective after each completed sweep.
    pub trace: Vec<CostBreakdown<T>>,
}

/// Alternates [`sparse_code_update`] and [`transform_update`] from `init`.
///
/// Each sweep codes first, then refits the transform, then records the cost.
pub fn transform_learn<T: Scalar>(
    x: &FeatureMatrix<T>,
    init: TransformLayer<T>,
    opts: FitOptions<T>,
) -> Result<TransformFit<T>> {
    opts.validate()?;
    init.params.validate()?;
    if !init.t.is_square() || init.t.ncols() != x.dim() {
        return Err(Error::ShapeMismatch(format!(
            "initial transform is {}x{}, data dimension is {}",
            init.t.nrows(),
            init.t.ncols(),
            x.dim()
        )));
    }
    init.budget.check(x.dim())?;

    let budget = init.budget;
    let params = init.params;
    let mut layer = init;
    let mut trace: Vec<CostBreakdown<T>> = Vec::with_capacity(opts.iters);
    let mut codes = None;
    for _ in 0..opts.iters {
        let z = sparse_code_update(&layer.apply(x)?, budget)?;
        layer = transform_update(x, &z, &params)?.with_budget(budget);
        let cost = objective_eval(&layer, x, &z)?;
        let done = trace
            .last()
            .is_some_and(|prev| relative_decrease(prev.total, cost.total) < opts.tol);
        trace.push(cost);
        codes = Some(z);
        if done {
            break;
        }
    }
    Ok(TransformFit {
        layer,
        codes: codes.expect("at least one sweep"),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn fm(rows: usize, cols: usize, row_major: &[f64]) -> FeatureMatrix<f64> {
        FeatureMatrix::new(DMatrix::from_row_slice(rows, cols, row_major)).unwrap()
    }

    fn unit_params() -> RegularizationParams<f64> {
        RegularizationParams::new(1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn thresholding_keeps_largest() {
        let z = sparse_code_update(&fm(3, 1, &[3.0, -1.0, 2.0]), SparsityBudget::sparse(2).unwrap())
            .unwrap();
        assert_eq!(z.as_matrix().as_slice(), &[3.0, 0.0, 2.0]);
    }

    #[test]
    fn thresholding_ties_keep_lowest_row() {
        let z = sparse_code_update(&fm(3, 1, &[5.0, 5.0, 0.0]), SparsityBudget::sparse(1).unwrap())
            .unwrap();
        assert_eq!(z.as_matrix().as_slice(), &[5.0, 0.0, 0.0]);
        let z = sparse_code_update(&fm(3, 1, &[0.0, -2.0, 2.0]), SparsityBudget::sparse(1).unwrap())
            .unwrap();
        assert_eq!(z.as_matrix().as_slice(), &[0.0, -2.0, 0.0]);
    }

    #[test]
    fn thresholding_full_or_dense_budget_is_identity() {
        let x = fm(2, 3, &[1.0, -4.0, 0.5, 2.0, 3.0, -1.0]);
        assert_eq!(sparse_code_update(&x, SparsityBudget::sparse(2).unwrap()).unwrap(), x);
        assert_eq!(sparse_code_update(&x, SparsityBudget::dense()).unwrap(), x);
    }

    #[test]
    fn thresholding_rejects_oversized_budget() {
        let x = fm(2, 1, &[1.0, 2.0]);
        assert!(matches!(
            sparse_code_update(&x, SparsityBudget::sparse(3).unwrap()),
            Err(Error::InvalidBudget { tau: 3, dim: 2 })
        ));
        assert!(SparsityBudget::sparse(0).is_err());
    }

    #[test]
    fn transform_update_identity_case() {
        // Scalar optimum of 2(t-1)^2 + 2t^2 - 2 log t, i.e. the root of 4t^2 - 2t - 1.
        let i2 = fm(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let layer = transform_update(&i2, &i2, &unit_params()).unwrap();
        let expected = (2.0 + 20f64.sqrt()) / 8.0;
        assert!(close(expected, 0.809_016_994_374_947_4, 1e-15));
        let target = DMatrix::<f64>::identity(2, 2) * expected;
        assert!((layer.t - target).abs().max() < 1e-12);
    }

    #[test]
    fn transform_update_rejects_shape_mismatch() {
        let x = fm(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let z = fm(2, 1, &[1.0, 0.0]);
        assert!(matches!(
            transform_update(&x, &z, &unit_params()),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn transform_update_singular_without_regulariser() {
        let x = fm(2, 2, &[0.0, 0.0, 0.0, 0.0]);
        let p = RegularizationParams::new(0.0, 1.0, 0.0).unwrap();
        assert!(matches!(transform_update(&x, &x, &p), Err(Error::Singular(_))));
    }

    #[test]
    fn objective_identity_everywhere() {
        let i2 = fm(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let layer = TransformLayer::identity(2, unit_params(), SparsityBudget::dense());
        let c = objective_eval(&layer, &i2, &i2).unwrap();
        assert_eq!(c.residual, 0.0);
        assert_eq!(c.frob_penalty, 2.0);
        assert_eq!(c.logdet_penalty, 0.0);
        assert_eq!(c.total, 2.0);
    }

    #[test]
    fn objective_scaled_identity() {
        let zero = fm(2, 1, &[0.0, 0.0]);
        let mut layer = TransformLayer::identity(2, unit_params(), SparsityBudget::dense());
        layer.t *= 2.0;
        let c = objective_eval(&layer, &zero, &zero).unwrap();
        assert!(close(c.total, 8.0 - 2.0 * 2f64.ln(), 1e-14));
    }

    #[test]
    fn objective_singular_transform_is_infinite() {
        let x = fm(2, 1, &[1.0, 1.0]);
        let mut layer = TransformLayer::identity(2, unit_params(), SparsityBudget::dense());
        layer.t[(1, 1)] = 0.0;
        let c = objective_eval(&layer, &x, &x).unwrap();
        assert!(c.logdet_penalty.is_infinite() && c.total.is_infinite());
    }

    #[test]
    fn single_iteration_contract() {
        let x = fm(2, 3, &[1.0, 2.0, 0.5, -1.0, 0.3, 2.0]);
        let init = TransformLayer::identity(2, unit_params(), SparsityBudget::sparse(1).unwrap());
        let fit = transform_learn(&x, init, FitOptions::new(1, 1e-6).unwrap()).unwrap();
        assert_eq!(fit.trace.len(), 1);
        // One coding step from T = I, then one transform step on those codes.
        let z = sparse_code_update(&x, SparsityBudget::sparse(1).unwrap()).unwrap();
        assert_eq!(fit.codes, z);
        let t = transform_update(&x, &z, &unit_params()).unwrap();
        assert_eq!(fit.layer.t, t.t);
        assert_eq!(fit.layer.budget, SparsityBudget::sparse(1).unwrap());
    }

    #[test]
    fn learn_rejects_zero_iterations() {
        let x = fm(1, 1, &[1.0]);
        let init = TransformLayer::identity(1, unit_params(), SparsityBudget::dense());
        assert!(transform_learn(&x, init, FitOptions { iters: 0, tol: 1e-6 }).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let x = FeatureMatrix::<f32>::new(DMatrix::identity(2, 2)).unwrap();
        let p = RegularizationParams::<f32>::new(1.0, 1.0, 0.0).unwrap();
        let layer = transform_update(&x, &x, &p).unwrap();
        assert!((layer.t[(0, 0)] - 0.809_017).abs() < 1e-5);
    }
}
