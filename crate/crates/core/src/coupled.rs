//! Semi-coupled and symmetrically-coupled transform learning.
//!
//! Both models learn a transform and codes per domain plus linear maps
//! between the two code spaces. Training is block-coordinate descent over
//! the sub-problems in the fixed order `T1, T2, Z1, Z2, M (, M2)`; every
//! block has an exact solver, so the objective never increases.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_with_jitter, frob_sq, mul_tr, spd_condition, tr_mul};
use crate::matrix::FeatureMatrix;
use crate::scalar::Scalar;
use crate::transform::{
    logdet_penalty, relative_decrease, sparse_code_update, transform_update, CostBreakdown,
    FitOptions, RegularizationParams, SparsityBudget, TransformLayer,
};

/// Gram condition number above which a mapping solve counts as rank-deficient.
pub const RANK_DEFICIENT_CONDITION: f64 = 1e12;
/// Ridge added (times `trace / d`) when auto-ridge kicks in.
pub const AUTO_RIDGE_SCALE: f64 = 1e-8;

/// Linear map from one domain's code space into the other's.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingMatrix<T: Scalar>(DMatrix<T>);

impl<T: Scalar> MappingMatrix<T> {
    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn new(m: DMatrix<T>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "mapping must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("mapping has non-finite entries".into()));
        }
        Ok(Self(m))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn apply(&self, z: &FeatureMatrix<T>) -> Result<FeatureMatrix<T>> {
        if z.dim() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "mapping expects dimension {}, codes have {}",
                self.dim(),
                z.dim()
            )));
        }
        FeatureMatrix::from_computed(&self.0 * z.as_matrix(), "mapping application")
    }
}

/// What to do when a mapping's code Gram matrix is numerically rank-deficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RidgeMode {
    /// Fail with a singular-input error.
    Off,
    /// Add `1e-8 * trace / d` to the diagonal and solve.
    #[default]
    Auto,
}

/// Iteration limits plus the mapping ridge policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledOptions<T> {
    pub fit: FitOptions<T>,
    pub ridge: RidgeMode,
}

impl<T: Scalar> Default for CoupledOptions<T> {
    fn default() -> Self {
        Self {
            fit: FitOptions::default(),
            ridge: RidgeMode::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiCoupledModel<T: Scalar> {
    pub layer1: TransformLayer<T>,
    pub layer2: TransformLayer<T>,
    pub z1: FeatureMatrix<T>,
    pub z2: FeatureMatrix<T>,
    /// Maps domain-1 codes onto domain-2 codes.
    pub mapping: MappingMatrix<T>,
    pub params: RegularizationParams<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricCoupledModel<T: Scalar> {
    pub layer1: TransformLayer<T>,
    pub layer2: TransformLayer<T>,
    pub z1: FeatureMatrix<T>,
    pub z2: FeatureMatrix<T>,
    /// Domain-1 codes to domain-2 codes.
    pub map_12: MappingMatrix<T>,
    /// Domain-2 codes to domain-1 codes.
    pub map_21: MappingMatrix<T>,
    pub params: RegularizationParams<T>,
}

/// Sub-problem just solved, reported to fit observers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Transform1,
    Transform2,
    Codes1,
    Codes2,
    Mapping12,
    Mapping21,
}

fn check_codes<T: Scalar>(a: &FeatureMatrix<T>, b: &FeatureMatrix<T>, what: &str) -> Result<()> {
    if a.dim() != b.dim() || a.count() != b.count() {
        return Err(Error::ShapeMismatch(format!(
            "{what}: {}x{} vs {}x{}",
            a.dim(),
            a.count(),
            b.dim(),
            b.count()
        )));
    }
    Ok(())
}

fn check_map<T: Scalar>(m: &MappingMatrix<T>, dim: usize) -> Result<()> {
    if m.dim() != dim {
        return Err(Error::ShapeMismatch(format!(
            "mapping is {}x{}, codes have dimension {dim}",
            m.dim(),
            m.dim()
        )));
    }
    Ok(())
}

/// Solves `(a) Z = rhs` for symmetric positive definite `a`.
fn spd_solve<T: Scalar>(a: DMatrix<T>, rhs: DMatrix<T>, what: &str) -> Result<FeatureMatrix<T>> {
    let chol = cholesky_with_jitter(a, T::zero(), what)?;
    FeatureMatrix::from_computed(chol.solve(&rhs), what)
}

/// Least-squares code updates of the semi-coupled model.
///
/// `z1` solves `(I + mu M^T M) Z1 = T1 X1 + mu M^T Z2` with the current `z2`;
/// the new `z2` then solves `(1 + mu) Z2 = T2 X2 + mu M Z1` with the new `z1`.
pub fn update_codes_semi<T: Scalar>(
    t1x1: &FeatureMatrix<T>,
    t2x2: &FeatureMatrix<T>,
    z2: &FeatureMatrix<T>,
    m: &MappingMatrix<T>,
    mu: T,
) -> Result<(FeatureMatrix<T>, FeatureMatrix<T>)> {
    check_codes(t1x1, t2x2, "analysis codes")?;
    check_codes(t2x2, z2, "current domain-2 codes")?;
    check_map(m, t1x1.dim())?;
    let z1 = semi_codes1(t1x1, z2, m, mu)?;
    let z2 = semi_codes2(t2x2, &z1, m, mu)?;
    Ok((z1, z2))
}

fn semi_codes1<T: Scalar>(
    t1x1: &FeatureMatrix<T>,
    z2: &FeatureMatrix<T>,
    m: &MappingMatrix<T>,
    mu: T,
) -> Result<FeatureMatrix<T>> {
    if mu == T::zero() {
        return Ok(t1x1.clone());
    }
    let m = m.as_matrix();
    let d = m.nrows();
    let a = DMatrix::identity(d, d) + tr_mul(m, m) * mu;
    let rhs = t1x1.as_matrix() + tr_mul(m, z2.as_matrix()) * mu;
    spd_solve(a, rhs, "domain-1 code system")
}

fn semi_codes2<T: Scalar>(
    t2x2: &FeatureMatrix<T>,
    z1: &FeatureMatrix<T>,
    m: &MappingMatrix<T>,
    mu: T,
) -> Result<FeatureMatrix<T>> {
    if mu == T::zero() {
        return Ok(t2x2.clone());
    }
    let rhs = t2x2.as_matrix() + (m.as_matrix() * z1.as_matrix()) * mu;
    FeatureMatrix::from_computed(rhs / (T::one() + mu), "domain-2 code update")
}

/// Least-squares code updates of the symmetric model.
///
/// `z1` solves `((1+mu) I + mu M12^T M12) Z1 = T1 X1 + mu M12^T Z2 + mu M21 Z2`
/// with the current `z2`; then `z2` solves
/// `((1+mu) I + mu M21^T M21) Z2 = T2 X2 + mu M12 Z1 + mu M21^T Z1` with the new `z1`.
pub fn update_codes_sym<T: Scalar>(
    t1x1: &FeatureMatrix<T>,
    t2x2: &FeatureMatrix<T>,
    z2: &FeatureMatrix<T>,
    m12: &MappingMatrix<T>,
    m21: &MappingMatrix<T>,
    mu: T,
) -> Result<(FeatureMatrix<T>, FeatureMatrix<T>)> {
    check_codes(t1x1, t2x2, "analysis codes")?;
    check_codes(t2x2, z2, "current domain-2 codes")?;
    check_map(m12, t1x1.dim())?;
    check_map(m21, t1x1.dim())?;
    let z1 = sym_codes(t1x1, z2, m12, m21, mu, "domain-1 code system")?;
    let z2 = sym_codes(t2x2, &z1, m21, m12, mu, "domain-2 code system")?;
    Ok((z1, z2))
}

/// Minimiser over `z` of `||own - z||^2 + mu ||other - fwd z||^2 + mu ||z - back other||^2`.
///
/// For domain 1, `fwd = M12` and `back = M21`; domain 2 swaps them.
fn sym_codes<T: Scalar>(
    own: &FeatureMatrix<T>,
    other: &FeatureMatrix<T>,
    fwd: &MappingMatrix<T>,
    back: &MappingMatrix<T>,
    mu: T,
    what: &str,
) -> Result<FeatureMatrix<T>> {
    if mu == T::zero() {
        return Ok(own.clone());
    }
    let (f, b) = (fwd.as_matrix(), back.as_matrix());
    let d = f.nrows();
    let a = DMatrix::identity(d, d) * (T::one() + mu) + tr_mul(f, f) * mu;
    let rhs = own.as_matrix() + (tr_mul(f, other.as_matrix()) + b * other.as_matrix()) * mu;
    spd_solve(a, rhs, what)
}

/// Least-squares map `M = Z_to Z_from^T (Z_from Z_from^T + ridge I)^-1`.
///
/// When the code Gram matrix has condition number above `1e12`, `RidgeMode::Auto`
/// adds `1e-8 * trace / d` to its diagonal, and `RidgeMode::Off` returns a
/// singular-input error unless an explicit positive `ridge` is given.
pub fn update_mapping<T: Scalar>(
    z_from: &FeatureMatrix<T>,
    z_to: &FeatureMatrix<T>,
    ridge: T,
    mode: RidgeMode,
) -> Result<MappingMatrix<T>> {
    check_codes(z_from, z_to, "mapping codes")?;
    if !(ridge.is_finite() && ridge >= T::zero()) {
        return Err(Error::InvalidParams(format!("ridge must be >= 0, got {ridge}")));
    }
    let (zf, zt) = (z_from.as_matrix(), z_to.as_matrix());
    let d = zf.nrows();
    let mut gram = mul_tr(zf, zf);
    for i in 0..d {
        gram[(i, i)] += ridge;
    }
    if spd_condition(&gram) > T::lit(RANK_DEFICIENT_CONDITION) {
        match mode {
            RidgeMode::Off => {
                return Err(Error::Singular(
                    "code Gram matrix is rank-deficient and auto-ridge is off".into(),
                ))
            }
            RidgeMode::Auto => {
                let extra = T::lit(AUTO_RIDGE_SCALE) * gram.trace() / T::lit(d as f64);
                if extra <= T::zero() {
                    return Err(Error::Singular("code Gram matrix is zero".into()));
                }
                for i in 0..d {
                    gram[(i, i)] += extra;
                }
            }
        }
    }
    // M G = Z_to Z_from^T, G symmetric => G M^T = Z_from Z_to^T.
    let chol = cholesky_with_jitter(gram, T::zero(), "code Gram matrix")?;
    let m_t = chol.solve(&mul_tr(zf, zt));
    let m = m_t.transpose();
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("mapping update produced non-finite values".into()));
    }
    Ok(MappingMatrix(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Coupling {
    Semi,
    Symmetric,
}

/// Mutable state of a coupled fit.
struct CoupledState<T: Scalar> {
    layer1: TransformLayer<T>,
    layer2: TransformLayer<T>,
    z1: FeatureMatrix<T>,
    z2: FeatureMatrix<T>,
    m12: MappingMatrix<T>,
    m21: Option<MappingMatrix<T>>,
}

impl<T: Scalar> CoupledState<T> {
    fn coupling_residual(&self) -> T {
        let (z1, z2) = (self.z1.as_matrix(), self.z2.as_matrix());
        let mut r = frob_sq(&(z2 - self.m12.as_matrix() * z1));
        if let Some(m21) = &self.m21 {
            r += frob_sq(&(z1 - m21.as_matrix() * z2));
        }
        r
    }
}

/// Single-domain terms of one side of a coupled objective.
fn domain_terms<T: Scalar>(
    t: &DMatrix<T>,
    x: &FeatureMatrix<T>,
    z: &FeatureMatrix<T>,
    params: &RegularizationParams<T>,
) -> CostBreakdown<T> {
    CostBreakdown::from_parts(
        frob_sq(&(t * x.as_matrix() - z.as_matrix())),
        params.lambda * params.epsilon * frob_sq(t),
        logdet_penalty(t, params.lambda),
        T::zero(),
    )
}

fn coupled_cost<T: Scalar>(
    s: &CoupledState<T>,
    x1: &FeatureMatrix<T>,
    x2: &FeatureMatrix<T>,
    params: &RegularizationParams<T>,
) -> CostBreakdown<T> {
    domain_terms(&s.layer1.t, x1, &s.z1, params)
        .combine(domain_terms(&s.layer2.t, x2, &s.z2, params))
        .with_coupling(params.mu * s.coupling_residual())
}

/// Cost of the semi-coupled objective for given variables.
pub fn semi_objective<T: Scalar>(
    model: &SemiCoupledModel<T>,
    x1: &FeatureMatrix<T>,
    x2: &FeatureMatrix<T>,
) -> Result<CostBreakdown<T>> {
    check_inputs(x1, x2)?;
    check_codes(x1, &model.z1, "domain-1 codes")?;
    check_codes(x2, &model.z2, "domain-2 codes")?;
    let state = CoupledState {
        layer1: model.layer1.clone(),
        layer2: model.layer2.clone(),
        z1: model.z1.clone(),
        z2: model.z2.clone(),
        m12: model.mapping.clone(),
        m21: None,
    };
    Ok(coupled_cost(&state, x1, x2, &model.params))
}

/// Cost of the symmetric objective for given variables.
pub fn sym_objective<T: Scalar>(
    model: &SymmetricCoupledModel<T>,
    x1: &FeatureMatrix<T>,
    x2: &FeatureMatrix<T>,
) -> Result<CostBreakdown<T>> {
    check_inputs(x1, x2)?;
    check_codes(x1, &model.z1, "domain-1 codes")?;
    check_codes(x2, &model.z2, "domain-2 codes")?;
    let state = CoupledState {
        layer1: model.layer1.clone(),
        layer2: model.layer2.clone(),
        z1: model.z1.clone(),
        z2: model.z2.clone(),
        m12: model.map_12.clone(),
        m21: Some(model.map_21.clone()),
    };
    Ok(coupled_cost(&state, x1, x2, &model.params))
}

fn check_inputs<T: Scalar>(x1: &FeatureMatrix<T>, x2: &FeatureMatrix<T>) -> Result<()> {
    if x1.dim() != x2.dim() {
        return Err(Error::ShapeMismatch(format!(
            "domains must share a feature dimension, got {} and {}",
            x1.dim(),
            x2.dim()
        )));
    }
    if x1.count() != x2.count() {
        return Err(Error::ShapeMismatch(format!(
            "domains must be paired, got {} and {} samples",
            x1.count(),
            x2.count()
        )));
    }
    Ok(())
}

/// Objective of the domain-1 (`first = true`) or domain-2 code sub-problem.
fn code_subproblem<T: Scalar>(
    s: &CoupledState<T>,
    tx: &FeatureMatrix<T>,
    first: bool,
    mu: T,
) -> T {
    let z = if first { &s.z1 } else { &s.z2 };
    frob_sq(&(tx.as_matrix() - z.as_matrix())) + mu * s.coupling_residual()
}

/// Replaces one domain's codes with `candidate`, thresholded to the budget.
///
/// Thresholding the least-squares solution is exact only when the sub-problem
/// Hessian is a multiple of the identity; otherwise the candidate is kept only
/// if it does not increase the sub-problem objective.
fn install_codes<T: Scalar>(
    s: &mut CoupledState<T>,
    tx: &FeatureMatrix<T>,
    candidate: FeatureMatrix<T>,
    first: bool,
    budget: SparsityBudget,
    isotropic: bool,
    mu: T,
) -> Result<()> {
    if budget.is_dense() {
        *if first { &mut s.z1 } else { &mut s.z2 } = candidate;
        return Ok(());
    }
    let sparse = sparse_code_update(&candidate, budget)?;
    if isotropic {
        *if first { &mut s.z1 } else { &mut s.z2 } = sparse;
        return Ok(());
    }
    let before = code_subproblem(s, tx, first, mu);
    let old = std::mem::replace(if first { &mut s.z1 } else { &mut s.z2 }, sparse);
    if code_subproblem(s, tx, first, mu) > before {
        *if first { &mut s.z1 } else { &mut s.z2 } = old;
    }
    Ok(())
}

/// Refits a mapping; a ridge-regularised solution that fits worse than the
/// current map is discarded.
fn refresh_mapping<T: Scalar>(
    current: &MappingMatrix<T>,
    from: &FeatureMatrix<T>,
    to: &FeatureMatrix<T>,
    mode: RidgeMode,
) -> Result<MappingMatrix<T>> {
    let next = update_mapping(from, to, T::zero(), mode)?;
    if mode == RidgeMode::Auto {
        let fit = |m: &MappingMatrix<T>| frob_sq(&(to.as_matrix() - m.as_matrix() * from.as_matrix()));
        if fit(&next) > fit(current) {
            return Ok(current.clone());
        }
    }
    Ok(next)
}

type Observer<'a, T> = &'a mut dyn FnMut(Stage, &CostBreakdown<T>);

fn fit_coupled<T: Scalar>(
    kind: Coupling,
    x1: &FeatureMatrix<T>,
    x2: &FeatureMatrix<T>,
    params: &RegularizationParams<T>,
    budget: SparsityBudget,
    opts: &CoupledOptions<T>,
    mut observer: Option<Observer<'_, T>>,
) -> Result<(CoupledState<T>, Vec<CostBreakdown<T>>)> {
    params.validate()?;
    opts.fit.validate()?;
    check_inputs(x1, x2)?;
    let d = x1.dim();
    budget.check(d)?;

    let mu = params.mu;
    let mut s = CoupledState {
        layer1: TransformLayer::identity(d, *params, budget),
        layer2: TransformLayer::identity(d, *params, budget),
        z1: sparse_code_update(x1, budget)?,
        z2: sparse_code_update(x2, budget)?,
        m12: MappingMatrix::identity(d),
        m21: (kind == Coupling::Symmetric).then(|| MappingMatrix::identity(d)),
    };

    let mut report = |s: &CoupledState<T>, stage: Stage| {
        if let Some(obs) = observer.as_mut() {
            obs(stage, &coupled_cost(s, x1, x2, params));
        }
    };

    let mut trace: Vec<CostBreakdown<T>> = Vec::with_capacity(opts.fit.iters);
    for _ in 0..opts.fit.iters {
        s.layer1 = transform_update(x1, &s.z1, params)?.with_budget(budget);
        report(&s, Stage::Transform1);
        s.layer2 = transform_update(x2, &s.z2, params)?.with_budget(budget);
        report(&s, Stage::Transform2);

        let t1x1 = s.layer1.apply(x1)?;
        let t2x2 = s.layer2.apply(x2)?;
        match kind {
            Coupling::Semi => {
                let z1 = semi_codes1(&t1x1, &s.z2, &s.m12, mu)?;
                install_codes(&mut s, &t1x1, z1, true, budget, mu == T::zero(), mu)?;
                report(&s, Stage::Codes1);
                let z2 = semi_codes2(&t2x2, &s.z1, &s.m12, mu)?;
                install_codes(&mut s, &t2x2, z2, false, budget, true, mu)?;
                report(&s, Stage::Codes2);
            }
            Coupling::Symmetric => {
                let m21 = s.m21.clone().expect("symmetric state has two maps");
                let z1 = sym_codes(&t1x1, &s.z2, &s.m12, &m21, mu, "domain-1 code system")?;
                install_codes(&mut s, &t1x1, z1, true, budget, mu == T::zero(), mu)?;
                report(&s, Stage::Codes1);
                let z2 = sym_codes(&t2x2, &s.z1, &m21, &s.m12, mu, "domain-2 code system")?;
                install_codes(&mut s, &t2x2, z2, false, budget, mu == T::zero(), mu)?;
                report(&s, Stage::Codes2);
            }
        }

        s.m12 = refresh_mapping(&s.m12, &s.z1, &s.z2, opts.ridge)?;
        report(&s, Stage::Mapping12);
        if let Some(m21) = &s.m21 {
            s.m21 = Some(refresh_mapping(m21, &s.z2, &s.z1, opts.ridge)?);
            report(&s, Stage::Mapping21);
        }

        let cost = coupled_cost(&s, x1, x2, params);
        let done = trace
            .last()
            .is_some_and(|prev| relative_decrease(prev.total, cost.total) < opts.fit.tol);
        trace.push(cost);
        if done {
            break;
        }
    }
    Ok((s, trace))
}

/// Fits the semi-coupled model (one map from domain 1 to domain 2).
///
/// Starts from `T1 = T2 = I`, `M = I` and codes equal to the (thresholded) data.
/// Returns the model and the full objective after every sweep.
pub fn semi_coupled_fit<T: Scalar>(
    x1: &FeatureMatrix<T>,
    x2: &FeatureMatrix<T>,
    params: &RegularizationParams<T>,
    budget: SparsityBudget,
    opts: &CoupledOptions<T>,
) -> Result<(SemiCoupledModel<T>, Vec<CostBreakdown<T>>)> {
    let (s, trace) = fit_coupled(Coupling::Semi, x1, x2, params, budget, opts, None)?;
    Ok((semi_model(s, params), trace))
}

/// [`semi_coupled_fit`], reporting the full objective after every sub-problem.
pub fn semi_coupled_fit_observed<T: Scalar>(
    x1: &FeatureMatrix<T>,
    x2: &FeatureMatrix<T>,
    params: &RegularizationParams<T>,
    budget: SparsityBudget,
    opts: &CoupledOptions<T>,
    observer: &mut dyn FnMut(Stage, &CostBreakdown<T>),
) -> Result<(SemiCoupledModel<T>, Vec<CostBreakdown<T>>)> {
    let (s, trace) = fit_coupled(Coupling::Semi, x1, x2, params, budget, opts, Some(observer))?;
    Ok((semi_model(s, params), trace))
}

/// Fits the symmetric model (maps in both directions).
pub fn sym_coupled_fit<T: Scalar>(
    x1: &FeatureMatrix<T>,
    x2: &FeatureMatrix<T>,
    params: &RegularizationParams<T>,
    budget: SparsityBudget,
    opts: &CoupledOptions<T>,
) -> Result<(SymmetricCoupledModel<T>, Vec<CostBreakdown<T>>)> {
    let (s, trace) = fit_coupled(Coupling::Symmetric, x1, x2, params, budget, opts, None)?;
    Ok((sym_model(s, params), trace))
}

/// [`sym_coupled_fit`], reporting the full objective after every sub-problem.
pub fn sym_coupled_fit_observed<T: Scalar>(
    x1: &FeatureMatrix<T>,
    x2: &FeatureMatrix<T>,
    params: &RegularizationParams<T>,
    budget: SparsityBudget,
    opts: &CoupledOptions<T>,
    observer: &mut dyn FnMut(Stage, &CostBreakdown<T>),
) -> Result<(SymmetricCoupledModel<T>, Vec<CostBreakdown<T>>)> {
    let (s, trace) =
        fit_coupled(Coupling::Symmetric, x1, x2, params, budget, opts, Some(observer))?;
    Ok((sym_model(s, params), trace))
}

fn semi_model<T: Scalar>(s: CoupledState<T>, params: &RegularizationParams<T>) -> SemiCoupledModel<T> {
    SemiCoupledModel {
        layer1: s.layer1,
        layer2: s.layer2,
        z1: s.z1,
        z2: s.z2,
        mapping: s.m12,
        params: *params,
    }
}

fn sym_model<T: Scalar>(
    s: CoupledState<T>,
    params: &RegularizationParams<T>,
) -> SymmetricCoupledModel<T> {
    SymmetricCoupledModel {
        layer1: s.layer1,
        layer2: s.layer2,
        z1: s.z1,
        z2: s.z2,
        map_12: s.m12,
        map_21: s.m21.expect("symmetric state has two maps"),
        params: *params,
    }
}
