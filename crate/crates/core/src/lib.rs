//! Coupled deep transform learning for cross-domain matching.
//!
//! Two feature domains (say sketches and photos) each get a stack of square
//! analysis transforms; the final layer also learns linear maps between the
//! two code spaces. Probes from one domain are encoded, mapped into the other
//! domain and identified against a gallery by nearest-neighbour ranking.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the precision.

pub mod codec;
pub mod config;
pub mod coupled;
pub mod deep;
pub mod error;
pub mod io;
pub mod linalg;
pub mod matching;
pub mod matrix;
pub mod scalar;
pub mod synth;
pub mod transform;

pub use coupled::{
    semi_coupled_fit, sym_coupled_fit, update_codes_semi, update_codes_sym, update_mapping,
    CoupledOptions, MappingMatrix, RidgeMode, SemiCoupledModel, Stage, SymmetricCoupledModel,
};
pub use deep::{
    fit_deep, Coding, DeepFit, DeepTransformer, Direction, Domain, LayerSchedule, LayerSpec,
    LayerTrace, ModelKind,
};
pub use error::{Error, Result};
pub use matching::{
    cmc_compute, enroll, identify, rank_k_accuracy, CmcCurve, Gallery, MatchResult, Metric,
};
pub use matrix::FeatureMatrix;
pub use scalar::Scalar;
pub use synth::{gen_synthetic_coupled, SyntheticData, SyntheticSpec};
pub use transform::{
    objective_eval, sparse_code_update, transform_learn, transform_update, CostBreakdown,
    FitOptions, RegularizationParams, SparsityBudget, TransformFit, TransformLayer,
};

pub type FeatureMatrix64 = FeatureMatrix<f64>;
pub type FeatureMatrix32 = FeatureMatrix<f32>;
pub type TransformLayer64 = TransformLayer<f64>;
pub type TransformLayer32 = TransformLayer<f32>;
pub type SemiCoupledModel64 = SemiCoupledModel<f64>;
pub type SymmetricCoupledModel64 = SymmetricCoupledModel<f64>;
pub type DeepTransformer64 = DeepTransformer<f64>;
pub type DeepTransformer32 = DeepTransformer<f32>;
pub type Gallery64 = Gallery<f64>;
pub type CostBreakdown64 = CostBreakdown<f64>;
