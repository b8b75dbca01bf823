//! Deep coupled transforms trained greedily, one layer at a time.
//!
//! Layers `1..k-1` are plain single-domain transform learning on each domain,
//! each layer consuming the previous layer's codes. Only the last layer is
//! coupled, through a semi-coupled or symmetric fit. At test time a sample is
//! encoded by the linear cascade `T^k ... T^1 x` and then mapped across domains.

use std::fmt;

use nalgebra::DMatrix;

use crate::coupled::{
    semi_coupled_fit, sym_coupled_fit, CoupledOptions, MappingMatrix, RidgeMode,
};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::scalar::Scalar;
use crate::transform::{
    sparse_code_update, transform_learn, CostBreakdown, FitOptions, RegularizationParams,
    SparsityBudget, TransformLayer,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelKind {
    /// One map, domain 1 to domain 2.
    #[default]
    Semi,
    /// Two maps, one in each direction.
    Symmetric,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Semi => "semi",
            ModelKind::Symmetric => "symmetric",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semi" => Ok(ModelKind::Semi),
            "symmetric" | "sym" => Ok(ModelKind::Symmetric),
            other => Err(Error::Config(format!("unknown model kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    OneToTwo,
    TwoToOne,
}

/// How codes are produced at test time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coding {
    /// Plain linear analysis at every layer.
    #[default]
    Dense,
    /// Hard-threshold each layer's output to that layer's training budget.
    Thresholded,
}

/// Training settings of one layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSpec<T> {
    pub params: RegularizationParams<T>,
    pub budget: SparsityBudget,
    pub fit: FitOptions<T>,
}

impl<T: Scalar> Default for LayerSpec<T> {
    fn default() -> Self {
        Self {
            params: RegularizationParams::default(),
            budget: SparsityBudget::dense(),
            fit: FitOptions::default(),
        }
    }
}

/// Per-layer settings, first layer first.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSchedule<T> {
    layers: Vec<LayerSpec<T>>,
}

impl<T: Scalar> LayerSchedule<T> {
    pub fn new(layers: Vec<LayerSpec<T>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidParams("schedule needs at least one layer".into()));
        }
        for spec in &layers {
            spec.params.validate()?;
            spec.fit.validate()?;
        }
        Ok(Self { layers })
    }

    /// The same settings for every layer.
    pub fn replicate(spec: LayerSpec<T>, depth: usize) -> Result<Self> {
        Self::new(vec![spec; depth])
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[LayerSpec<T>] {
        &self.layers
    }
}

/// A trained deep coupled transform.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepTransformer<T: Scalar> {
    kind: ModelKind,
    layers1: Vec<TransformLayer<T>>,
    layers2: Vec<TransformLayer<T>>,
    map_12: MappingMatrix<T>,
    map_21: Option<MappingMatrix<T>>,
}

impl<T: Scalar> DeepTransformer<T> {
    /// Assembles a model, checking that both stacks have the same depth, every
    /// transform is square with matching dimensions, and `map_21` is present
    /// exactly for symmetric models.
    pub fn from_parts(
        kind: ModelKind,
        layers1: Vec<TransformLayer<T>>,
        layers2: Vec<TransformLayer<T>>,
        map_12: MappingMatrix<T>,
        map_21: Option<MappingMatrix<T>>,
    ) -> Result<Self> {
        if layers1.is_empty() || layers1.len() != layers2.len() {
            return Err(Error::ShapeMismatch(format!(
                "layer stacks must be non-empty and equally deep, got {} and {}",
                layers1.len(),
                layers2.len()
            )));
        }
        let d = layers1[0].dim();
        for layer in layers1.iter().chain(&layers2) {
            if !layer.t.is_square() || layer.dim() != d {
                return Err(Error::ShapeMismatch(format!(
                    "every transform must be {d}x{d}, found {}x{}",
                    layer.t.nrows(),
                    layer.t.ncols()
                )));
            }
        }
        if map_12.dim() != d || map_21.as_ref().is_some_and(|m| m.dim() != d) {
            return Err(Error::ShapeMismatch(format!("mappings must be {d}x{d}")));
        }
        match (kind, &map_21) {
            (ModelKind::Semi, Some(_)) => {
                return Err(Error::InvalidParams("semi-coupled model has a reverse map".into()))
            }
            (ModelKind::Symmetric, None) => {
                return Err(Error::InvalidParams("symmetric model lacks a reverse map".into()))
            }
            _ => {}
        }
        Ok(Self {
            kind,
            layers1,
            layers2,
            map_12,
            map_21,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn depth(&self) -> usize {
        self.layers1.len()
    }

    pub fn dim(&self) -> usize {
        self.layers1[0].dim()
    }

    pub fn layers(&self, domain: Domain) -> &[TransformLayer<T>] {
        match domain {
            Domain::One => &self.layers1,
            Domain::Two => &self.layers2,
        }
    }

    pub fn map_12(&self) -> &MappingMatrix<T> {
        &self.map_12
    }

    pub fn map_21(&self) -> Option<&MappingMatrix<T>> {
        self.map_21.as_ref()
    }

    /// Product `T^k ... T^1` of one domain's stack.
    pub fn composite_transform(&self, domain: Domain) -> DMatrix<T> {
        let mut layers = self.layers(domain).iter();
        let first = layers.next().expect("non-empty stack").t.clone();
        layers.fold(first, |acc, layer| &layer.t * acc)
    }

    /// Encodes samples with the dense linear cascade.
    pub fn encode(&self, x: &FeatureMatrix<T>, domain: Domain) -> Result<FeatureMatrix<T>> {
        self.encode_with(x, domain, Coding::Dense)
    }

    pub fn encode_with(
        &self,
        x: &FeatureMatrix<T>,
        domain: Domain,
        coding: Coding,
    ) -> Result<FeatureMatrix<T>> {
        if x.dim() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "model expects dimension {}, input has {}",
                self.dim(),
                x.dim()
            )));
        }
        let mut z = x.clone();
        for layer in self.layers(domain) {
            z = layer.apply(&z)?;
            if coding == Coding::Thresholded {
                z = sparse_code_update(&z, layer.budget)?;
            }
        }
        Ok(z)
    }

    /// Maps final-layer codes into the other domain's code space.
    pub fn map_codes(&self, z: &FeatureMatrix<T>, direction: Direction) -> Result<FeatureMatrix<T>> {
        match direction {
            Direction::OneToTwo => self.map_12.apply(z),
            Direction::TwoToOne => self
                .map_21
                .as_ref()
                .ok_or(Error::UnsupportedDirection("2->1"))?
                .apply(z),
        }
    }
}

/// Cost traces of one trained layer.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerTrace<T> {
    /// An uncoupled layer: one trace per domain.
    Independent {
        domain1: Vec<CostBreakdown<T>>,
        domain2: Vec<CostBreakdown<T>>,
    },
    /// The coupled final layer.
    Coupled(Vec<CostBreakdown<T>>),
}

impl<T: Scalar> LayerTrace<T> {
    /// Every trace of this layer.
    pub fn traces(&self) -> Vec<&[CostBreakdown<T>]> {
        match self {
            LayerTrace::Independent { domain1, domain2 } => vec![domain1, domain2],
            LayerTrace::Coupled(t) => vec![t],
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeepFit<T: Scalar> {
    pub model: DeepTransformer<T>,
    pub traces: Vec<LayerTrace<T>>,
    /// Final-layer training codes of each domain.
    pub codes1: FeatureMatrix<T>,
    pub codes2: FeatureMatrix<T>,
}

/// Greedy layer-wise training of a depth-`schedule.depth()` model.
pub fn fit_deep<T: Scalar>(
    x1: &FeatureMatrix<T>,
    x2: &FeatureMatrix<T>,
    kind: ModelKind,
    schedule: &LayerSchedule<T>,
    ridge: RidgeMode,
) -> Result<DeepFit<T>> {
    if x1.dim() != x2.dim() || x1.count() != x2.count() {
        return Err(Error::ShapeMismatch(format!(
            "paired inputs required, got {}x{} and {}x{}",
            x1.dim(),
            x1.count(),
            x2.dim(),
            x2.count()
        )));
    }
    let d = x1.dim();
    let (last, inner) = schedule.layers().split_last().expect("non-empty schedule");

    let mut in1 = x1.clone();
    let mut in2 = x2.clone();
    let mut layers1 = Vec::with_capacity(schedule.depth());
    let mut layers2 = Vec::with_capacity(schedule.depth());
    let mut traces = Vec::with_capacity(schedule.depth());
    for spec in inner {
        let init = TransformLayer::identity(d, spec.params, spec.budget);
        let f1 = transform_learn(&in1, init.clone(), spec.fit)?;
        let f2 = transform_learn(&in2, init, spec.fit)?;
        layers1.push(f1.layer);
        layers2.push(f2.layer);
        traces.push(LayerTrace::Independent {
            domain1: f1.trace,
            domain2: f2.trace,
        });
        in1 = f1.codes;
        in2 = f2.codes;
    }

    let opts = CoupledOptions {
        fit: last.fit,
        ridge,
    };
    let (map_12, map_21, codes1, codes2) = match kind {
        ModelKind::Semi => {
            let (m, trace) = semi_coupled_fit(&in1, &in2, &last.params, last.budget, &opts)?;
            layers1.push(m.layer1);
            layers2.push(m.layer2);
            traces.push(LayerTrace::Coupled(trace));
            (m.mapping, None, m.z1, m.z2)
        }
        ModelKind::Symmetric => {
            let (m, trace) = sym_coupled_fit(&in1, &in2, &last.params, last.budget, &opts)?;
            layers1.push(m.layer1);
            layers2.push(m.layer2);
            traces.push(LayerTrace::Coupled(trace));
            (m.map_12, Some(m.map_21), m.z1, m.z2)
        }
    };
    Ok(DeepFit {
        model: DeepTransformer::from_parts(kind, layers1, layers2, map_12, map_21)?,
        traces,
        codes1,
        codes2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_model(kind: ModelKind, depth: usize, d: usize) -> DeepTransformer<f64> {
        let layer = TransformLayer::identity(d, Default::default(), SparsityBudget::dense());
        DeepTransformer::from_parts(
            kind,
            vec![layer.clone(); depth],
            vec![layer; depth],
            MappingMatrix::identity(d),
            (kind == ModelKind::Symmetric).then(|| MappingMatrix::identity(d)),
        )
        .unwrap()
    }

    fn sample() -> FeatureMatrix<f64> {
        FeatureMatrix::new(DMatrix::from_row_slice(2, 3, &[1.0, -2.0, 0.5, 3.0, 0.1, -0.7])).unwrap()
    }

    #[test]
    fn identity_model_encodes_and_maps_to_input() {
        let m = identity_model(ModelKind::Symmetric, 1, 2);
        let x = sample();
        assert_eq!(m.encode(&x, Domain::One).unwrap(), x);
        assert_eq!(m.map_codes(&x, Direction::OneToTwo).unwrap(), x);
        assert_eq!(m.map_codes(&x, Direction::TwoToOne).unwrap(), x);
    }

    #[test]
    fn semi_model_rejects_reverse_mapping() {
        let m = identity_model(ModelKind::Semi, 2, 2);
        assert!(matches!(
            m.map_codes(&sample(), Direction::TwoToOne),
            Err(Error::UnsupportedDirection(_))
        ));
    }

    #[test]
    fn encode_checks_dimension() {
        let m = identity_model(ModelKind::Semi, 1, 3);
        assert!(matches!(m.encode(&sample(), Domain::Two), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn from_parts_validates_invariants() {
        let layer = TransformLayer::<f64>::identity(2, Default::default(), SparsityBudget::dense());
        assert!(DeepTransformer::from_parts(
            ModelKind::Semi,
            vec![layer.clone()],
            vec![],
            MappingMatrix::identity(2),
            None
        )
        .is_err());
        assert!(DeepTransformer::from_parts(
            ModelKind::Symmetric,
            vec![layer.clone()],
            vec![layer.clone()],
            MappingMatrix::identity(2),
            None
        )
        .is_err());
        assert!(DeepTransformer::from_parts(
            ModelKind::Semi,
            vec![layer.clone()],
            vec![layer],
            MappingMatrix::identity(2),
            Some(MappingMatrix::identity(2))
        )
        .is_err());
    }

    #[test]
    fn kind_parses() {
        assert_eq!("semi".parse::<ModelKind>().unwrap(), ModelKind::Semi);
        assert_eq!("symmetric".parse::<ModelKind>().unwrap(), ModelKind::Symmetric);
        assert!("both".parse::<ModelKind>().is_err());
    }

    #[test]
    fn empty_schedule_rejected() {
        assert!(LayerSchedule::<f64>::new(vec![]).is_err());
    }
}
