//! Training configuration and dataset manifests, both small TOML files.
//!
//! A training config holds global settings plus optional per-layer
//! overrides under `[layer.<n>]` (layers are numbered from 1):
//!
//! ```toml
//! kind = "semi"        # or "symmetric"
//! depth = 2
//! seed = 0
//! ridge = "auto"       # or "off"
//! lambda = 0.1
//! epsilon = 1.0
//! mu = 1.0
//! tau = "none"         # or a positive integer
//! iters = 50
//! tol = 1e-6
//!
//! [layer.2]
//! mu = 10.0
//! ```
//!
//! A manifest names the feature files of one split:
//!
//! ```toml
//! split = "gallery"    # train | gallery | probe
//! domain1 = "probe_x1.csv"
//! domain2 = "gallery_x2.bin"
//! labels = "gallery_labels.txt"
//! ```
//!
//! Relative paths are resolved against the manifest's directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::coupled::RidgeMode;
use crate::deep::{LayerSchedule, LayerSpec, ModelKind};
use crate::error::{Error, Result};
use crate::io::{load_labels, load_matrix};
use crate::matrix::FeatureMatrix;
use crate::scalar::Scalar;
use crate::transform::{FitOptions, RegularizationParams, SparsityBudget};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
enum TauValue {
    Count(usize),
    Word(TauWord),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum TauWord {
    None,
    Dense,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    lambda: Option<f64>,
    epsilon: Option<f64>,
    mu: Option<f64>,
    tau: Option<TauValue>,
    iters: Option<usize>,
    tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Option<String>,
    depth: Option<usize>,
    seed: Option<u64>,
    ridge: Option<String>,
    lambda: Option<f64>,
    epsilon: Option<f64>,
    mu: Option<f64>,
    tau: Option<TauValue>,
    iters: Option<usize>,
    tol: Option<f64>,
    #[serde(default)]
    layer: BTreeMap<String, RawLayer>,
}

/// Settings of one layer, in `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerConfig {
    pub lambda: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub tau: Option<usize>,
    pub iters: usize,
    pub tol: f64,
}

impl Default for LayerConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            epsilon: 1.0,
            mu: 1.0,
            tau: None,
            iters: 50,
            tol: 1e-6,
        }
    }
}

impl LayerConfig {
    fn apply(&mut self, raw: &RawLayer) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = raw.$f { self.$f = v; } )* };
        }
        set!(lambda, epsilon, mu, iters, tol);
        match raw.tau {
            Some(TauValue::Count(t)) => self.tau = Some(t),
            Some(TauValue::Word(_)) => self.tau = None,
            None => {}
        }
    }

    pub fn to_spec<T: Scalar>(&self) -> Result<LayerSpec<T>> {
        Ok(LayerSpec {
            params: RegularizationParams::new(T::lit(self.lambda), T::lit(self.epsilon), T::lit(self.mu))?,
            budget: match self.tau {
                Some(t) => SparsityBudget::sparse(t)?,
                None => SparsityBudget::dense(),
            },
            fit: FitOptions::new(self.iters, T::lit(self.tol))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub kind: ModelKind,
    pub seed: u64,
    pub ridge: RidgeMode,
    /// One entry per layer; the length is the depth.
    pub layers: Vec<LayerConfig>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::Semi,
            seed: 0,
            ridge: RidgeMode::Auto,
            layers: vec![LayerConfig::default(); 2],
        }
    }
}

impl TrainConfig {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = TrainConfig::default();
        if let Some(k) = &raw.kind {
            cfg.kind = k.parse()?;
        }
        if let Some(s) = raw.seed {
            cfg.seed = s;
        }
        if let Some(r) = &raw.ridge {
            cfg.ridge = match r.as_str() {
                "auto" => RidgeMode::Auto,
                "off" => RidgeMode::Off,
                other => return Err(Error::Config(format!("unknown ridge mode {other:?}"))),
            };
        }
        let depth = raw.depth.unwrap_or(cfg.depth());
        if depth == 0 {
            return Err(Error::Config("depth must be >= 1".into()));
        }
        let mut base = LayerConfig::default();
        base.apply(&RawLayer {
            lambda: raw.lambda,
            epsilon: raw.epsilon,
            mu: raw.mu,
            tau: raw.tau,
            iters: raw.iters,
            tol: raw.tol,
        });
        cfg.layers = vec![base; depth];
        for (key, layer) in &raw.layer {
            let n: usize = key
                .parse()
                .ok()
                .filter(|n| (1..=depth).contains(n))
                .ok_or_else(|| Error::Config(format!("[layer.{key}] is not a layer in 1..={depth}")))?;
            cfg.layers[n - 1].apply(layer);
        }
        cfg.schedule::<f64>()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Per-layer settings, validated.
    pub fn schedule<T: Scalar>(&self) -> Result<LayerSchedule<T>> {
        let specs = self
            .layers
            .iter()
            .map(LayerConfig::to_spec)
            .collect::<Result<Vec<_>>>()?;
        LayerSchedule::new(specs).map_err(|e| Error::Config(e.to_string()))
    }

    /// Renders the config with every layer spelled out; parses back to itself.
    pub fn to_toml(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kind = \"{}\"", self.kind);
        let _ = writeln!(s, "depth = {}", self.depth());
        let _ = writeln!(s, "seed = {}", self.seed);
        let ridge = match self.ridge {
            RidgeMode::Auto => "auto",
            RidgeMode::Off => "off",
        };
        let _ = writeln!(s, "ridge = \"{ridge}\"");
        for (i, l) in self.layers.iter().enumerate() {
            let _ = writeln!(s, "\n[layer.{}]", i + 1);
            let _ = writeln!(s, "lambda = {:?}", l.lambda);
            let _ = writeln!(s, "epsilon = {:?}", l.epsilon);
            let _ = writeln!(s, "mu = {:?}", l.mu);
            match l.tau {
                Some(t) => {
                    let _ = writeln!(s, "tau = {t}");
                }
                None => {
                    let _ = writeln!(s, "tau = \"none\"");
                }
            }
            let _ = writeln!(s, "iters = {}", l.iters);
            let _ = writeln!(s, "tol = {:?}", l.tol);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Gallery,
    Probe,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    split: Split,
    domain1: Option<PathBuf>,
    domain2: Option<PathBuf>,
    labels: Option<PathBuf>,
}

/// Files making up one split of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub path: PathBuf,
    pub split: Split,
    pub domain1: Option<PathBuf>,
    pub domain2: Option<PathBuf>,
    pub labels: Option<PathBuf>,
}

/// Loaded, count-checked contents of a manifest.
#[derive(Debug, Clone)]
pub struct Dataset<T: Scalar> {
    pub x1: Option<FeatureMatrix<T>>,
    pub x2: Option<FeatureMatrix<T>>,
    pub labels: Option<Vec<String>>,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let err = |reason: String| Error::Manifest {
            path: path.to_path_buf(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: RawManifest = toml::from_str(&text).map_err(|e| err(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: Option<PathBuf>| p.map(|p| if p.is_relative() { base.join(p) } else { p });
        let m = Self {
            path: path.to_path_buf(),
            split: raw.split,
            domain1: resolve(raw.domain1),
            domain2: resolve(raw.domain2),
            labels: resolve(raw.labels),
        };
        if m.domain1.is_none() && m.domain2.is_none() {
            return Err(err("names no feature files".into()));
        }
        for f in [&m.domain1, &m.domain2, &m.labels].into_iter().flatten() {
            if !f.is_file() {
                return Err(err(format!("{} does not exist", f.display())));
            }
        }
        Ok(m)
    }

    /// Renders a manifest whose paths are written as given.
    pub fn render(split: Split, domain1: Option<&str>, domain2: Option<&str>, labels: Option<&str>) -> String {
        let mut s = String::new();
        let name = match split {
            Split::Train => "train",
            Split::Gallery => "gallery",
            Split::Probe => "probe",
        };
        let _ = writeln!(s, "split = \"{name}\"");
        for (k, v) in [("domain1", domain1), ("domain2", domain2), ("labels", labels)] {
            if let Some(v) = v {
                let _ = writeln!(s, "{k} = {v:?}");
            }
        }
        s
    }

    /// Loads every named file and checks that sample counts agree.
    pub fn load_data<T: Scalar>(&self) -> Result<Dataset<T>> {
        let x1 = self.domain1.as_deref().map(load_matrix::<T>).transpose()?;
        let x2 = self.domain2.as_deref().map(load_matrix::<T>).transpose()?;
        let labels = self.labels.as_deref().map(load_labels).transpose()?;
        let counts: Vec<(&str, usize)> = [
            x1.as_ref().map(|m| ("domain1", m.count())),
            x2.as_ref().map(|m| ("domain2", m.count())),
            labels.as_ref().map(|l| ("labels", l.len())),
        ]
        .into_iter()
        .flatten()
        .collect();
        if counts.windows(2).any(|w| w[0].1 != w[1].1) {
            return Err(Error::Manifest {
                path: self.path.clone(),
                reason: format!("sample counts disagree: {counts:?}"),
            });
        }
        if let (Some(a), Some(b)) = (&x1, &x2) {
            if a.dim() != b.dim() {
                return Err(Error::Manifest {
                    path: self.path.clone(),
                    reason: format!("feature dimensions differ: {} vs {}", a.dim(), b.dim()),
                });
            }
        }
        Ok(Dataset { x1, x2, labels })
    }
}
