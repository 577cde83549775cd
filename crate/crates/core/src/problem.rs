//! Explanation problems and the explanations computed for them.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::models::{Model, ModelFile};
use crate::norm::Ball;
use crate::space::FeatureSpace;

/// A point of feature space together with its predicted class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub point: Vec<f64>,
    pub label: usize,
}

impl Instance {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).expect("instances always serialize") + "\n";
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// `E = (M, (v, c))`: a classifier over a feature space plus the instance
/// being explained. Immutable and cheap to clone.
#[derive(Debug, Clone)]
pub struct ExplanationProblem {
    model: Arc<Model>,
    space: Arc<FeatureSpace>,
    instance: Arc<Instance>,
}

impl ExplanationProblem {
    /// Checks arity, domain membership of `v`, and that the model actually
    /// predicts `label` at `v`.
    pub fn new(model: Model, space: FeatureSpace, instance: Instance) -> Result<Self> {
        if model.num_features() != space.len() {
            return Err(Error::Validation(format!(
                "model takes {} features but the feature space has {}",
                model.num_features(),
                space.len()
            )));
        }
        if instance.point.len() != space.len() {
            return Err(Error::Validation(format!(
                "instance has {} coordinates but the model takes {}",
                instance.point.len(),
                space.len()
            )));
        }
        if let Some(i) = space.first_violation(&instance.point) {
            return Err(Error::Validation(format!(
                "instance coordinate x{} = {} lies outside its domain",
                i + 1,
                instance.point[i]
            )));
        }
        if instance.label >= model.num_classes() {
            return Err(Error::Validation(format!(
                "label {} outside 0..{}",
                instance.label,
                model.num_classes()
            )));
        }
        let predicted = model.predict(&instance.point);
        if predicted != instance.label {
            return Err(Error::Validation(format!(
                "model predicts class {predicted} at the instance, not the stated label {}",
                instance.label
            )));
        }
        Ok(Self {
            model: Arc::new(model),
            space: Arc::new(space),
            instance: Arc::new(instance),
        })
    }

    /// Explains whatever the model predicts at `point`.
    pub fn at_point(model: Model, space: FeatureSpace, point: Vec<f64>) -> Result<Self> {
        if point.len() != model.num_features() {
            return Err(Error::Validation(format!(
                "instance has {} coordinates but the model takes {}",
                point.len(),
                model.num_features()
            )));
        }
        let label = model.predict(&point);
        Self::new(model, space, Instance { point, label })
    }

    pub fn from_file(file: ModelFile, instance: Instance) -> Result<Self> {
        Self::new(file.model, file.space, instance)
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn point(&self) -> &[f64] {
        &self.instance.point
    }

    pub fn label(&self) -> usize {
        self.instance.label
    }

    /// Number of features `m`.
    pub fn num_features(&self) -> usize {
        self.space.len()
    }

    pub fn num_classes(&self) -> usize {
        self.model.num_classes()
    }

    pub fn all_features(&self) -> FeatureSet {
        FeatureSet::full(self.num_features())
    }

    /// Same problem around another instance of the same model.
    pub fn with_instance(&self, instance: Instance) -> Result<Self> {
        Self::new((*self.model).clone(), (*self.space).clone(), instance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExplanationKind {
    Axp,
    Cxp,
}

impl ExplanationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExplanationKind::Axp => "axp",
            ExplanationKind::Cxp => "cxp",
        }
    }
}

/// Oracle-usage counters collected while computing an explanation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Oracle queries issued (cancelled probes included). Deterministic.
    pub oracle_calls: u64,
    /// Parallel probe batches dispatched.
    pub batches: u64,
    /// Probes cancelled before answering. Depends on timing.
    pub cancelled_probes: u64,
    /// Feature-disjunction rounds, and how many moved a whole chunk at once.
    pub fd_rounds: u64,
    pub fd_successes: u64,
    pub wall_time: Duration,
}

impl SearchStats {
    pub fn absorb(&mut self, other: &SearchStats) {
        self.oracle_calls += other.oracle_calls;
        self.batches += other.batches;
        self.cancelled_probes += other.cancelled_probes;
        self.fd_rounds += other.fd_rounds;
        self.fd_successes += other.fd_successes;
        self.wall_time += other.wall_time;
    }
}

/// One decisive oracle answer, used to compare search traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub free: FeatureSet,
    pub found: bool,
}

#[derive(Debug, Clone)]
pub struct Explanation {
    pub kind: ExplanationKind,
    pub features: FeatureSet,
    pub ball: Ball,
    pub stats: SearchStats,
    /// Decisive answers in the order the algorithm consumed them; filled
    /// only when tracing was requested.
    pub trace: Vec<TraceEntry>,
}

impl Explanation {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}
