//! Distance-restricted contrastive (CXp) and abductive (AXp) explanations
//! of classifiers, computed by querying an adversarial-example oracle.

pub mod cli;
pub mod enumerate;
pub mod error;
pub mod explain;
pub mod features;
pub mod fixtures;
pub mod mincxp;
pub mod models;
pub mod norm;
pub mod oracle;
pub mod predicates;
pub mod problem;
pub mod space;

pub use error::{Error, OracleError, Result};
pub use features::FeatureSet;
pub use models::{load_model, save_model, Model, ModelFile};
pub use norm::{distance, Ball, Norm};
pub use problem::{Explanation, ExplanationKind, ExplanationProblem, Instance, SearchStats};
pub use space::{Domain, FeatureSpace};
