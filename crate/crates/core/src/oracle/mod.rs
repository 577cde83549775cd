//! The FindAdvEx contract: decide whether a constrained adversarial example
//! exists inside the ε-ball when a set of features is pinned to the
//! instance values.
//!
//! Sessions are bound to one [`ExplanationProblem`]. A session is used from
//! one thread at a time; an [`OracleFactory`] hands out independent sessions
//! for concurrent probes. Every implementation polls the query's
//! [`CancelToken`] and answers [`OracleAnswer::Cancelled`] promptly once it
//! fires.

mod cancel;
mod exhaustive;
pub mod external;
mod latency;
mod linear;
pub mod protocol;
mod select;
pub mod server;

use crate::error::OracleError;
use crate::features::FeatureSet;
use crate::norm::Ball;
use crate::problem::ExplanationProblem;

pub use cancel::CancelToken;
pub use exhaustive::{exhaustive_find, ExhaustiveOracle, DEFAULT_ENUMERATION_CAP};
pub use external::{ExternalConfig, ExternalOracle};
pub use latency::{Delay, LatencyOracle};
pub use linear::{linear_min_margin, LinearOracle, MarginBound, BOUNDARY_TOLERANCE};
pub use select::{Backend, OracleSpec};

/// One constrained-AEx decision.
#[derive(Debug, Clone)]
pub struct OracleQuery {
    pub ball: Ball,
    /// Features pinned to the instance values.
    pub fixed: FeatureSet,
    pub cancel: CancelToken,
}

impl OracleQuery {
    pub fn new(ball: Ball, fixed: FeatureSet) -> Self {
        Self {
            ball,
            fixed,
            cancel: CancelToken::new(),
        }
    }

    /// Query freeing exactly `free` (everything else fixed).
    pub fn freeing(ball: Ball, free: &FeatureSet, m: usize) -> Self {
        Self::new(ball, free.complement(m))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleAnswer {
    /// An adversarial example exists; the witness is optional.
    Found {
        witness: Option<Vec<f64>>,
    },
    NotFound,
    Cancelled,
}

impl OracleAnswer {
    pub fn found(&self) -> Option<bool> {
        match self {
            OracleAnswer::Found { .. } => Some(true),
            OracleAnswer::NotFound => Some(false),
            OracleAnswer::Cancelled => None,
        }
    }

    pub fn witness(&self) -> Option<&[f64]> {
        match self {
            OracleAnswer::Found { witness } => witness.as_deref(),
            _ => None,
        }
    }
}

pub trait Oracle: Send {
    fn problem(&self) -> &ExplanationProblem;

    fn find_adv_ex(&mut self, query: &OracleQuery) -> Result<OracleAnswer, OracleError>;
}

impl Oracle for Box<dyn Oracle> {
    fn problem(&self) -> &ExplanationProblem {
        (**self).problem()
    }

    fn find_adv_ex(&mut self, query: &OracleQuery) -> Result<OracleAnswer, OracleError> {
        (**self).find_adv_ex(query)
    }
}

/// Source of independent oracle sessions.
pub trait OracleFactory: Send + Sync {
    fn problem(&self) -> &ExplanationProblem;

    fn session(&self) -> Result<Box<dyn Oracle>, OracleError>;
}

/// Any cloneable session is its own factory.
impl<T> OracleFactory for T
where
    T: Oracle + Clone + Sync + 'static,
{
    fn problem(&self) -> &ExplanationProblem {
        Oracle::problem(self)
    }

    fn session(&self) -> Result<Box<dyn Oracle>, OracleError> {
        Ok(Box::new(self.clone()))
    }
}

/// True when `x` is an adversarial example inside `ball` that agrees with
/// the instance on every feature in `fixed`.
pub fn is_valid_witness(problem: &ExplanationProblem, ball: Ball, fixed: &FeatureSet, x: &[f64]) -> bool {
    let v = problem.point();
    x.len() == v.len()
        && problem.space().contains(x)
        && fixed.iter().all(|i| x[i] == v[i])
        && ball.contains(x, v).unwrap_or(false)
        && problem.model().predict(x) != problem.label()
}
