use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::norm::{Ball, Norm};
use crate::problem::ExplanationProblem;
use crate::space::Domain;

/// A total order on the features, most preferred first.
///
/// Every search keeps earlier features in the explanation whenever it has a
/// choice: deletion tries to drop features from the back, and the dichotomic
/// searches look for the shortest sufficient prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureOrder(Vec<usize>);

impl FeatureOrder {
    pub fn natural(m: usize) -> Self {
        Self((0..m).collect())
    }

    /// From a permutation of `0..m`.
    pub fn from_indices(indices: Vec<usize>, m: usize) -> Result<Self> {
        let mut seen = vec![false; m];
        for &i in &indices {
            if i >= m || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Usage(format!(
                    "feature order must be a permutation of 1..{m}, got {:?}",
                    indices.iter().map(|i| i + 1).collect::<Vec<_>>()
                )));
            }
        }
        if indices.len() != m {
            return Err(Error::Usage(format!(
                "feature order lists {} features, expected {m}",
                indices.len()
            )));
        }
        Ok(Self(indices))
    }

    pub fn from_one_based(indices: &[usize], m: usize) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::Usage("feature indices are 1-based".into()));
        }
        Self::from_indices(indices.iter().map(|i| i - 1).collect(), m)
    }

    /// Reads 1-based indices separated by whitespace or commas; a JSON array
    /// also parses.
    pub fn load(path: impl AsRef<Path>, m: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let indices = text
            .split(|c: char| c.is_whitespace() || c == ',' || c == '[' || c == ']')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>().map_err(|_| Error::Parse {
                    path: path.display().to_string(),
                    message: format!("not a feature index: {t:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_one_based(&indices, m)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    /// Members of `set` in this order.
    pub fn restrict(&self, set: &FeatureSet) -> Vec<usize> {
        self.0.iter().copied().filter(|&i| set.contains(i)).collect()
    }
}

impl fmt::Display for FeatureOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderStrategy {
    Natural,
    Sensitivity,
    File(PathBuf),
}

impl FromStr for OrderStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" => Ok(OrderStrategy::Natural),
            "sensitivity" => Ok(OrderStrategy::Sensitivity),
            _ => match s.strip_prefix("file=") {
                Some(p) if !p.is_empty() => Ok(OrderStrategy::File(PathBuf::from(p))),
                _ => Err(Error::Usage(format!(
                    "unknown order {s:?}; expected natural, sensitivity or file=PATH"
                ))),
            },
        }
    }
}

/// Smallest and largest values feature `i` can take inside the ball with
/// every other feature at the instance.
fn reachable_extremes(domain: &Domain, v: f64, ball: Ball) -> (f64, f64) {
    let r = match ball.norm() {
        Norm::L0 if ball.epsilon() >= 1.0 => f64::INFINITY,
        Norm::L0 => 0.0,
        _ => ball.epsilon(),
    };
    match domain {
        Domain::Finite { values } => values
            .iter()
            .filter(|&&x| (x - v).abs() <= r)
            .fold((v, v), |(lo, hi), &x| (lo.min(x), hi.max(x))),
        Domain::Real { lower, upper } => (
            lower.map_or(v - r, |l| l.max(v - r)),
            upper.map_or(v + r, |u| u.min(v + r)),
        ),
    }
}

/// Largest change of the predicted class's score obtained by moving one
/// feature to an extreme of its reachable range.
pub fn sensitivity_scores(problem: &ExplanationProblem, ball: Ball) -> Result<Vec<f64>> {
    let v = problem.point();
    let c = problem.label();
    let base = problem.model().score(v, c)?;
    let mut x = v.to_vec();
    let mut scores = Vec::with_capacity(v.len());
    for i in 0..v.len() {
        let (lo, hi) = reachable_extremes(problem.space().domain(i), v[i], ball);
        let mut best: f64 = 0.0;
        for extreme in [lo, hi] {
            if !extreme.is_finite() {
                best = f64::INFINITY;
                continue;
            }
            x[i] = extreme;
            best = best.max((problem.model().score(&x, c)? - base).abs());
        }
        x[i] = v[i];
        scores.push(best);
    }
    Ok(scores)
}

pub fn order_features(problem: &ExplanationProblem, strategy: &OrderStrategy, ball: Ball) -> Result<FeatureOrder> {
    let m = problem.num_features();
    match strategy {
        OrderStrategy::Natural => Ok(FeatureOrder::natural(m)),
        OrderStrategy::File(path) => FeatureOrder::load(path, m),
        OrderStrategy::Sensitivity => {
            if !problem.model().has_scores() {
                warn!(
                    "{} models have no scores; using the natural order",
                    problem.model().kind()
                );
                return Ok(FeatureOrder::natural(m));
            }
            let scores = sensitivity_scores(problem, ball)?;
            let mut idx: Vec<usize> = (0..m).collect();
            idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
            Ok(FeatureOrder(idx))
        }
    }
}
