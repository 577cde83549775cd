//! Feature domains and the feature space they span.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Domain of a single feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Domain {
    /// Real interval; a missing bound means unbounded on that side.
    Real {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upper: Option<f64>,
    },
    /// Finite ordered set of values (ordinal or categorical codes).
    Finite { values: Vec<f64> },
}

impl Domain {
    pub fn unbounded() -> Self {
        Domain::Real {
            lower: None,
            upper: None,
        }
    }

    pub fn interval(lower: f64, upper: f64) -> Self {
        Domain::Real {
            lower: Some(lower),
            upper: Some(upper),
        }
    }

    pub fn finite(values: impl Into<Vec<f64>>) -> Self {
        Domain::Finite { values: values.into() }
    }

    pub fn contains(&self, value: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        match self {
            Domain::Real { lower, upper } => lower.is_none_or(|lo| value >= lo) && upper.is_none_or(|hi| value <= hi),
            Domain::Finite { values } => values.contains(&value),
        }
    }

    pub fn is_finite_set(&self) -> bool {
        matches!(self, Domain::Finite { .. })
    }

    /// Smallest and largest admissible value (`None` when unbounded).
    pub fn hull(&self) -> (Option<f64>, Option<f64>) {
        match self {
            Domain::Real { lower, upper } => (*lower, *upper),
            Domain::Finite { values } => (
                values.iter().copied().reduce(f64::min),
                values.iter().copied().reduce(f64::max),
            ),
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        match self {
            Domain::Real { lower, upper } => {
                for b in [lower, upper].into_iter().flatten() {
                    if !b.is_finite() {
                        return Err(Error::Validation(format!(
                            "feature {}: interval bound {b} is not finite",
                            index + 1
                        )));
                    }
                }
                if let (Some(lo), Some(hi)) = (lower, upper) {
                    if lo > hi {
                        return Err(Error::Validation(format!(
                            "feature {}: interval lower bound {lo} exceeds upper bound {hi}",
                            index + 1
                        )));
                    }
                }
            }
            Domain::Finite { values } => {
                if values.is_empty() {
                    return Err(Error::Validation(format!(
                        "feature {}: finite domain is empty",
                        index + 1
                    )));
                }
                for (k, v) in values.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(Error::Validation(format!(
                            "feature {}: domain value {v} is not finite",
                            index + 1
                        )));
                    }
                    if values[..k].contains(v) {
                        return Err(Error::Validation(format!(
                            "feature {}: duplicate domain value {v}",
                            index + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Cartesian product of per-feature domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Domain>", into = "Vec<Domain>")]
pub struct FeatureSpace {
    domains: Vec<Domain>,
}

impl FeatureSpace {
    pub fn new(domains: Vec<Domain>) -> Result<Self> {
        if domains.is_empty() {
            return Err(Error::Validation("feature space needs at least one feature".into()));
        }
        for (i, d) in domains.iter().enumerate() {
            d.validate(i)?;
        }
        Ok(Self { domains })
    }

    /// `m` copies of the same domain.
    pub fn uniform(m: usize, domain: Domain) -> Result<Self> {
        Self::new(vec![domain; m])
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn domain(&self, feature: usize) -> &Domain {
        &self.domains[feature]
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn all_finite(&self) -> bool {
        self.domains.iter().all(Domain::is_finite_set)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.domains.len() && point.iter().zip(&self.domains).all(|(x, d)| d.contains(*x))
    }

    /// Index of the first coordinate outside its domain.
    pub fn first_violation(&self, point: &[f64]) -> Option<usize> {
        point.iter().zip(&self.domains).position(|(x, d)| !d.contains(*x))
    }
}

impl TryFrom<Vec<Domain>> for FeatureSpace {
    type Error = Error;

    fn try_from(domains: Vec<Domain>) -> Result<Self> {
        Self::new(domains)
    }
}

impl From<FeatureSpace> for Vec<Domain> {
    fn from(space: FeatureSpace) -> Self {
        space.domains
    }
}
