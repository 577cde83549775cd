//! Joint enumeration of AXps and CXps over a selector map, hitting-set
//! duality checks, and feature attribution from enumerated CXps.

mod ffa;
mod map;
mod marco;
#[cfg(test)]
mod tests;

pub use ffa::{ffa_scores, FfaScores};
pub use map::{Lit, MapFormula};
pub use marco::{marco_enumerate, Aborted, Emission, EnumerationLimits, ExplanationSets};

use crate::error::{Error, Result};
use crate::features::FeatureSet;

fn hits_all(x: &FeatureSet, family: &[FeatureSet]) -> bool {
    family.iter().all(|s| x.intersects(s))
}

/// Whether `x` hits every member of `family` and no proper subset does.
pub fn is_minimal_hitting_set(x: &FeatureSet, family: &[FeatureSet]) -> bool {
    hits_all(x, family) && x.iter().all(|i| !hits_all(&x.without(i), family))
}

/// Every AXp is a minimal hitting set of the CXps and vice versa.
pub fn check_duality(sets: &ExplanationSets) -> Result<bool> {
    if !sets.complete {
        return Err(Error::Usage(
            "duality can only be checked on a complete enumeration".into(),
        ));
    }
    Ok(sets.axps.iter().all(|a| is_minimal_hitting_set(a, &sets.cxps))
        && sets.cxps.iter().all(|c| is_minimal_hitting_set(c, &sets.axps)))
}
