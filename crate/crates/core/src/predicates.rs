//! The weak-explanation predicates every algorithm is built on.

use crate::error::{Error, OracleError, Result};
use crate::features::FeatureSet;
use crate::norm::{distance, Ball};
use crate::oracle::{Oracle, OracleAnswer, OracleQuery};
use crate::problem::ExplanationProblem;

/// `‖x − v‖ ≤ ε ∧ κ(x) ≠ c`, closed ball.
pub fn is_adv_example(x: &[f64], problem: &ExplanationProblem, ball: Ball) -> Result<bool> {
    if x.len() != problem.num_features() {
        return Err(Error::Usage(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            problem.num_features()
        )));
    }
    if let Some(i) = problem.space().first_violation(x) {
        return Err(Error::Validation(format!(
            "coordinate x{} = {} lies outside its domain",
            i + 1,
            x[i]
        )));
    }
    let d = distance(x, problem.point(), ball.norm())?;
    Ok(d <= ball.epsilon() && problem.model().predict(x) != problem.label())
}

/// Outcome of a weak-CXp check.
#[derive(Debug, Clone, PartialEq)]
pub struct WcxpCheck {
    pub holds: bool,
    pub witness: Option<Vec<f64>>,
}

/// Asks `oracle` once, with `free` unconstrained and every other feature fixed.
pub fn check_wcxp<O: Oracle + ?Sized>(oracle: &mut O, free: &FeatureSet, ball: Ball) -> Result<WcxpCheck> {
    let m = oracle.problem().num_features();
    let query = OracleQuery::freeing(ball, free, m);
    match oracle.find_adv_ex(&query)? {
        OracleAnswer::Found { witness } => Ok(WcxpCheck { holds: true, witness }),
        OracleAnswer::NotFound => Ok(WcxpCheck {
            holds: false,
            witness: None,
        }),
        OracleAnswer::Cancelled => Err(OracleError::Protocol("uncancelled query came back cancelled".into()).into()),
    }
}

/// Weak AXp: fixing `fixed` leaves no adversarial example in the ball.
pub fn check_waxp<O: Oracle + ?Sized>(oracle: &mut O, fixed: &FeatureSet, ball: Ball) -> Result<bool> {
    let m = oracle.problem().num_features();
    Ok(!check_wcxp(oracle, &fixed.complement(m), ball)?.holds)
}

/// Weak CXp whose every one-feature reduction is not. `|candidate| + 1` calls
/// (one when the candidate is not a weak CXp).
pub fn is_minimal_cxp<O: Oracle + ?Sized>(oracle: &mut O, candidate: &FeatureSet, ball: Ball) -> Result<bool> {
    if !check_wcxp(oracle, candidate, ball)?.holds {
        return Ok(false);
    }
    for i in candidate.iter() {
        if check_wcxp(oracle, &candidate.without(i), ball)?.holds {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Dual of [`is_minimal_cxp`].
pub fn is_minimal_axp<O: Oracle + ?Sized>(oracle: &mut O, candidate: &FeatureSet, ball: Ball) -> Result<bool> {
    if !check_waxp(oracle, candidate, ball)? {
        return Ok(false);
    }
    for i in candidate.iter() {
        if check_waxp(oracle, &candidate.without(i), ball)? {
            return Ok(false);
        }
    }
    Ok(true)
}
