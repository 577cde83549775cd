use std::time::Instant;

use log::warn;

use super::order::FeatureOrder;
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::norm::Ball;
use crate::oracle::{is_valid_witness, Oracle};
use crate::predicates::check_wcxp;
use crate::problem::{Explanation, ExplanationKind, ExplanationProblem, SearchStats, TraceEntry};

fn ask<O: Oracle + ?Sized>(
    oracle: &mut O,
    free: &FeatureSet,
    ball: Ball,
    stats: &mut SearchStats,
    trace: &mut Vec<TraceEntry>,
) -> Result<bool> {
    stats.oracle_calls += 1;
    let holds = check_wcxp(oracle, free, ball)?.holds;
    trace.push(TraceEntry {
        free: free.clone(),
        found: holds,
    });
    Ok(holds)
}

/// A weak CXp obtained from the guard call `WCXp(ℱ)`: the features the
/// oracle's witness changed, or ℱ when no usable witness comes back.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakCxpSeed {
    pub features: FeatureSet,
    pub witness: Option<Vec<f64>>,
}

/// Features changed by `witness`, or all of them when the witness is
/// absent or not an adversarial example of the ball.
pub(crate) fn witness_mask(problem: &ExplanationProblem, ball: Ball, witness: Option<Vec<f64>>) -> WeakCxpSeed {
    let witness = witness.filter(|w| {
        let ok = is_valid_witness(problem, ball, &FeatureSet::empty(), w);
        if !ok {
            warn!("oracle witness is not a valid adversarial example; ignoring it");
        }
        ok
    });
    let features = match &witness {
        Some(u) => (0..u.len()).filter(|&i| u[i] != problem.point()[i]).collect(),
        None => problem.all_features(),
    };
    WeakCxpSeed { features, witness }
}

/// The guard call. Fails with [`Error::NoAdvExample`] when the whole ball
/// is free of adversarial examples.
pub fn seed_weak_cxp<O: Oracle + ?Sized>(oracle: &mut O, ball: Ball) -> Result<WeakCxpSeed> {
    let problem = oracle.problem().clone();
    let all = problem.all_features();
    let check = check_wcxp(oracle, &all, ball)?;
    if !check.holds {
        return Err(Error::NoAdvExample { oracle_calls: 1 });
    }
    Ok(witness_mask(&problem, ball, check.witness))
}

/// Shrinks the weak CXp `free` to a CXp, trying to re-fix features from the
/// back of `order`.
pub(crate) fn shrink_cxp<O: Oracle + ?Sized>(
    oracle: &mut O,
    free: &FeatureSet,
    order: &FeatureOrder,
    ball: Ball,
    stats: &mut SearchStats,
    trace: &mut Vec<TraceEntry>,
) -> Result<FeatureSet> {
    let mut y = free.clone();
    for &i in order.restrict(free).iter().rev() {
        if ask(oracle, &y.without(i), ball, stats, trace)? {
            y.remove(i);
        }
    }
    Ok(y)
}

/// Shrinks the weak AXp `fixed` to an AXp, trying to free features from the
/// back of `order`.
pub(crate) fn shrink_axp<O: Oracle + ?Sized>(
    oracle: &mut O,
    fixed: &FeatureSet,
    order: &FeatureOrder,
    ball: Ball,
    stats: &mut SearchStats,
    trace: &mut Vec<TraceEntry>,
) -> Result<FeatureSet> {
    let m = oracle.problem().num_features();
    let mut x = fixed.clone();
    for &i in order.restrict(fixed).iter().rev() {
        let candidate = x.without(i);
        if !ask(oracle, &candidate.complement(m), ball, stats, trace)? {
            x = candidate;
        }
    }
    Ok(x)
}

/// Linear-search CXp: start with every feature free and walk `order` from
/// the back, re-fixing each feature whose removal keeps an adversarial
/// example. `m` oracle calls after the guard.
pub fn deletion_cxp<O: Oracle + ?Sized>(oracle: &mut O, order: &FeatureOrder, ball: Ball) -> Result<Explanation> {
    let start = Instant::now();
    let mut stats = SearchStats::default();
    let mut trace = Vec::new();
    let all = oracle.problem().all_features();
    if !ask(oracle, &all, ball, &mut stats, &mut trace)? {
        return Err(Error::NoAdvExample {
            oracle_calls: stats.oracle_calls,
        });
    }
    let features = shrink_cxp(oracle, &all, order, ball, &mut stats, &mut trace)?;
    stats.wall_time = start.elapsed();
    Ok(Explanation {
        kind: ExplanationKind::Cxp,
        features,
        ball,
        stats,
        trace,
    })
}

/// Deletion-based AXp starting from the weak AXp `seed_fixed`.
pub fn extract_axp<O: Oracle + ?Sized>(
    oracle: &mut O,
    seed_fixed: &FeatureSet,
    order: &FeatureOrder,
    ball: Ball,
) -> Result<Explanation> {
    let start = Instant::now();
    let m = oracle.problem().num_features();
    if seed_fixed.bound() > m {
        return Err(Error::Usage(format!("seed set {seed_fixed} exceeds 1..{m}")));
    }
    let mut stats = SearchStats::default();
    let mut trace = Vec::new();
    if ask(oracle, &seed_fixed.complement(m), ball, &mut stats, &mut trace)? {
        return Err(Error::Usage(format!(
            "fixing {seed_fixed} still admits an adversarial example; not a weak AXp"
        )));
    }
    let features = shrink_axp(oracle, seed_fixed, order, ball, &mut stats, &mut trace)?;
    stats.wall_time = start.elapsed();
    Ok(Explanation {
        kind: ExplanationKind::Axp,
        features,
        ball,
        stats,
        trace,
    })
}
