//! Cardinality-minimum CXps by implicit hitting sets over a growing set of
//! AXps.

mod hitting;

use std::time::Instant;

pub use hitting::{min_hitting_set, HittingInstance};

use crate::error::{Error, Result};
use crate::explain::{shrink_axp, FeatureOrder};
use crate::features::FeatureSet;
use crate::norm::Ball;
use crate::oracle::Oracle;
use crate::predicates::check_wcxp;
use crate::problem::{Explanation, ExplanationKind, SearchStats};

#[derive(Debug, Clone)]
pub struct MinCxp {
    pub explanation: Explanation,
    /// Every CXp has at least this many features. Equal to the size of the
    /// returned set.
    pub lower_bound: usize,
    /// Hitting-set rounds, the last one included.
    pub iterations: usize,
    /// AXps found along the way.
    pub axps: Vec<FeatureSet>,
    /// Hitting-set size per round; non-decreasing.
    pub bounds: Vec<usize>,
}

/// Smallest CXp. Each round takes a minimum hitting set `Y` of the AXps
/// collected so far; if freeing `Y` admits an adversarial example it is
/// optimal, otherwise `ℱ∖Y` is a weak AXp that is shrunk and added.
pub fn smallest_cxp<O: Oracle + ?Sized>(oracle: &mut O, ball: Ball) -> Result<MinCxp> {
    let start = Instant::now();
    let m = oracle.problem().num_features();
    let order = FeatureOrder::natural(m);
    let mut stats = SearchStats::default();
    let mut trace = Vec::new();
    stats.oracle_calls += 1;
    if !check_wcxp(oracle, &FeatureSet::full(m), ball)?.holds {
        return Err(Error::NoAdvExample {
            oracle_calls: stats.oracle_calls,
        });
    }
    let mut hs = HittingInstance::new(m);
    let mut bounds = Vec::new();
    loop {
        let y = min_hitting_set(&hs)?;
        bounds.push(y.len());
        stats.oracle_calls += 1;
        if check_wcxp(oracle, &y, ball)?.holds {
            stats.wall_time = start.elapsed();
            return Ok(MinCxp {
                lower_bound: y.len(),
                iterations: bounds.len(),
                axps: hs.members().to_vec(),
                bounds,
                explanation: Explanation {
                    kind: ExplanationKind::Cxp,
                    features: y,
                    ball,
                    stats,
                    trace: Vec::new(),
                },
            });
        }
        let axp = shrink_axp(oracle, &y.complement(m), &order, ball, &mut stats, &mut trace)?;
        trace.clear();
        hs.add(axp)?;
    }
}
