use std::time::Instant;

use super::map::MapFormula;
use crate::error::{Error, Result};
use crate::explain::{shrink_axp, shrink_cxp, FeatureOrder};
use crate::features::FeatureSet;
use crate::norm::Ball;
use crate::oracle::Oracle;
use crate::predicates::check_wcxp;
use crate::problem::{ExplanationKind, SearchStats};

/// Caps on the number of emitted explanations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnumerationLimits {
    /// Explanations of both kinds.
    pub total: Option<usize>,
    /// CXps only.
    pub cxps: Option<usize>,
}

/// `𝔸` and `ℂ`, in discovery order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExplanationSets {
    pub axps: Vec<FeatureSet>,
    pub cxps: Vec<FeatureSet>,
    /// The map ran out of seeds, so both lists are exhaustive.
    pub complete: bool,
    pub stats: SearchStats,
}

/// One emitted explanation.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission<'a> {
    pub kind: ExplanationKind,
    pub features: &'a FeatureSet,
    /// Oracle calls spent so far.
    pub oracle_calls: u64,
}

/// Enumeration stopped by an oracle failure; `partial` holds what was found.
#[derive(Debug)]
pub struct Aborted {
    pub partial: ExplanationSets,
    pub error: Error,
}

impl From<Box<Aborted>> for Error {
    fn from(a: Box<Aborted>) -> Self {
        a.error
    }
}

/// Joint enumeration of all AXps and CXps.
///
/// Each seed from the map is a candidate free set `Y`. A weak CXp is shrunk
/// to a CXp and its free supersets are blocked; otherwise the complement is
/// a weak AXp, shrunk to an AXp whose fixed supersets are blocked.
pub fn marco_enumerate<O, F>(
    oracle: &mut O,
    order: &FeatureOrder,
    ball: Ball,
    limits: EnumerationLimits,
    mut emit: F,
) -> Result<ExplanationSets, Box<Aborted>>
where
    O: Oracle + ?Sized,
    F: FnMut(&Emission<'_>),
{
    let start = Instant::now();
    let m = oracle.problem().num_features();
    let mut map = MapFormula::new(m);
    let mut sets = ExplanationSets::default();
    let mut trace = Vec::new();
    let reached = |sets: &ExplanationSets| {
        limits.total.is_some_and(|t| sets.axps.len() + sets.cxps.len() >= t)
            || limits.cxps.is_some_and(|c| sets.cxps.len() >= c)
    };
    let mut step = |sets: &mut ExplanationSets, map: &mut MapFormula, seed: Vec<bool>| -> Result<()> {
        let free = FeatureSet::from_mask(&seed);
        sets.stats.oracle_calls += 1;
        let (kind, found) = if check_wcxp(oracle, &free, ball)?.holds {
            let cxp = shrink_cxp(oracle, &free, order, ball, &mut sets.stats, &mut trace)?;
            map.block_free_supersets(&cxp);
            sets.cxps.push(cxp);
            (ExplanationKind::Cxp, sets.cxps.last())
        } else {
            let axp = shrink_axp(oracle, &free.complement(m), order, ball, &mut sets.stats, &mut trace)?;
            map.block_fixed_supersets(&axp);
            sets.axps.push(axp);
            (ExplanationKind::Axp, sets.axps.last())
        };
        trace.clear();
        emit(&Emission {
            kind,
            features: found.expect("just pushed"),
            oracle_calls: sets.stats.oracle_calls,
        });
        Ok(())
    };
    loop {
        let Some(seed) = map.next_model(true) else {
            sets.complete = true;
            break;
        };
        if reached(&sets) {
            break;
        }
        if let Err(error) = step(&mut sets, &mut map, seed) {
            sets.stats.wall_time = start.elapsed();
            return Err(Box::new(Aborted { partial: sets, error }));
        }
    }
    sets.stats.wall_time = start.elapsed();
    Ok(sets)
}
