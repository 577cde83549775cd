//! Dichotomic CXp search, sequential and with parallel probes.
//!
//! State: confirmed transition features `S` and an ordered list `W` of
//! undecided features with `WCXp(S ∪ W)`. Each round finds the smallest `t`
//! with `WCXp(S ∪ W[..t])`; `W[t-1]` is a transition feature, moves to `S`,
//! and everything after it is discarded. `t = 0` means `S` alone suffices.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::deletion::witness_mask;
use super::order::FeatureOrder;
use super::probe::{with_pool, BatchMode, Prober, Sequential};
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::norm::Ball;
use crate::oracle::{Oracle, OracleFactory};
use crate::problem::{Explanation, ExplanationKind, SearchStats, TraceEntry};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Start from the features changed by the guard call's witness instead
    /// of all features.
    pub use_witness_seed: bool,
    /// Record decisive oracle answers in [`Explanation::trace`].
    pub trace: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            use_witness_seed: true,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwiftParams {
    /// Concurrent probes `q`.
    pub workers: usize,
    /// Feature-disjunction threshold δ ∈ [0, 1]; `None` disables it.
    pub delta: Option<f64>,
    /// Seed for the feature-disjunction picks.
    pub seed: u64,
    pub options: SearchOptions,
}

impl SwiftParams {
    pub fn new(workers: usize) -> Self {
        Self {
            workers,
            delta: None,
            seed: 0,
            options: SearchOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::Usage("at least one worker is required".into()));
        }
        if let Some(d) = self.delta {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::Usage(format!("delta must lie in [0, 1], got {d}")));
            }
        }
        Ok(())
    }
}

/// Undecided-feature state shared by the dichotomic rounds and the
/// feature-disjunction step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchState {
    pub s: FeatureSet,
    pub w: Vec<usize>,
}

impl SearchState {
    fn prefix(&self, t: usize) -> FeatureSet {
        let mut free = self.s.clone();
        for &i in &self.w[..t] {
            free.insert(i);
        }
        free
    }
}

/// `k` probe positions strictly inside `(lo, hi)`, evenly spread.
fn splits(lo: usize, hi: usize, k: usize) -> Vec<usize> {
    let k = k.min(hi.saturating_sub(lo + 1));
    (1..=k).map(|j| lo + (j * (hi - lo)).div_ceil(k + 1)).collect()
}

struct Engine<'r> {
    trace: Option<&'r mut Vec<TraceEntry>>,
    stats: SearchStats,
}

impl Engine<'_> {
    fn record(&mut self, frees: &[FeatureSet], answers: &[Option<bool>]) {
        if let Some(trace) = self.trace.as_deref_mut() {
            for (free, found) in frees.iter().zip(answers) {
                if let Some(found) = found {
                    trace.push(TraceEntry {
                        free: free.clone(),
                        found: *found,
                    });
                }
            }
        }
    }

    fn probe<P: Prober>(&mut self, prober: &mut P, frees: &[FeatureSet], mode: BatchMode) -> Result<Vec<Option<bool>>> {
        let answers: Vec<Option<bool>> = prober
            .run(frees, mode, &mut self.stats)?
            .into_iter()
            .map(|a| a.map(|c| c.holds))
            .collect();
        self.record(frees, &answers);
        Ok(answers)
    }

    /// One dichotomic round. Returns `true` when `S` alone is a weak CXp.
    fn round<P: Prober>(&mut self, prober: &mut P, state: &mut SearchState, q: usize) -> Result<bool> {
        let mut lo: Option<usize> = if state.s.is_empty() { Some(0) } else { None };
        let mut hi = state.w.len();
        loop {
            let mut idx = Vec::with_capacity(q);
            let base = match lo {
                None => {
                    idx.push(0);
                    splits(0, hi, q - 1)
                }
                Some(l) => {
                    if hi - l <= 1 {
                        break;
                    }
                    splits(l, hi, q)
                }
            };
            idx.extend(base);
            let frees: Vec<FeatureSet> = idx.iter().map(|&t| state.prefix(t)).collect();
            let answers = self.probe(prober, &frees, BatchMode::FirstTrue)?;
            let mut new_lo = lo;
            let mut found = None;
            for (&t, a) in idx.iter().zip(&answers) {
                match a {
                    Some(true) => {
                        found = Some(t);
                        break;
                    }
                    Some(false) => new_lo = Some(t),
                    None => unreachable!("answers up to the first true are decisive"),
                }
            }
            if found == Some(0) {
                return Ok(true);
            }
            if let Some(t) = found {
                hi = t;
            }
            lo = new_lo;
        }
        let t = hi;
        let feature = state.w[t - 1];
        state.s.insert(feature);
        state.w.truncate(t - 1);
        Ok(false)
    }

    fn disjunct<P: Prober>(
        &mut self,
        prober: &mut P,
        state: &mut SearchState,
        q: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        let (changed, success) = feat_disjunct_step(prober, state, q, rng, &mut self.stats, |f, a| {
            if let Some(trace) = self.trace.as_deref_mut() {
                for (free, found) in f.iter().zip(a) {
                    trace.push(TraceEntry {
                        free: free.clone(),
                        found: *found,
                    });
                }
            }
        })?;
        debug_assert!(changed);
        self.stats.fd_rounds += 1;
        if success {
            self.stats.fd_successes += 1;
        }
        Ok(())
    }
}

/// One feature-disjunction step on the last `min(q, |W|)` features `T` of
/// `W`: probes `S ∪ W ∖ {i}` for each `i ∈ T`. When every probe fails, all
/// of `T` moves to `S`; otherwise one droppable feature (seeded pick) is
/// removed from `W`. Returns `(progress, whole_chunk_moved)`.
fn feat_disjunct_step<P: Prober>(
    prober: &mut P,
    state: &mut SearchState,
    q: usize,
    rng: &mut ChaCha8Rng,
    stats: &mut SearchStats,
    mut record: impl FnMut(&[FeatureSet], &[bool]),
) -> Result<(bool, bool)> {
    let width = q.min(state.w.len());
    if width == 0 {
        return Ok((false, false));
    }
    let chunk: Vec<usize> = state.w[state.w.len() - width..].to_vec();
    let full = state.prefix(state.w.len());
    let frees: Vec<FeatureSet> = chunk.iter().map(|&i| full.without(i)).collect();
    let answers: Vec<bool> = prober
        .run(&frees, BatchMode::All, stats)?
        .into_iter()
        .map(|a| a.expect("all-mode probes are never cancelled").holds)
        .collect();
    record(&frees, &answers);
    let droppable: Vec<usize> = chunk
        .iter()
        .zip(&answers)
        .filter(|(_, &a)| a)
        .map(|(&i, _)| i)
        .collect();
    if droppable.is_empty() {
        for &i in &chunk {
            state.s.insert(i);
        }
        state.w.truncate(state.w.len() - width);
        Ok((true, true))
    } else {
        let pick = droppable[rng.random_range(0..droppable.len())];
        state.w.retain(|&i| i != pick);
        Ok((true, false))
    }
}

/// Public form of one feature-disjunction step, on a single session.
pub fn feat_disjunct<O: Oracle + ?Sized>(
    oracle: &mut O,
    state: &mut SearchState,
    q: usize,
    ball: Ball,
    seed: u64,
) -> Result<SearchStats> {
    let mut stats = SearchStats::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prober = Sequential { oracle, ball };
    let (_, success) = feat_disjunct_step(&mut prober, state, q, &mut rng, &mut stats, |_, _| {})?;
    stats.fd_rounds = 1;
    stats.fd_successes = u64::from(success);
    Ok(stats)
}

fn fd_active(params: &SwiftParams, w_len: usize, m: usize) -> bool {
    match params.delta {
        None => false,
        Some(delta) => {
            let threshold = ((1.0 - delta) * m as f64).ceil() as usize;
            w_len <= params.workers.max(threshold)
        }
    }
}

fn run_engine<P: Prober>(
    prober: &mut P,
    order: &FeatureOrder,
    ball: Ball,
    params: &SwiftParams,
) -> Result<Explanation> {
    params.validate()?;
    let start = Instant::now();
    let m = prober.problem().num_features();
    if order.len() != m {
        return Err(Error::Usage(format!(
            "feature order has {} entries, expected {m}",
            order.len()
        )));
    }
    let mut trace = Vec::new();
    let mut engine = Engine {
        trace: params.options.trace.then_some(&mut trace),
        stats: SearchStats::default(),
    };
    let all = prober.problem().all_features();
    let guard = prober.run(std::slice::from_ref(&all), BatchMode::FirstTrue, &mut engine.stats)?;
    let guard = guard.into_iter().next().flatten().expect("single probe is decisive");
    engine.record(std::slice::from_ref(&all), &[Some(guard.holds)]);
    if !guard.holds {
        return Err(Error::NoAdvExample {
            oracle_calls: engine.stats.oracle_calls,
        });
    }
    let seed_set = if params.options.use_witness_seed {
        witness_mask(prober.problem(), ball, guard.witness).features
    } else {
        all
    };
    let mut state = SearchState {
        s: FeatureSet::empty(),
        w: order.restrict(&seed_set),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let q = params.workers;
    while !state.w.is_empty() {
        if fd_active(params, state.w.len(), m) {
            engine.disjunct(prober, &mut state, q, &mut rng)?;
        } else if engine.round(prober, &mut state, q)? {
            break;
        }
    }
    let mut stats = engine.stats;
    stats.wall_time = start.elapsed();
    Ok(Explanation {
        kind: ExplanationKind::Cxp,
        features: state.s,
        ball,
        stats,
        trace,
    })
}

/// Sequential dichotomic search.
pub fn dichotomic_cxp<O: Oracle + ?Sized>(
    oracle: &mut O,
    order: &FeatureOrder,
    ball: Ball,
    options: &SearchOptions,
) -> Result<Explanation> {
    let params = SwiftParams {
        workers: 1,
        delta: None,
        seed: 0,
        options: options.clone(),
    };
    run_engine(&mut Sequential { oracle, ball }, order, ball, &params)
}

/// Dichotomic search with `q` concurrent probes per step and optional
/// feature disjunction near the end.
pub fn swift_cxp(
    factory: &dyn OracleFactory,
    order: &FeatureOrder,
    ball: Ball,
    params: &SwiftParams,
) -> Result<Explanation> {
    params.validate()?;
    with_pool(factory, params.workers, ball, |pool| {
        run_engine(pool, order, ball, params)
    })
}
