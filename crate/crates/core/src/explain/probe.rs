//! Batches of weak-CXp probes, answered sequentially or by a worker pool.

use std::thread;

use crossbeam_channel::{unbounded, Receiver, Sender};

use crate::error::{OracleError, Result};
use crate::features::FeatureSet;
use crate::norm::Ball;
use crate::oracle::{CancelToken, Oracle, OracleAnswer, OracleFactory, OracleQuery};
use crate::predicates::WcxpCheck;
use crate::problem::{ExplanationProblem, SearchStats};

/// How much of a batch must be answered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BatchMode {
    /// Probes form a monotone chain; only answers up to the first `true`
    /// matter, later probes are cancelled.
    FirstTrue,
    /// Every probe must be answered.
    All,
}

/// Answers `None` mark probes that were cancelled or never run.
pub(crate) trait Prober {
    fn problem(&self) -> &ExplanationProblem;

    fn run(&mut self, frees: &[FeatureSet], mode: BatchMode, stats: &mut SearchStats)
        -> Result<Vec<Option<WcxpCheck>>>;
}

fn to_check(answer: OracleAnswer) -> Option<WcxpCheck> {
    match answer {
        OracleAnswer::Found { witness } => Some(WcxpCheck { holds: true, witness }),
        OracleAnswer::NotFound => Some(WcxpCheck {
            holds: false,
            witness: None,
        }),
        OracleAnswer::Cancelled => None,
    }
}

/// Runs probes one after another on a single session.
pub(crate) struct Sequential<'a, O: Oracle + ?Sized> {
    pub oracle: &'a mut O,
    pub ball: Ball,
}

impl<O: Oracle + ?Sized> Prober for Sequential<'_, O> {
    fn problem(&self) -> &ExplanationProblem {
        self.oracle.problem()
    }

    fn run(
        &mut self,
        frees: &[FeatureSet],
        mode: BatchMode,
        stats: &mut SearchStats,
    ) -> Result<Vec<Option<WcxpCheck>>> {
        let m = self.oracle.problem().num_features();
        let mut out = vec![None; frees.len()];
        stats.batches += 1;
        for (slot, free) in out.iter_mut().zip(frees) {
            stats.oracle_calls += 1;
            let answer = self.oracle.find_adv_ex(&OracleQuery::freeing(self.ball, free, m))?;
            let check = to_check(answer)
                .ok_or_else(|| OracleError::Protocol("uncancelled query came back cancelled".into()))?;
            let stop = mode == BatchMode::FirstTrue && check.holds;
            *slot = Some(check);
            if stop {
                break;
            }
        }
        Ok(out)
    }
}

struct Job {
    batch: u64,
    index: usize,
    query: OracleQuery,
}

struct Done {
    batch: u64,
    index: usize,
    answer: Result<OracleAnswer, OracleError>,
}

/// Probes dispatched to `q` worker threads, one oracle session each.
pub(crate) struct Pool<'p> {
    problem: &'p ExplanationProblem,
    ball: Ball,
    jobs: Sender<Job>,
    done: Receiver<Done>,
    batch: u64,
}

fn worker(mut session: Box<dyn Oracle>, jobs: Receiver<Job>, done: Sender<Done>) {
    for job in jobs {
        let answer = session.find_adv_ex(&job.query);
        if done
            .send(Done {
                batch: job.batch,
                index: job.index,
                answer,
            })
            .is_err()
        {
            break;
        }
    }
}

/// Runs `body` with a pool of `q` workers; the workers are joined before
/// this returns.
pub(crate) fn with_pool<F, R>(factory: &dyn OracleFactory, q: usize, ball: Ball, body: F) -> Result<R>
where
    F: FnOnce(&mut Pool<'_>) -> Result<R>,
{
    let sessions = (0..q.max(1))
        .map(|_| factory.session())
        .collect::<Result<Vec<_>, OracleError>>()?;
    let (job_tx, job_rx) = unbounded::<Job>();
    let (done_tx, done_rx) = unbounded::<Done>();
    thread::scope(|scope| {
        for session in sessions {
            let (jobs, done) = (job_rx.clone(), done_tx.clone());
            scope.spawn(move || worker(session, jobs, done));
        }
        drop(done_tx);
        let mut pool = Pool {
            problem: factory.problem(),
            ball,
            jobs: job_tx,
            done: done_rx,
            batch: 0,
        };
        body(&mut pool)
        // dropping `pool` closes the job channel and lets the workers exit
    })
}

impl Prober for Pool<'_> {
    fn problem(&self) -> &ExplanationProblem {
        self.problem
    }

    fn run(
        &mut self,
        frees: &[FeatureSet],
        mode: BatchMode,
        stats: &mut SearchStats,
    ) -> Result<Vec<Option<WcxpCheck>>> {
        self.batch += 1;
        stats.batches += 1;
        let m = self.problem.num_features();
        let tokens: Vec<CancelToken> = frees.iter().map(|_| CancelToken::new()).collect();
        for (index, free) in frees.iter().enumerate() {
            let mut query = OracleQuery::freeing(self.ball, free, m);
            query.cancel = tokens[index].clone();
            stats.oracle_calls += 1;
            self.jobs
                .send(Job {
                    batch: self.batch,
                    index,
                    query,
                })
                .map_err(|_| OracleError::Backend("probe workers exited".into()))?;
        }
        let mut out: Vec<Option<WcxpCheck>> = vec![None; frees.len()];
        let mut returned = vec![false; frees.len()];
        let mut outstanding = frees.len();
        // lowest index known to hold; probes above it are irrelevant
        let mut first_true = usize::MAX;
        let mut failure: Option<OracleError> = None;
        while outstanding > 0 {
            let done = self
                .done
                .recv()
                .map_err(|_| OracleError::Backend("probe workers exited".into()))?;
            if done.batch != self.batch || returned[done.index] {
                continue;
            }
            returned[done.index] = true;
            outstanding -= 1;
            match done.answer {
                Err(e) => {
                    if failure.is_none() {
                        failure = Some(e);
                        tokens.iter().for_each(CancelToken::cancel);
                    }
                }
                Ok(answer) => {
                    let check = to_check(answer);
                    if check.is_none() {
                        stats.cancelled_probes += 1;
                    }
                    if mode == BatchMode::FirstTrue
                        && check.as_ref().is_some_and(|c| c.holds)
                        && done.index < first_true
                    {
                        first_true = done.index;
                        tokens[first_true + 1..].iter().for_each(CancelToken::cancel);
                    }
                    out[done.index] = check;
                }
            }
        }
        if let Some(e) = failure {
            return Err(e.into());
        }
        if first_true != usize::MAX {
            out[first_true + 1..].iter_mut().for_each(|o| *o = None);
        }
        if out.iter().take(first_true.saturating_add(1)).any(Option::is_none) {
            return Err(OracleError::Protocol("uncancelled probe came back cancelled".into()).into());
        }
        Ok(out)
    }
}
