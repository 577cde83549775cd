use std::sync::{Arc, Mutex};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Oracle, OracleAnswer, OracleQuery};
use crate::error::OracleError;
use crate::problem::ExplanationProblem;

/// Per-call delay distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delay {
    Fixed(Duration),
    /// Uniform in `[min, max]`, drawn from a seeded generator shared by all
    /// clones of the wrapper.
    Uniform {
        min: Duration,
        max: Duration,
        seed: u64,
    },
}

impl Delay {
    pub fn none() -> Self {
        Delay::Fixed(Duration::ZERO)
    }

    pub fn millis(ms: u64) -> Self {
        Delay::Fixed(Duration::from_millis(ms))
    }
}

/// Adds a configurable delay before every call to the inner oracle. The
/// answers are the inner oracle's; a cancelled query skips the rest of its
/// delay.
#[derive(Debug, Clone)]
pub struct LatencyOracle<O> {
    inner: O,
    delay: Delay,
    rng: Option<Arc<Mutex<ChaCha8Rng>>>,
}

impl<O: Oracle> LatencyOracle<O> {
    pub fn new(inner: O, delay: Delay) -> Self {
        let rng = match delay {
            Delay::Uniform { seed, .. } => Some(Arc::new(Mutex::new(ChaCha8Rng::seed_from_u64(seed)))),
            Delay::Fixed(_) => None,
        };
        Self { inner, delay, rng }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    fn next_delay(&self) -> Duration {
        match self.delay {
            Delay::Fixed(d) => d,
            Delay::Uniform { min, max, .. } => {
                let (lo, hi) = (min.min(max), min.max(max));
                let mut rng = self
                    .rng
                    .as_ref()
                    .expect("uniform delay has a generator")
                    .lock()
                    .unwrap();
                Duration::from_nanos(rng.random_range(lo.as_nanos() as u64..=hi.as_nanos() as u64))
            }
        }
    }
}

impl<O: Oracle> Oracle for LatencyOracle<O> {
    fn problem(&self) -> &ExplanationProblem {
        self.inner.problem()
    }

    fn find_adv_ex(&mut self, query: &OracleQuery) -> Result<OracleAnswer, OracleError> {
        let delay = self.next_delay();
        if !delay.is_zero() && query.cancel.sleep(delay) {
            return Ok(OracleAnswer::Cancelled);
        }
        self.inner.find_adv_ex(query)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureSet;
    use crate::fixtures::running_example;
    use crate::norm::{Ball, Norm};
    use crate::oracle::ExhaustiveOracle;
    use std::thread;
    use std::time::Instant;

    fn queries() -> Vec<OracleQuery> {
        let ball = Ball::new(Norm::L1, 1.0).unwrap();
        (0..8usize)
            .map(|mask| {
                let fixed = FeatureSet::from_indices((0..3).filter(|i| mask >> i & 1 == 1));
                OracleQuery::new(ball, fixed)
            })
            .collect()
    }

    #[test]
    fn zero_delay_is_transparent() {
        let mut inner = ExhaustiveOracle::new(running_example());
        let mut wrapped = LatencyOracle::new(inner.clone(), Delay::none());
        for q in queries() {
            assert_eq!(wrapped.find_adv_ex(&q).unwrap(), inner.find_adv_ex(&q).unwrap());
        }
    }

    #[test]
    fn fixed_delay_accumulates() {
        let mut o = LatencyOracle::new(ExhaustiveOracle::new(running_example()), Delay::millis(50));
        let q = &queries()[0];
        let start = Instant::now();
        for _ in 0..10 {
            o.find_adv_ex(q).unwrap();
        }
        assert!(start.elapsed() >= Duration::from_millis(500));
    }

    #[test]
    fn cancel_cuts_the_delay_short() {
        let mut o = LatencyOracle::new(ExhaustiveOracle::new(running_example()), Delay::millis(2_000));
        let q = queries()[0].clone();
        let token = q.cancel.clone();
        let h = thread::spawn(move || {
            let start = Instant::now();
            (o.find_adv_ex(&q).unwrap(), start.elapsed())
        });
        thread::sleep(Duration::from_millis(30));
        token.cancel();
        let (answer, took) = h.join().unwrap();
        assert_eq!(answer, OracleAnswer::Cancelled);
        assert!(took < Duration::from_millis(2_000));
    }

    #[test]
    fn uniform_delay_stays_in_range() {
        let o = LatencyOracle::new(
            ExhaustiveOracle::new(running_example()),
            Delay::Uniform {
                min: Duration::from_millis(1),
                max: Duration::from_millis(3),
                seed: 7,
            },
        );
        for _ in 0..50 {
            let d = o.next_delay();
            assert!(d >= Duration::from_millis(1) && d <= Duration::from_millis(3));
        }
    }
}
