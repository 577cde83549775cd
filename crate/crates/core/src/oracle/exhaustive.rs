//! Complete enumeration over finite domains; the ground-truth oracle.

use super::{Oracle, OracleAnswer, OracleQuery};
use crate::error::OracleError;
use crate::norm::Ball;
use crate::problem::ExplanationProblem;
use crate::space::Domain;

pub const DEFAULT_ENUMERATION_CAP: u64 = 50_000_000;

/// Enumerates assignments of the free features (ascending index, domain
/// values in declaration order), pruning partial assignments that already
/// leave the ball. The first adversarial assignment is the witness, so
/// witnesses are reproducible.
#[derive(Debug, Clone)]
pub struct ExhaustiveOracle {
    problem: ExplanationProblem,
    cap: u64,
}

impl ExhaustiveOracle {
    pub fn new(problem: ExplanationProblem) -> Self {
        Self {
            problem,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    /// Limit on evaluated candidates per query.
    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    /// Whether every non-fixed feature has a finite domain.
    pub fn supports(problem: &ExplanationProblem, query: &OracleQuery) -> bool {
        (0..problem.num_features()).all(|i| query.fixed.contains(i) || problem.space().domain(i).is_finite_set())
    }
}

enum Step {
    Found,
    Exhausted,
    Cancelled,
}

struct Search<'a> {
    problem: &'a ExplanationProblem,
    ball: Ball,
    free: Vec<(usize, &'a [f64])>,
    x: Vec<f64>,
    visited: u64,
    cap: u64,
    query: &'a OracleQuery,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize, acc: f64) -> Result<Step, OracleError> {
        if depth == self.free.len() {
            self.visited += 1;
            if self.visited > self.cap {
                return Err(OracleError::ResourceLimit { cap: self.cap });
            }
            let changed = self.problem.model().predict(&self.x) != self.problem.label();
            return Ok(if changed { Step::Found } else { Step::Exhausted });
        }
        let (feature, values) = self.free[depth];
        let centre = self.problem.point()[feature];
        let norm = self.ball.norm();
        for &value in values {
            if self.query.cancel.is_cancelled() {
                return Ok(Step::Cancelled);
            }
            let next = norm.accumulate(acc, value - centre);
            if !self.ball.admits_acc(next) {
                continue;
            }
            self.x[feature] = value;
            match self.descend(depth + 1, next)? {
                Step::Exhausted => {}
                other => return Ok(other),
            }
        }
        self.x[feature] = centre;
        Ok(Step::Exhausted)
    }
}

/// One exhaustive decision; see [`ExhaustiveOracle`].
pub fn exhaustive_find(
    problem: &ExplanationProblem,
    query: &OracleQuery,
    cap: u64,
) -> Result<OracleAnswer, OracleError> {
    let mut free = Vec::new();
    for i in 0..problem.num_features() {
        if query.fixed.contains(i) {
            continue;
        }
        match problem.space().domain(i) {
            Domain::Finite { values } => free.push((i, values.as_slice())),
            Domain::Real { .. } => {
                return Err(OracleError::Unsupported(format!(
                    "exhaustive oracle cannot enumerate the real-valued domain of free feature x{}",
                    i + 1
                )))
            }
        }
    }
    let mut search = Search {
        problem,
        ball: query.ball,
        free,
        x: problem.point().to_vec(),
        visited: 0,
        cap,
        query,
    };
    Ok(match search.descend(0, 0.0)? {
        Step::Found => OracleAnswer::Found {
            witness: Some(search.x),
        },
        Step::Exhausted => OracleAnswer::NotFound,
        Step::Cancelled => OracleAnswer::Cancelled,
    })
}

impl Oracle for ExhaustiveOracle {
    fn problem(&self) -> &ExplanationProblem {
        &self.problem
    }

    fn find_adv_ex(&mut self, query: &OracleQuery) -> Result<OracleAnswer, OracleError> {
        exhaustive_find(&self.problem, query, self.cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureSet;
    use crate::fixtures::{and_problem, running_example};
    use crate::models::{Model, PredicateModel, Rule};
    use crate::norm::Norm;
    use crate::space::{Domain, FeatureSpace};

    fn fixed(one_based: &[usize], m: usize) -> FeatureSet {
        FeatureSet::from_one_based(one_based, m).unwrap()
    }

    #[test]
    fn running_example_frees_x1() {
        let p = running_example();
        let ball = Ball::new(Norm::L1, 1.0).unwrap();
        let mut o = ExhaustiveOracle::new(p);
        let a = o.find_adv_ex(&OracleQuery::new(ball, fixed(&[2, 3], 3))).unwrap();
        assert_eq!(a.witness(), Some(&[0.0, 1.0, 1.0][..]));
        let a = o.find_adv_ex(&OracleQuery::new(ball, fixed(&[1], 3))).unwrap();
        assert_eq!(a, OracleAnswer::NotFound);
    }

    #[test]
    fn everything_fixed_is_never_adversarial() {
        let p = running_example();
        let ball = Ball::new(Norm::L1, 1.0).unwrap();
        let a = ExhaustiveOracle::new(p)
            .find_adv_ex(&OracleQuery::new(ball, FeatureSet::full(3)))
            .unwrap();
        assert_eq!(a, OracleAnswer::NotFound);
    }

    #[test]
    fn and_model_hamming_ball() {
        let p = and_problem();
        let ball = Ball::new(Norm::L0, 1.0).unwrap();
        let mut o = ExhaustiveOracle::new(p);
        let a = o.find_adv_ex(&OracleQuery::new(ball, fixed(&[1, 2], 4))).unwrap();
        assert_eq!(a, OracleAnswer::NotFound);
        let a = o.find_adv_ex(&OracleQuery::new(ball, fixed(&[2, 3, 4], 4))).unwrap();
        assert_eq!(a.witness(), Some(&[0.0, 1.0, 0.0, 0.0][..]));
    }

    #[test]
    fn real_domains_are_unsupported_and_cap_is_enforced() {
        let m = Model::Predicate(PredicateModel::new(2, 2, vec![Rule::new("x1 > 5", 1).unwrap()], 0).unwrap());
        let space = FeatureSpace::new(vec![Domain::unbounded(), Domain::finite([0.0, 1.0, 2.0])]).unwrap();
        let p = ExplanationProblem::at_point(m, space, vec![0.0, 0.0]).unwrap();
        let ball = Ball::new(Norm::LInf, 10.0).unwrap();
        let mut o = ExhaustiveOracle::new(p).with_cap(2);
        assert!(matches!(
            o.find_adv_ex(&OracleQuery::new(ball, FeatureSet::empty())),
            Err(OracleError::Unsupported(_))
        ));
        assert!(matches!(
            o.find_adv_ex(&OracleQuery::new(ball, fixed(&[1], 2))),
            Err(OracleError::ResourceLimit { cap: 2 })
        ));
    }

    #[test]
    fn cancelled_query_reports_cancelled() {
        let p = and_problem();
        let q = OracleQuery::new(Ball::new(Norm::L0, 4.0).unwrap(), FeatureSet::empty());
        q.cancel.cancel();
        assert_eq!(
            ExhaustiveOracle::new(p).find_adv_ex(&q).unwrap(),
            OracleAnswer::Cancelled
        );
    }
}
