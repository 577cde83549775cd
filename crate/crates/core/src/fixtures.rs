//! Small reference problems used by tests, examples and the benchmark.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::models::{LinearModel, Model, PredicateModel, Rule};
use crate::problem::ExplanationProblem;
use crate::space::{Domain, FeatureSpace};

/// Grid used for every coordinate of the running example.
pub const RUNNING_GRID: [f64; 6] = [0.0, 0.5, 1.0, 1.5, 2.0, 5.0];

fn predicate(m: usize, condition: &str) -> Model {
    Model::Predicate(PredicateModel::new(m, 2, vec![Rule::new(condition, 1).unwrap()], 0).unwrap())
}

fn boolean(m: usize) -> FeatureSpace {
    FeatureSpace::uniform(m, Domain::finite([0.0, 1.0])).unwrap()
}

/// κ(x) = 1 iff 0 < x1 < 2 ∧ 4·x1 ≥ x2 + x3, at v = (1,1,1) with c = 1.
pub fn running_example() -> ExplanationProblem {
    let space = FeatureSpace::uniform(3, Domain::finite(RUNNING_GRID)).unwrap();
    ExplanationProblem::at_point(predicate(3, "0 < x1 < 2 && 4*x1 >= x2 + x3"), space, vec![1.0; 3]).unwrap()
}

/// κ(x) = x1 ∧ x2 over {0,1}⁴ at v = (1,1,0,0).
pub fn and_problem() -> ExplanationProblem {
    ExplanationProblem::at_point(predicate(4, "x1 == 1 && x2 == 1"), boolean(4), vec![1.0, 1.0, 0.0, 0.0]).unwrap()
}

/// κ(x) = x1 ∨ x2 over {0,1}² at v = (1,1).
pub fn or_problem() -> ExplanationProblem {
    ExplanationProblem::at_point(predicate(2, "x1 == 1 || x2 == 1"), boolean(2), vec![1.0, 1.0]).unwrap()
}

/// A model that always predicts class 0, over {0,1}³.
pub fn constant_problem() -> ExplanationProblem {
    let model = Model::Predicate(PredicateModel::new(3, 2, vec![], 0).unwrap());
    ExplanationProblem::at_point(model, boolean(3), vec![0.0; 3]).unwrap()
}

/// Binary linear problem over unbounded reals at `v = 0`.
///
/// Weights are drawn with magnitude in `[0.5, 1.5]` and random sign; the
/// bias is chosen so that, under an L∞ ball of radius 1, freeing roughly a
/// `fraction` of the total weight mass is needed to flip the prediction.
pub fn synthetic_linear(m: usize, fraction: f64, seed: u64) -> ExplanationProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..m)
        .map(|_| {
            let mag: f64 = rng.random_range(0.5..1.5);
            if rng.random_bool(0.5) {
                mag
            } else {
                -mag
            }
        })
        .collect();
    let mass: f64 = w.iter().map(|x| x.abs()).sum();
    let model = Model::Linear(LinearModel::binary(w, fraction * mass).unwrap());
    let space = FeatureSpace::uniform(m, Domain::unbounded()).unwrap();
    ExplanationProblem::at_point(model, space, vec![0.0; m]).unwrap()
}
