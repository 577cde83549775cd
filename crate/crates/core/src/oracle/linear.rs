//! Closed-form oracle for linear models.
//!
//! For each competing class `k`, the worst case of the margin
//! `(w_c − w_k)·x + (b_c − b_k)` over the ball (free coordinates only) has a
//! closed form: with `d = w_k − w_c`, the adversary moves along `sign(d_i)`.
//! Finite domains are relaxed to their hull `[min, max]`.

use super::exhaustive::exhaustive_find;
use super::{is_valid_witness, ExhaustiveOracle, Oracle, OracleAnswer, OracleQuery};
use crate::error::OracleError;
use crate::features::FeatureSet;
use crate::models::{LinearModel, Model};
use crate::norm::{Ball, Norm};
use crate::problem::ExplanationProblem;
use crate::space::FeatureSpace;

/// Margins within `±BOUNDARY_TOLERANCE` of zero are treated as undecided.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Minimum margin over the ball and the perturbation attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginBound {
    /// `min_x score_c(x) − score_k(x)` for the worst competing class.
    pub margin: f64,
    /// The competing class attaining `margin`.
    pub class: usize,
    /// Optimal perturbation `x − v` for that class (zero on fixed features).
    pub delta: Vec<f64>,
}

/// Per-coordinate room to move in direction `dir` from `v_i`.
fn slack(space: &FeatureSpace, i: usize, v: f64, dir: f64) -> f64 {
    let (lo, hi) = space.domain(i).hull();
    if dir > 0.0 {
        hi.map_or(f64::INFINITY, |h| (h - v).max(0.0))
    } else {
        lo.map_or(f64::INFINITY, |l| (v - l).max(0.0))
    }
}

fn pair_bound(
    model: &LinearModel,
    space: &FeatureSpace,
    v: &[f64],
    c: usize,
    k: usize,
    free: &FeatureSet,
    ball: Ball,
) -> Result<(f64, Vec<f64>), OracleError> {
    let eps = ball.epsilon();
    let (wc, wk) = (&model.weights()[c], &model.weights()[k]);
    let margin0 = model.class_score(v, c) - model.class_score(v, k);
    let mut delta = vec![0.0; v.len()];
    let d = |i: usize| wk[i] - wc[i];
    let mut gain = 0.0;
    match ball.norm() {
        Norm::LInf => {
            for i in free.iter() {
                let di = d(i);
                if di == 0.0 {
                    continue;
                }
                let step = eps.min(slack(space, i, v[i], di));
                delta[i] = step * di.signum();
                gain += di.abs() * step;
            }
        }
        Norm::L1 => {
            let mut coords: Vec<usize> = free.iter().filter(|&i| d(i) != 0.0).collect();
            coords.sort_by(|&a, &b| d(b).abs().total_cmp(&d(a).abs()).then(a.cmp(&b)));
            let mut budget = eps;
            for i in coords {
                if budget <= 0.0 {
                    break;
                }
                let di = d(i);
                let step = budget.min(slack(space, i, v[i], di));
                delta[i] = step * di.signum();
                gain += di.abs() * step;
                budget -= step;
            }
        }
        Norm::L2 => {
            let norm = free.iter().map(|i| d(i) * d(i)).sum::<f64>().sqrt();
            if norm > 0.0 {
                for i in free.iter() {
                    let di = d(i);
                    let step = eps * di / norm;
                    if step.abs() > slack(space, i, v[i], di) {
                        return Err(OracleError::Unsupported(format!(
                            "closed-form l2 bound is inexact: free feature x{} hits its domain bound",
                            i + 1
                        )));
                    }
                    delta[i] = step;
                }
                gain = eps * norm;
            }
        }
        Norm::L0 => {
            return Err(OracleError::Unsupported(
                "closed-form linear oracle supports l1, l2 and linf only".into(),
            ))
        }
    }
    Ok((margin0 - gain, delta))
}

/// Worst-case margin of class `c` against every other class over the ball,
/// moving only the `free` coordinates.
pub fn linear_min_margin(
    model: &LinearModel,
    space: &FeatureSpace,
    v: &[f64],
    c: usize,
    free: &FeatureSet,
    ball: Ball,
) -> Result<MarginBound, OracleError> {
    let mut best: Option<MarginBound> = None;
    for k in (0..model.num_classes()).filter(|&k| k != c) {
        let (margin, delta) = pair_bound(model, space, v, c, k, free, ball)?;
        if best.as_ref().is_none_or(|b| margin < b.margin) {
            best = Some(MarginBound {
                margin,
                class: k,
                delta,
            });
        }
    }
    Ok(best.expect("linear models have at least two classes"))
}

/// Closed-form oracle for [`LinearModel`]s.
///
/// Margins inside the boundary band are re-decided by the exhaustive oracle
/// when every free feature is finite; otherwise an adversarial example is
/// reported only on a strictly negative margin. The same fallback applies
/// when the hull optimum is not a point of a finite grid, so answers on
/// all-finite free sets are exact; with a mix of real and finite free
/// features a found answer may rest on the relaxation.
#[derive(Debug, Clone)]
pub struct LinearOracle {
    problem: ExplanationProblem,
}

impl LinearOracle {
    pub fn new(problem: ExplanationProblem) -> Result<Self, OracleError> {
        if !matches!(problem.model(), Model::Linear(_)) {
            return Err(OracleError::Unsupported(format!(
                "closed-form oracle needs a linear model, got {}",
                problem.model().kind()
            )));
        }
        Ok(Self { problem })
    }

    fn model(&self) -> &LinearModel {
        match self.problem.model() {
            Model::Linear(m) => m,
            _ => unreachable!("checked at construction"),
        }
    }
}

impl Oracle for LinearOracle {
    fn problem(&self) -> &ExplanationProblem {
        &self.problem
    }

    fn find_adv_ex(&mut self, query: &OracleQuery) -> Result<OracleAnswer, OracleError> {
        if query.cancel.is_cancelled() {
            return Ok(OracleAnswer::Cancelled);
        }
        let m = self.problem.num_features();
        let free = query.fixed.complement(m);
        let exhaustive_ok = ExhaustiveOracle::supports(&self.problem, query);
        let bound = match linear_min_margin(
            self.model(),
            self.problem.space(),
            self.problem.point(),
            self.problem.label(),
            &free,
            query.ball,
        ) {
            Ok(b) => b,
            Err(OracleError::Unsupported(_)) if exhaustive_ok => {
                return exhaustive_find(&self.problem, query, super::DEFAULT_ENUMERATION_CAP)
            }
            Err(e) => return Err(e),
        };
        let found = if bound.margin < -BOUNDARY_TOLERANCE {
            true
        } else if bound.margin > BOUNDARY_TOLERANCE {
            false
        } else if exhaustive_ok {
            return exhaustive_find(&self.problem, query, super::DEFAULT_ENUMERATION_CAP);
        } else {
            bound.margin < 0.0
        };
        if !found {
            return Ok(OracleAnswer::NotFound);
        }
        let mut x: Vec<f64> = self.problem.point().to_vec();
        let shrink = if query.ball.norm() == Norm::L2 {
            1.0 - 1e-12
        } else {
            1.0
        };
        for (xi, di) in x.iter_mut().zip(&bound.delta) {
            *xi += di * shrink;
        }
        if is_valid_witness(&self.problem, query.ball, &query.fixed, &x) {
            return Ok(OracleAnswer::Found { witness: Some(x) });
        }
        // the hull optimum fell between grid points
        if exhaustive_ok {
            return exhaustive_find(&self.problem, query, super::DEFAULT_ENUMERATION_CAP);
        }
        Ok(OracleAnswer::Found { witness: None })
    }
}
