//! Built-in classifiers with deterministic forward evaluation.

mod expr;
mod file;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use expr::{BinOp, CmpOp, Expr};
pub use file::{load_model, parse_model, save_model, write_model_string, ModelFile};

/// Index of the largest score; ties go to the lowest class index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

fn check_arity(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::Usage(format!(
            "model expects {expected} features, got a point of length {}",
            x.len()
        )));
    }
    Ok(())
}

/// `argmax_k (w_k · x + b_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

impl LinearModel {
    pub fn new(weights: Vec<Vec<f64>>, biases: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::Model("a linear model needs at least two classes".into()));
        }
        if biases.len() != weights.len() {
            return Err(Error::Model(format!(
                "{} weight rows but {} biases",
                weights.len(),
                biases.len()
            )));
        }
        let m = weights[0].len();
        if m == 0 {
            return Err(Error::Model("weight rows are empty".into()));
        }
        if let Some(k) = weights.iter().position(|row| row.len() != m) {
            return Err(Error::Model(format!(
                "weight row {k} has length {} but row 0 has length {m}",
                weights[k].len()
            )));
        }
        if weights.iter().flatten().chain(&biases).any(|w| !w.is_finite()) {
            return Err(Error::Model("weights and biases must be finite".into()));
        }
        Ok(Self { weights, biases })
    }

    /// Binary model with a single weight vector: class 0 scores `w·x + b`,
    /// class 1 scores `-(w·x + b)`.
    pub fn binary(w: Vec<f64>, b: f64) -> Result<Self> {
        let neg: Vec<f64> = w.iter().map(|x| -x).collect();
        Self::new(vec![w, neg], vec![b, -b])
    }

    pub fn num_features(&self) -> usize {
        self.weights[0].len()
    }

    pub fn num_classes(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn class_score(&self, x: &[f64], k: usize) -> f64 {
        self.weights[k].iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + self.biases[k]
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        (0..self.num_classes()).map(|k| self.class_score(x, k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

/// Fully connected layer; `weights` is `out × in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (row, b) in self.weights.iter().zip(&self.bias) {
            let z = row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b;
            out.push(match self.activation {
                Activation::Relu => z.max(0.0),
                Activation::Identity => z,
            });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    layers: Vec<Layer>,
}

impl MlpModel {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Model("an MLP needs at least one layer".into()));
        }
        let mut width = None;
        for (l, layer) in layers.iter().enumerate() {
            if layer.weights.is_empty() {
                return Err(Error::Model(format!("layer {l} has no units")));
            }
            if layer.bias.len() != layer.weights.len() {
                return Err(Error::Model(format!(
                    "layer {l}: {} weight rows but {} biases",
                    layer.weights.len(),
                    layer.bias.len()
                )));
            }
            let fan_in = layer.weights[0].len();
            if fan_in == 0 || layer.weights.iter().any(|r| r.len() != fan_in) {
                return Err(Error::Model(format!("layer {l}: ragged weight matrix")));
            }
            if let Some(w) = width {
                if w != fan_in {
                    return Err(Error::Model(format!(
                        "layer {l} expects {fan_in} inputs but the previous layer has {w} units"
                    )));
                }
            }
            if layer
                .weights
                .iter()
                .flatten()
                .chain(&layer.bias)
                .any(|w| !w.is_finite())
            {
                return Err(Error::Model(format!("layer {l}: non-finite parameter")));
            }
            width = Some(layer.weights.len());
        }
        if layers.last().unwrap().weights.len() < 2 {
            return Err(Error::Model("the output layer needs at least two classes".into()));
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn num_features(&self) -> usize {
        self.layers[0].weights[0].len()
    }

    pub fn num_classes(&self) -> usize {
        self.layers.last().unwrap().weights.len()
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }
}

/// One `if <condition> then <class>` rule.
#[derive(Debug, Clone)]
pub struct Rule {
    source: String,
    condition: Expr,
    class: usize,
}

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.condition == other.condition && self.class == other.class
    }
}

impl Rule {
    pub fn new(condition: &str, class: usize) -> Result<Self> {
        Ok(Self {
            source: condition.trim().to_string(),
            condition: Expr::parse(condition)?,
            class,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn condition(&self) -> &Expr {
        &self.condition
    }

    pub fn class(&self) -> usize {
        self.class
    }
}

/// Closed-form decision list: the first rule whose condition holds decides
/// the class, otherwise `default`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredicateModel {
    num_features: usize,
    num_classes: usize,
    rules: Vec<Rule>,
    default: usize,
}

impl PredicateModel {
    pub fn new(num_features: usize, num_classes: usize, rules: Vec<Rule>, default: usize) -> Result<Self> {
        if num_features == 0 {
            return Err(Error::Model("predicate model needs at least one feature".into()));
        }
        if num_classes < 2 {
            return Err(Error::Model("predicate model needs at least two classes".into()));
        }
        for r in &rules {
            if r.condition.arity() > num_features {
                return Err(Error::Model(format!(
                    "rule {:?} references x{} but the model has {num_features} features",
                    r.source,
                    r.condition.arity()
                )));
            }
            if r.class >= num_classes {
                return Err(Error::Model(format!(
                    "rule {:?} yields class {} outside 0..{num_classes}",
                    r.source, r.class
                )));
            }
        }
        if default >= num_classes {
            return Err(Error::Model(format!(
                "default class {default} outside 0..{num_classes}"
            )));
        }
        Ok(Self {
            num_features,
            num_classes,
            rules,
            default,
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn default_class(&self) -> usize {
        self.default
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        self.rules
            .iter()
            .find(|r| r.condition.holds(x))
            .map_or(self.default, |r| r.class)
    }
}

/// A classifier κ: 𝔽 → {0..K−1}.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Mlp(MlpModel),
    Predicate(PredicateModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Linear(_) => "linear",
            Model::Mlp(_) => "mlp",
            Model::Predicate(_) => "predicate",
        }
    }

    pub fn num_features(&self) -> usize {
        match self {
            Model::Linear(m) => m.num_features(),
            Model::Mlp(m) => m.num_features(),
            Model::Predicate(m) => m.num_features,
        }
    }

    pub fn num_classes(&self) -> usize {
        match self {
            Model::Linear(m) => m.num_classes(),
            Model::Mlp(m) => m.num_classes(),
            Model::Predicate(m) => m.num_classes,
        }
    }

    /// Predicted class. Assumes `x.len() == num_features()`; use
    /// [`Model::try_predict`] on unchecked input.
    pub fn predict(&self, x: &[f64]) -> usize {
        match self {
            Model::Linear(m) => argmax(&m.scores(x)),
            Model::Mlp(m) => argmax(&m.scores(x)),
            Model::Predicate(m) => m.predict(x),
        }
    }

    pub fn try_predict(&self, x: &[f64]) -> Result<usize> {
        check_arity(self.num_features(), x)?;
        Ok(self.predict(x))
    }

    pub fn has_scores(&self) -> bool {
        !matches!(self, Model::Predicate(_))
    }

    /// Logit of class `k`.
    pub fn score(&self, x: &[f64], k: usize) -> Result<f64> {
        check_arity(self.num_features(), x)?;
        if k >= self.num_classes() {
            return Err(Error::Usage(format!("class {k} outside 0..{}", self.num_classes())));
        }
        match self {
            Model::Linear(m) => Ok(m.class_score(x, k)),
            Model::Mlp(m) => Ok(m.scores(x)[k]),
            Model::Predicate(_) => Err(Error::Model("predicate models have no scores".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn running_example() -> Model {
        Model::Predicate(
            PredicateModel::new(3, 2, vec![Rule::new("0 < x1 < 2 && 4*x1 >= x2 + x3", 1).unwrap()], 0).unwrap(),
        )
    }

    fn lin() -> Model {
        Model::Linear(LinearModel::new(vec![vec![3.0, -1.0], vec![-3.0, 1.0]], vec![0.0, 0.0]).unwrap())
    }

    #[test]
    fn running_example_predictions() {
        let m = running_example();
        assert_eq!(m.predict(&[1.0, 1.0, 1.0]), 1);
        assert_eq!(m.predict(&[0.0, 1.0, 1.0]), 0);
    }

    #[test]
    fn linear_predict_and_score() {
        let m = lin();
        assert_eq!(m.predict(&[1.0, 1.0]), 0);
        assert_eq!(m.score(&[1.0, 1.0], 0).unwrap(), 2.0);
        assert_eq!(m.score(&[1.0, 1.0], 1).unwrap(), -2.0);
    }

    #[test]
    fn identity_mlp_scores() {
        let m = Model::Mlp(
            MlpModel::new(vec![Layer {
                weights: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                bias: vec![0.0, 0.0],
                activation: Activation::Identity,
            }])
            .unwrap(),
        );
        assert_eq!(m.score(&[0.3, 0.7], 1).unwrap(), 0.7);
        assert_eq!(m.predict(&[0.3, 0.7]), 1);
    }

    #[test]
    fn predicate_model_has_no_scores() {
        let err = running_example().score(&[1.0, 1.0, 1.0], 0).unwrap_err();
        assert!(err.to_string().contains("no scores"));
    }

    #[test]
    fn arity_mismatch() {
        assert!(lin().try_predict(&[1.0]).is_err());
        assert!(lin().score(&[1.0, 2.0, 3.0], 0).is_err());
    }

    #[test]
    fn ties_go_to_lowest_class() {
        assert_eq!(argmax(&[1.0, 1.0, 0.5]), 0);
        assert_eq!(argmax(&[0.0, 2.0, 2.0]), 1);
    }

    #[test]
    fn shape_validation() {
        assert!(LinearModel::new(vec![vec![1.0]], vec![0.0]).is_err());
        assert!(LinearModel::new(vec![vec![1.0], vec![1.0, 2.0]], vec![0.0, 0.0]).is_err());
        assert!(MlpModel::new(vec![]).is_err());
        let l1 = Layer {
            weights: vec![vec![1.0, 1.0]; 3],
            bias: vec![0.0; 3],
            activation: Activation::Relu,
        };
        let l2 = Layer {
            weights: vec![vec![1.0, 1.0]; 2],
            bias: vec![0.0; 2],
            activation: Activation::Identity,
        };
        assert!(MlpModel::new(vec![l1, l2]).is_err());
        assert!(PredicateModel::new(2, 2, vec![Rule::new("x3 > 0", 1).unwrap()], 0).is_err());
        assert!(PredicateModel::new(2, 2, vec![Rule::new("x1 > 0", 2).unwrap()], 0).is_err());
    }

    fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-3.0f64..3.0, cols), rows)
    }

    proptest! {
        #[test]
        fn bias_shift_leaves_prediction_unchanged(
            w in matrix(3, 4),
            b in prop::collection::vec(-2.0f64..2.0, 3),
            x in prop::collection::vec(-2.0f64..2.0, 4),
            shift in -5.0f64..5.0,
        ) {
            let m = LinearModel::new(w.clone(), b.clone()).unwrap();
            let shifted = LinearModel::new(w, b.iter().map(|v| v + shift).collect()).unwrap();
            let p = argmax(&m.scores(&x));
            let q = argmax(&shifted.scores(&x));
            // a shift may reorder exact float ties only
            let s = m.scores(&x);
            let near_tie = s.iter().enumerate().any(|(k, v)| k != p && (v - s[p]).abs() < 1e-9);
            prop_assert!(p == q || near_tie);
            prop_assert_eq!(Model::Linear(m.clone()).predict(&x), Model::Linear(m).predict(&x));
        }

        #[test]
        fn identity_mlp_equals_composed_linear_map(
            w1 in matrix(3, 4),
            b1 in prop::collection::vec(-1.0f64..1.0, 3),
            w2 in matrix(2, 3),
            b2 in prop::collection::vec(-1.0f64..1.0, 2),
            x in prop::collection::vec(-2.0f64..2.0, 4),
        ) {
            let mlp = MlpModel::new(vec![
                Layer { weights: w1.clone(), bias: b1.clone(), activation: Activation::Identity },
                Layer { weights: w2.clone(), bias: b2.clone(), activation: Activation::Identity },
            ]).unwrap();
            // W = W2·W1, b = W2·b1 + b2
            let w: Vec<Vec<f64>> = (0..2).map(|r| (0..4).map(|c| (0..3).map(|k| w2[r][k] * w1[k][c]).sum()).collect()).collect();
            let b: Vec<f64> = (0..2).map(|r| (0..3).map(|k| w2[r][k] * b1[k]).sum::<f64>() + b2[r]).collect();
            let lin = LinearModel::new(w, b).unwrap();
            let (s1, s2) = (mlp.scores(&x), lin.scores(&x));
            for k in 0..2 {
                prop_assert!((s1[k] - s2[k]).abs() < 1e-9);
            }
            if (s1[0] - s1[1]).abs() > 1e-9 {
                prop_assert_eq!(argmax(&s1), argmax(&s2));
            }
        }
    }
}
