//! JSON model documents.
//!
//! ```json
//! {
//!   "kind": "linear",
//!   "num_features": 2,
//!   "num_classes": 2,
//!   "domains": [{"type": "real"}, {"type": "finite", "values": [0, 1]}],
//!   "weights": [[3, -1], [-3, 1]],
//!   "biases": [0, 0]
//! }
//! ```
//!
//! `mlp` documents carry `layers` (`weights`, `bias`, `activation`), and
//! `predicate` documents carry `rules` (`if`, `class`) plus `default`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Layer, LinearModel, MlpModel, Model, PredicateModel, Rule};
use crate::error::{Error, Result};
use crate::space::{Domain, FeatureSpace};

/// A model together with the feature space it is declared over.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: Model,
    pub space: FeatureSpace,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    #[serde(rename = "if")]
    condition: String,
    class: usize,
}

#[derive(Serialize, Deserialize)]
struct LinearDoc {
    num_features: usize,
    num_classes: usize,
    domains: Vec<Domain>,
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MlpDoc {
    num_features: usize,
    num_classes: usize,
    domains: Vec<Domain>,
    layers: Vec<Layer>,
}

#[derive(Serialize, Deserialize)]
struct PredicateDoc {
    num_features: usize,
    num_classes: usize,
    domains: Vec<Domain>,
    rules: Vec<RuleDoc>,
    default: usize,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Document {
    Linear(LinearDoc),
    Mlp(MlpDoc),
    Predicate(PredicateDoc),
}

impl ModelFile {
    pub fn new(model: Model, space: FeatureSpace) -> Result<Self> {
        if model.num_features() != space.len() {
            return Err(Error::Validation(format!(
                "model takes {} features but the feature space declares {}",
                model.num_features(),
                space.len()
            )));
        }
        Ok(Self { model, space })
    }

    fn into_document(self) -> Document {
        let num_features = self.model.num_features();
        let num_classes = self.model.num_classes();
        let domains: Vec<Domain> = self.space.into();
        match self.model {
            Model::Linear(m) => Document::Linear(LinearDoc {
                num_features,
                num_classes,
                domains,
                weights: m.weights,
                biases: m.biases,
            }),
            Model::Mlp(m) => Document::Mlp(MlpDoc {
                num_features,
                num_classes,
                domains,
                layers: m.layers,
            }),
            Model::Predicate(m) => Document::Predicate(PredicateDoc {
                num_features,
                num_classes,
                domains,
                rules: m
                    .rules
                    .iter()
                    .map(|r| RuleDoc {
                        condition: r.source.clone(),
                        class: r.class,
                    })
                    .collect(),
                default: m.default,
            }),
        }
    }

    fn from_document(doc: Document) -> Result<Self> {
        let (num_features, num_classes, domains, model) = match doc {
            Document::Linear(LinearDoc {
                num_features,
                num_classes,
                domains,
                weights,
                biases,
            }) => (
                num_features,
                num_classes,
                domains,
                Model::Linear(LinearModel::new(weights, biases)?),
            ),
            Document::Mlp(MlpDoc {
                num_features,
                num_classes,
                domains,
                layers,
            }) => (num_features, num_classes, domains, Model::Mlp(MlpModel::new(layers)?)),
            Document::Predicate(PredicateDoc {
                num_features,
                num_classes,
                domains,
                rules,
                default,
            }) => {
                let rules = rules
                    .into_iter()
                    .map(|r| Rule::new(&r.condition, r.class))
                    .collect::<Result<Vec<_>>>()?;
                (
                    num_features,
                    num_classes,
                    domains,
                    Model::Predicate(PredicateModel::new(num_features, num_classes, rules, default)?),
                )
            }
        };
        if domains.len() != num_features {
            return Err(Error::Validation(format!(
                "num_features is {num_features} but {} domains are declared",
                domains.len()
            )));
        }
        if model.num_features() != num_features {
            return Err(Error::Validation(format!(
                "num_features is {num_features} but the model takes {} inputs",
                model.num_features()
            )));
        }
        if model.num_classes() != num_classes {
            return Err(Error::Validation(format!(
                "num_classes is {num_classes} but the model produces {} classes",
                model.num_classes()
            )));
        }
        Self::new(model, FeatureSpace::new(domains)?)
    }
}

fn typed<T: serde::de::DeserializeOwned>(value: serde_json::Value, origin: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let message = if path.is_empty() || path == "." {
            inner.to_string()
        } else {
            format!("field `{path}`: {inner}")
        };
        Error::Parse {
            path: origin.to_string(),
            message,
        }
    })
}

/// Parses a model document; `origin` names the source in diagnostics.
pub fn parse_model(text: &str, origin: &str) -> Result<ModelFile> {
    let parse_error = |message: String| Error::Parse {
        path: origin.to_string(),
        message,
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| parse_error(e.to_string()))?;
    let kind = match value.get("kind") {
        Some(serde_json::Value::String(k)) => k.clone(),
        Some(_) => return Err(parse_error("field `kind`: expected a string".into())),
        None => return Err(parse_error("missing field `kind`".into())),
    };
    let doc = match kind.as_str() {
        "linear" => Document::Linear(typed(value, origin)?),
        "mlp" => Document::Mlp(typed(value, origin)?),
        "predicate" => Document::Predicate(typed(value, origin)?),
        other => {
            return Err(parse_error(format!(
                "field `kind`: unknown model kind {other:?}, expected linear, mlp or predicate"
            )))
        }
    };
    ModelFile::from_document(doc)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text, &path.display().to_string())
}

pub fn write_model_string(model: &ModelFile) -> String {
    let mut s = serde_json::to_string_pretty(&model.clone().into_document()).expect("model documents always serialize");
    s.push('\n');
    s
}

pub fn save_model(model: &ModelFile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_model_string(model)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINEAR: &str = r#"{
        "kind": "linear", "num_features": 2, "num_classes": 2,
        "domains": [{"type": "real"}, {"type": "finite", "values": [0, 1]}],
        "weights": [[0.1, -1e-3], [-0.30000000000000004, 1]],
        "biases": [0, 0.5]
    }"#;

    #[test]
    fn linear_round_trip_is_bit_exact() {
        let m = parse_model(LINEAR, "inline").unwrap();
        let again = parse_model(&write_model_string(&m), "again").unwrap();
        assert_eq!(m, again);
        let (Model::Linear(a), Model::Linear(b)) = (&m.model, &again.model) else {
            panic!("kind changed");
        };
        for (ra, rb) in a.weights().iter().zip(b.weights()) {
            for (x, y) in ra.iter().zip(rb) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn predicate_round_trip_keeps_rule_text() {
        let src = r#"{"kind": "predicate", "num_features": 3, "num_classes": 2,
            "domains": [{"type":"real"},{"type":"real"},{"type":"real"}],
            "rules": [{"if": "0 < x1 < 2 && 4*x1 >= (x2 + x3)", "class": 1}], "default": 0}"#;
        let m = parse_model(src, "inline").unwrap();
        let text = write_model_string(&m);
        assert!(text.contains("4*x1 >= (x2 + x3)"));
        assert_eq!(parse_model(&text, "again").unwrap(), m);
    }

    #[test]
    fn malformed_document_names_the_field() {
        let bad = LINEAR.replace("\"biases\": [0, 0.5]", "\"biases\": [0, \"x\"]");
        let err = parse_model(&bad, "bad.json").unwrap_err().to_string();
        assert!(err.contains("biases"), "{err}");
        let missing = LINEAR.replace(",\n        \"biases\": [0, 0.5]", "");
        let err = parse_model(&missing, "bad.json").unwrap_err().to_string();
        assert!(err.contains("biases"), "{err}");
    }

    #[test]
    fn arity_mismatch_against_feature_space() {
        let bad = LINEAR.replace("\"num_features\": 2", "\"num_features\": 3");
        assert!(matches!(parse_model(&bad, "x"), Err(Error::Validation(_))));
        let bad = LINEAR.replace(
            r#"[{"type": "real"}, {"type": "finite", "values": [0, 1]}]"#,
            r#"[{"type": "real"}]"#,
        );
        assert!(matches!(parse_model(&bad, "x"), Err(Error::Validation(_))));
    }

    #[test]
    fn save_and_load_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let m = parse_model(LINEAR, "inline").unwrap();
        save_model(&m, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), m);
        assert!(matches!(
            load_model(dir.path().join("missing.json")),
            Err(Error::Io { .. })
        ));
    }
}
