//! The persisted classifier.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use semnet::classifier::nn_classify;
use semnet::{BoundReport, DistanceSpec, Label, NNModel};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// Prototypes as raw items, or as row indices of the training table when
/// the distance is precomputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prototypes {
    Items(Vec<Vec<f64>>),
    Rows(Vec<usize>),
}

impl Prototypes {
    pub fn len(&self) -> usize {
        match self {
            Prototypes::Items(v) => v.len(),
            Prototypes::Rows(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: u32,
    pub distance_spec: DistanceSpec,
    pub prototypes: Prototypes,
    pub prototype_labels: Vec<Label>,
    #[serde(serialize_with = "margin_out", deserialize_with = "margin_in")]
    pub margin_used: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundReport>,
}

fn margin_out<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn margin_in<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Number(v) => Ok(v),
        Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
        Raw::Text(t) => Err(serde::de::Error::custom(format!("margin must be a number or \"inf\", got \"{t}\""))),
    }
}

impl ModelFile {
    /// Packages a trained model; `items` are the training rows.
    pub fn from_model(model: &NNModel, spec: DistanceSpec, items: &[Vec<f64>], bound: Option<BoundReport>) -> Self {
        let prototypes = match spec {
            DistanceSpec::Precomputed => Prototypes::Rows(model.prototypes.clone()),
            _ => Prototypes::Items(model.prototypes.iter().map(|&i| items[i].clone()).collect()),
        };
        ModelFile {
            version: FORMAT_VERSION,
            distance_spec: spec,
            prototypes,
            prototype_labels: model.prototype_labels.clone(),
            margin_used: model.margin_used,
            bound,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("model serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let model: ModelFile = serde_json::from_str(text)?;
        model.check()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        Ok(std::fs::write(path, self.to_json())?)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn check(&self) -> Result<(), CliError> {
        if self.version != FORMAT_VERSION {
            return Err(CliError::Validation(format!("unsupported model version {}", self.version)));
        }
        if self.prototypes.is_empty() {
            return Err(CliError::Validation("model has no prototypes".into()));
        }
        if self.prototypes.len() != self.prototype_labels.len() {
            return Err(CliError::Validation(format!(
                "{} prototypes but {} labels",
                self.prototypes.len(),
                self.prototype_labels.len()
            )));
        }
        match (&self.prototypes, self.distance_spec) {
            (Prototypes::Rows(_), DistanceSpec::Precomputed) => {}
            (Prototypes::Items(_), spec) if spec != DistanceSpec::Precomputed => spec.validate()?,
            _ => {
                return Err(CliError::Validation(
                    "row prototypes go with a precomputed distance, raw items with any other".into(),
                ))
            }
        }
        Ok(())
    }

    /// Distances from one query row to every prototype.
    pub fn distances(&self, query: &[f64]) -> Result<Vec<f64>, CliError> {
        match &self.prototypes {
            Prototypes::Items(items) => items
                .iter()
                .map(|p| self.distance_spec.distance(query, p).map_err(CliError::from))
                .collect(),
            Prototypes::Rows(rows) => rows
                .iter()
                .map(|&r| {
                    query.get(r).copied().ok_or_else(|| {
                        CliError::Validation(format!("query row has {} distances, prototype needs column {r}", query.len()))
                    })
                })
                .collect(),
        }
    }

    pub fn classify(&self, query: &[f64]) -> Result<Label, CliError> {
        let dists = self.distances(query)?;
        let view = NNModel {
            prototypes: (0..dists.len()).collect(),
            prototype_labels: self.prototype_labels.clone(),
            margin_used: self.margin_used,
            source_digest: String::new(),
        };
        Ok(nn_classify(&view, &dists)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(margin: f64) -> ModelFile {
        ModelFile {
            version: FORMAT_VERSION,
            distance_spec: DistanceSpec::FractionalLp { p: 0.5 },
            prototypes: Prototypes::Items(vec![vec![0.0, 0.1], vec![1.0 / 3.0, 2.0]]),
            prototype_labels: vec![Label::Positive, Label::Negative],
            margin_used: margin,
            bound: None,
        }
    }

    #[test]
    fn infinite_margin_as_text() {
        let m = sample(f64::INFINITY);
        let text = m.to_json();
        assert!(text.contains("\"margin_used\": \"inf\""));
        assert_eq!(ModelFile::from_json(&text).unwrap(), m);
    }

    #[test]
    fn byte_stable() {
        let text = sample(0.7).to_json();
        assert_eq!(ModelFile::from_json(&text).unwrap().to_json(), text);
    }

    #[test]
    fn rejects_inconsistent() {
        let mut m = sample(1.0);
        m.prototype_labels.pop();
        assert!(ModelFile::from_json(&m.to_json()).is_err());
        let mut m = sample(1.0);
        m.distance_spec = DistanceSpec::Precomputed;
        assert!(ModelFile::from_json(&m.to_json()).is_err());
        assert!(ModelFile::from_json(&sample(1.0).to_json().replace("\"version\": 1", "\"version\": 9")).is_err());
    }
}
